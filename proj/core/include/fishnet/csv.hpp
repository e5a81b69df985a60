#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace fishnet
{
/*!
 * Minimal CSV writer: comma separator, '.' decimal point, header row first.
 *
 * Doubles are written with 17 significant digits so that files round-trip
 * and compare bit-exactly between runs.
 */
class CsvWriter
{
  public:
    CsvWriter(std::filesystem::path const& path, std::initializer_list<std::string_view> header);
    explicit CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header);

    CsvWriter& operator<<(double value);
    CsvWriter& operator<<(long long value);
    CsvWriter& operator<<(unsigned long long value);
    CsvWriter& operator<<(std::string_view value);
    CsvWriter& operator<<(int value) { return *this << static_cast<long long>(value); }
    CsvWriter& operator<<(unsigned value) { return *this << static_cast<unsigned long long>(value); }
    CsvWriter& operator<<(unsigned long value) { return *this << static_cast<unsigned long long>(value); }
    CsvWriter& operator<<(long value) { return *this << static_cast<long long>(value); }

    //! Terminates the current row.
    void end_row();

  private:
    void separate();

    std::ofstream file_;
    std::ostream* os_;
    bool row_started_{false};
};

//! Formats a double the way CsvWriter does.
[[nodiscard]] std::string format_double(double value);

//! Reads a numeric column (by header name, else the first column) of a CSV file.
[[nodiscard]] std::vector<double> read_csv_column(std::filesystem::path const& path,
                                                  std::vector<std::string> const& preferred_names);
}  // namespace fishnet
