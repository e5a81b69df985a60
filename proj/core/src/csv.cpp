#include "fishnet/csv.hpp"

#include <charconv>
#include <cmath>
#include <locale>
#include <sstream>

#include "fishnet/errors.hpp"

namespace fishnet
{
namespace
{
std::string trim(std::string_view s)
{
    auto const first = s.find_first_not_of(" \t\r\"");
    if (first == std::string_view::npos)
    {
        return {};
    }
    auto const last = s.find_last_not_of(" \t\r\"");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string const& line)
{
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
    {
        fields.push_back(trim(field));
    }
    return fields;
}
}  // namespace

std::string format_double(double value)
{
    if (std::isnan(value))
    {
        return "nan";
    }
    if (std::isinf(value))
    {
        return value > 0 ? "inf" : "-inf";
    }
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << value;
    return os.str();
}

CsvWriter::CsvWriter(std::filesystem::path const& path,
                     std::initializer_list<std::string_view> header)
    : file_(path), os_(&file_)
{
    if (!file_)
    {
        throw Error("cannot open " + path.string() + " for writing");
    }
    for (auto const& h : header)
    {
        *this << h;
    }
    end_row();
}

CsvWriter::CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header)
    : os_(&os)
{
    for (auto const& h : header)
    {
        *this << h;
    }
    end_row();
}

void CsvWriter::separate()
{
    if (row_started_)
    {
        *os_ << ',';
    }
    row_started_ = true;
}

CsvWriter& CsvWriter::operator<<(double value)
{
    separate();
    *os_ << format_double(value);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long value)
{
    separate();
    *os_ << value;
    return *this;
}

CsvWriter& CsvWriter::operator<<(unsigned long long value)
{
    separate();
    *os_ << value;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view value)
{
    separate();
    *os_ << value;
    return *this;
}

void CsvWriter::end_row()
{
    *os_ << '\n';
    row_started_ = false;
}

std::vector<double> read_csv_column(std::filesystem::path const& path,
                                    std::vector<std::string> const& preferred_names)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line))
    {
        throw Error(path.string() + " is empty");
    }
    auto header = split(line);
    std::size_t column = 0;
    bool has_header = false;
    for (std::size_t c = 0; c < header.size(); ++c)
    {
        double probe = 0;
        auto const& h = header[c];
        if (std::from_chars(h.data(), h.data() + h.size(), probe).ec != std::errc{})
        {
            has_header = true;
        }
        for (auto const& name : preferred_names)
        {
            if (h == name)
            {
                column = c;
            }
        }
    }
    std::vector<double> values;
    auto parse_line = [&](std::string const& text) {
        auto const fields = split(text);
        if (fields.size() <= column || fields[column].empty())
        {
            return;
        }
        double v = 0;
        auto const& f = fields[column];
        auto const res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (res.ec != std::errc{})
        {
            throw Error("non-numeric entry '" + f + "' in " + path.string());
        }
        values.push_back(v);
    };
    if (!has_header)
    {
        parse_line(line);
    }
    while (std::getline(in, line))
    {
        parse_line(line);
    }
    return values;
}
}  // namespace fishnet
