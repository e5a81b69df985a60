#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fishnet::cli
{
enum ExitCode : int
{
    exit_ok = 0,
    exit_usage = 2,
    exit_numeric = 3,
    exit_partial = 4,
};

//! Worker count from FISHNET_THREADS, else the hardware concurrency.
[[nodiscard]] unsigned default_threads();

//! "start:stop:step", inclusive of stop up to rounding.
[[nodiscard]] std::vector<double> parse_grid(std::string const& spec);

//! Everything a subcommand needs besides its resolved configuration.
struct Context
{
    std::optional<std::filesystem::path> out;  //!< output directory, if any
    unsigned threads{1};
    std::ostream* stdout_stream;
    std::ostream* stderr_stream;
};

/*!
 * Runs one subcommand from its resolved configuration.
 *
 * This is the path shared by flag parsing and replay: the manifest written
 * next to the outputs stores exactly \c config.
 */
[[nodiscard]] int execute(std::string const& subcommand, nlohmann::json const& config, Context const& ctx);

//! Writes manifest.json into ctx.out.
void write_manifest(std::string const& subcommand, nlohmann::json const& config, Context const& ctx);

//! Parses \c args (without the program name) and runs the selected subcommand.
[[nodiscard]] int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);
}  // namespace fishnet::cli
