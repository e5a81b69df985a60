#include "fishnet/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "fishnet/ensemble.hpp"
#include "fishnet/errors.hpp"
#include "fishnet/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fishnet::cli
{
unsigned default_threads()
{
    if (char const* env = std::getenv("FISHNET_THREADS"))
    {
        char* end = nullptr;
        auto const v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
        {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> parse_grid(std::string const& spec)
{
    auto const first = spec.find(':');
    auto const second = first == std::string::npos ? first : spec.find(':', first + 1);
    if (second == std::string::npos)
    {
        throw ConfigError("grid must look like start:stop:step, got '" + spec + "'");
    }
    double start = 0, stop = 0, step = 0;
    try
    {
        start = std::stod(spec.substr(0, first));
        stop = std::stod(spec.substr(first + 1, second - first - 1));
        step = std::stod(spec.substr(second + 1));
    }
    catch (std::exception const&)
    {
        throw ConfigError("grid must look like start:stop:step, got '" + spec + "'");
    }
    if (!(step > 0) || !(stop >= start))
    {
        throw ConfigError("grid needs step > 0 and stop >= start");
    }
    auto const n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    if (n > 10'000'000)
    {
        throw ConfigError("grid has too many points");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i <= n; ++i)
    {
        out.push_back(start + static_cast<double>(i) * step);
    }
    return out;
}

namespace
{
// Flags shared by simulate, campaign and pipeline.
struct MeshFlags
{
    EnsembleConfig config;
    std::string policy{"rank_one_reuse"};

    void add_to(CLI::App& app, bool with_replicas)
    {
        app.add_option("--rows", config.mesh.rows, "rows R")->capture_default_str()->check(CLI::Range(2, 1 << 16));
        app.add_option("--gaps", config.mesh.gaps, "gaps C")->capture_default_str()->check(CLI::Range(2, 1 << 16));
        app.add_option("--jumps", config.jumps, "discrete jumps J per link")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        app.add_option("--seed", config.master_seed, "master seed")->capture_default_str();
        app.add_option("--termination-fraction", config.termination_fraction,
                       "stop once sigma_N < fraction * sigma_max")
            ->capture_default_str()
            ->check(CLI::Range(0.0, 0.999999));
        app.add_option("--policy", policy, "solver policy")
            ->capture_default_str()
            ->check(CLI::IsMember({"rank_one_reuse", "always_refactor"}));
        if (with_replicas)
        {
            app.add_option("--replicas", config.replicas, "replica count")
                ->capture_default_str()
                ->check(CLI::PositiveNumber);
            app.add_option("--first-replica", config.first_replica, "first replica index")
                ->capture_default_str();
        }
    }

    [[nodiscard]] json resolved()
    {
        config.policy = policy == "always_refactor" ? FactorizationPolicy::always_refactor
                                                    : FactorizationPolicy::rank_one_reuse;
        return to_json(config);
    }
};

std::vector<std::size_t> parse_k_list(std::string const& list)
{
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= list.size())
    {
        auto const comma = std::min(list.find(',', pos), list.size());
        auto const item = list.substr(pos, comma - pos);
        try
        {
            std::size_t used = 0;
            long const v = std::stol(item, &used);
            if (used != item.size() || v < 0)
            {
                throw std::invalid_argument(item);
            }
            out.push_back(static_cast<std::size_t>(v));
        }
        catch (std::exception const&)
        {
            throw ConfigError("--k-list must be comma-separated non-negative integers");
        }
        pos = comma + 1;
    }
    return out;
}
}  // namespace

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Fishnet statistics of softening links: simulation and tail-probability model",
                 "fishnet"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string out_dir;
    unsigned threads = 0;
    std::string subcommand;
    json config;
    auto add_out = [&](CLI::App& sub, std::string const& what) {
        sub.add_option("--out", out_dir, what);
    };
    auto add_threads = [&](CLI::App& sub) {
        sub.add_option("--threads", threads, "worker threads (default: FISHNET_THREADS or all cores)")
            ->check(CLI::PositiveNumber);
    };

    // p1-table
    double xmin = 0, xmax = 12, step = 0.1;
    auto* p1 = app.add_subcommand("p1-table", "tabulate the link strength CDF P1");
    p1->add_option("--xmin", xmin)->capture_default_str();
    p1->add_option("--xmax", xmax)->capture_default_str();
    p1->add_option("--step", step)->capture_default_str();
    add_out(*p1, "write p1_table.csv here instead of stdout");
    p1->callback([&] { config = {{"xmin", xmin}, {"xmax", xmax}, {"step", step}}; });

    // order-stats
    std::size_t os_n = 512;
    std::string k_list = "0,1,5,20";
    std::string os_grid = "4:10:0.05";
    auto* os = app.add_subcommand("order-stats", "CDFs W_k of the k-th smallest of N strengths");
    os->add_option("--N", os_n, "number of links")->capture_default_str()->check(CLI::PositiveNumber);
    os->add_option("--k-list", k_list, "0-based orders, comma separated")->capture_default_str();
    os->add_option("--x-grid", os_grid, "start:stop:step")->capture_default_str();
    add_out(*os, "write order_stats.csv here instead of stdout");
    os->callback([&] { config = {{"N", os_n}, {"k_list", parse_k_list(k_list)}, {"x_grid", os_grid}}; });

    // fit-nc
    std::string input;
    auto* fit = app.add_subcommand("fit-nc", "fit a Polya-Aeppli law to a sample of N_c");
    fit->add_option("--input", input, "CSV with an N_c column (e.g. sigma_max.csv)")->required();
    add_out(*fit, "write nc_fit.csv and nc_fit.json here instead of stdout");
    fit->callback([&] { config = {{"input", input}}; });

    // predict
    std::size_t pr_n = 512;
    double lambda = 0, theta = 0;
    std::size_t k0 = 5, dk = 0;
    std::string gamma = "rational";
    double gamma_c = 1, gamma_intercept = 1;
    std::optional<double> gamma_slope;
    std::string pr_grid = "4:10:0.05";
    std::vector<double> tail_probabilities{1e-6};
    auto* pr = app.add_subcommand("predict", "evaluate the order-statistic failure probability");
    pr->add_option("--N", pr_n, "number of links")->capture_default_str()->check(CLI::PositiveNumber);
    pr->add_option("--lambda", lambda, "Polya-Aeppli lambda")->required();
    pr->add_option("--theta", theta, "Polya-Aeppli theta")->required();
    pr->add_option("--k0", k0, "truncation order")->capture_default_str();
    pr->add_option("--dk", dk, "order shift")->capture_default_str();
    pr->add_option("--gamma", gamma, "gamma_k form")
        ->capture_default_str()
        ->check(CLI::IsMember({"rational", "linear"}));
    pr->add_option("--gamma-c", gamma_c, "rational form N/(N - c k)")->capture_default_str();
    pr->add_option("--gamma-intercept", gamma_intercept, "linear form a + b k")->capture_default_str();
    pr->add_option("--gamma-slope", gamma_slope, "linear slope b (default 1/N)");
    pr->add_option("--x-grid", pr_grid, "start:stop:step")->capture_default_str();
    pr->add_option("--tail-probability", tail_probabilities, "report strength at these Pf")
        ->capture_default_str();
    add_out(*pr, "write predict.csv and predict_summary.json here instead of stdout");
    pr->callback([&] {
        json g = gamma == "rational"
                     ? json{{"kind", "rational"}, {"c", gamma_c}}
                     : json{{"kind", "linear"},
                            {"intercept", gamma_intercept},
                            {"slope", gamma_slope.value_or(1.0 / static_cast<double>(pr_n))}};
        config = {{"N", pr_n},     {"lambda", lambda},  {"theta", theta},
                  {"k0", k0},      {"dk", dk},          {"gamma", g},
                  {"x_grid", pr_grid}, {"tail_probabilities", tail_probabilities}};
    });

    // simulate
    MeshFlags sim_flags;
    std::uint64_t replica = 0;
    auto* sim = app.add_subcommand("simulate", "simulate one specimen and write its event log");
    sim_flags.add_to(*sim, false);
    sim->add_option("--kt-ratio", sim_flags.config.kt_ratio, "|Kt/K0|")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sim->add_option("--replica", replica, "replica index within the seed's stream")->capture_default_str();
    add_out(*sim, "output directory (default fishnet-simulate)");
    sim->callback([&] {
        config = {{"ensemble", sim_flags.resolved()}, {"replica", replica}};
        config["ensemble"]["replicas"] = 1;
        config["ensemble"]["first_replica"] = replica;
    });

    // campaign
    MeshFlags camp_flags;
    auto* camp = app.add_subcommand("campaign", "Monte Carlo ensemble of specimens");
    camp_flags.add_to(*camp, true);
    camp->add_option("--kt-ratio", camp_flags.config.kt_ratio, "|Kt/K0|")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    add_threads(*camp);
    add_out(*camp, "output directory (default fishnet-campaign)");
    camp->callback([&] { config = camp_flags.resolved(); });

    // pipeline
    MeshFlags pipe_flags;
    std::vector<double> slopes;
    std::optional<std::size_t> pipe_k0, pipe_dk;
    std::string pipe_gamma = "rational";
    std::size_t gamma_replicas = 32;
    std::vector<double> pipe_tail{1e-6};
    auto* pipe = app.add_subcommand("pipeline", "campaigns, fits and analytic-vs-empirical comparison");
    pipe_flags.add_to(*pipe, true);
    pipe->add_option("--kt-ratio", slopes, "|Kt/K0| values (repeatable)")
        ->required()
        ->check(CLI::PositiveNumber);
    pipe->add_option("--k0", pipe_k0, "truncation order (default: calibrated table)");
    pipe->add_option("--dk", pipe_dk, "order shift (default: calibrated table)");
    pipe->add_option("--gamma", pipe_gamma, "N/(N-k), fitted N/(N-ck), or fitted linear")
        ->capture_default_str()
        ->check(CLI::IsMember({"rational", "fitted", "linear"}));
    pipe->add_option("--gamma-replicas", gamma_replicas, "replicas averaged for the gamma estimate")
        ->capture_default_str();
    pipe->add_option("--tail-probability", pipe_tail, "report analytic strength at these Pf")
        ->capture_default_str();
    add_threads(*pipe);
    add_out(*pipe, "output directory (default fishnet-pipeline)");
    pipe->callback([&] {
        config = {{"ensemble", pipe_flags.resolved()},
                  {"kt_ratios", slopes},
                  {"k0", pipe_k0 ? json(*pipe_k0) : json(nullptr)},
                  {"dk", pipe_dk ? json(*pipe_dk) : json(nullptr)},
                  {"gamma", pipe_gamma},
                  {"gamma_replicas", gamma_replicas},
                  {"tail_probabilities", pipe_tail}};
    });

    // replay
    std::string manifest_path;
    auto* replay = app.add_subcommand("replay", "re-run the subcommand recorded in a manifest");
    replay->add_option("--manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
    add_threads(*replay);
    add_out(*replay, "output directory (default: the manifest's)");

    std::vector<char const*> argv{"fishnet"};
    for (auto const& a : args)
    {
        argv.push_back(a.c_str());
    }

    try
    {
        app.parse(static_cast<int>(argv.size()), argv.data());
        auto* chosen = app.get_subcommands().front();
        subcommand = chosen->get_name();

        Context ctx;
        ctx.stdout_stream = &out;
        ctx.stderr_stream = &err;
        ctx.threads = threads > 0 ? threads : default_threads();
        if (!out_dir.empty())
        {
            ctx.out = fs::path(out_dir);
        }

        if (chosen == replay)
        {
            std::ifstream is(manifest_path);
            json const manifest = json::parse(is);
            if (!ctx.out)
            {
                ctx.out = fs::path(manifest.at("output_directory").get<std::string>());
            }
            return execute(manifest.at("subcommand").get<std::string>(), manifest.at("config"), ctx);
        }
        if (!ctx.out && (chosen == sim || chosen == camp || chosen == pipe))
        {
            ctx.out = fs::path("fishnet-" + subcommand);
        }
        return execute(subcommand, config, ctx);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }
    catch (ConfigError const& e)
    {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    }
    catch (json::exception const& e)
    {
        err << "usage error: malformed configuration: " << e.what() << '\n';
        return exit_usage;
    }
    catch (std::exception const& e)
    {
        err << "error: " << e.what() << '\n';
        return exit_numeric;
    }
}
}  // namespace fishnet::cli
