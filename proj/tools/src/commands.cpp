#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fishnet/cli.hpp"
#include "fishnet/counter_rng.hpp"
#include "fishnet/csv.hpp"
#include "fishnet/ensemble.hpp"
#include "fishnet/errors.hpp"
#include "fishnet/order_stats.hpp"
#include "fishnet/polya_aeppli.hpp"
#include "fishnet/sla_solver.hpp"
#include "fishnet/strength_model.hpp"
#include "fishnet/tail_predictor.hpp"
#include "fishnet/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fishnet::cli
{
namespace
{
// CSV destination: <out>/<name> when an output directory is set, else stdout.
class Sink
{
  public:
    Sink(Context const& ctx, std::string const& name)
    {
        if (ctx.out)
        {
            fs::create_directories(*ctx.out);
            file_.open(*ctx.out / name);
            if (!file_)
            {
                throw std::runtime_error("cannot open " + (*ctx.out / name).string());
            }
            os_ = &file_;
        }
        else
        {
            os_ = ctx.stdout_stream;
        }
    }
    std::ostream& stream() { return *os_; }

  private:
    std::ofstream file_;
    std::ostream* os_;
};

void write_json(fs::path const& path, json const& j)
{
    std::ofstream os(path);
    if (!os)
    {
        throw std::runtime_error("cannot open " + path.string());
    }
    os << j.dump(2) << '\n';
}

fs::path require_out(Context const& ctx)
{
    if (!ctx.out)
    {
        throw ConfigError("an output directory is required");
    }
    fs::create_directories(*ctx.out);
    return *ctx.out;
}

void weibull_cells(CsvWriter& csv, double p, double x)
{
    if (p > 0 && p < 1 && x > 0)
    {
        auto const [wx, wy] = weibull_scale(p, x);
        csv << wx << wy;
    }
    else
    {
        csv << std::string_view{} << std::string_view{};
    }
}

std::string probability_key(double p)
{
    std::ostringstream os;
    os << p;
    return os.str();
}

GammaScaling gamma_from_json(json const& g, std::size_t n)
{
    auto const kind = g.value("kind", std::string{"rational"});
    if (kind == "rational")
    {
        return GammaScaling::rational(n, g.value("c", 1.0));
    }
    if (kind == "linear")
    {
        return GammaScaling::linear(g.value("intercept", 1.0),
                                    g.value("slope", 1.0 / static_cast<double>(n)));
    }
    throw ConfigError("unknown gamma form '" + kind + "'");
}

json strength_json(TailModel const& model, std::vector<double> const& probabilities)
{
    json out = json::object();
    for (double p : probabilities)
    {
        auto const s = model.strength_at_probability(p);
        out[probability_key(p)] = {{"x", s.x}, {"at_floor", s.at_floor}};
    }
    return out;
}

//---------------------------------------------------------------------------//

int p1_table(json const& cfg, Context const& ctx)
{
    double const xmin = cfg.at("xmin");
    double const xmax = cfg.at("xmax");
    double const step = cfg.at("step");
    if (!(step > 0) || xmax < xmin || xmin < 0)
    {
        throw ConfigError("p1-table needs 0 <= xmin <= xmax and step > 0");
    }
    StrengthDistribution const p1;
    Sink sink(ctx, "p1_table.csv");
    CsvWriter csv(sink.stream(), {"x", "P1"});
    auto const n = static_cast<long>(std::floor((xmax - xmin) / step + 1e-9));
    for (long i = 0; i <= n; ++i)
    {
        double const x = xmin + static_cast<double>(i) * step;
        csv << x << p1.cdf(x);
        csv.end_row();
    }
    return exit_ok;
}

int order_stats(json const& cfg, Context const& ctx)
{
    std::size_t const n = cfg.at("N");
    auto const ks = cfg.at("k_list").get<std::vector<std::size_t>>();
    auto const grid = parse_grid(cfg.at("x_grid").get<std::string>());
    for (auto k : ks)
    {
        if (k >= n)
        {
            throw ConfigError("order k must be below N");
        }
    }
    OrderStatBasis const basis(StrengthDistribution{}, n);
    Sink sink(ctx, "order_stats.csv");
    CsvWriter csv(sink.stream(), {"k", "x", "W", "weibull_x", "weibull_y"});
    for (auto k : ks)
    {
        for (double x : grid)
        {
            double const w = basis.wk(x, k);
            csv << k << x << w;
            weibull_cells(csv, w, x);
            csv.end_row();
        }
    }
    return exit_ok;
}

int fit_nc(json const& cfg, Context const& ctx)
{
    auto const input = cfg.at("input").get<std::string>();
    auto const values = read_csv_column(input, {"N_c", "n_c", "nc", "Nc"});
    if (values.size() < 2)
    {
        throw FitError("fit-nc needs at least two N_c values");
    }
    std::vector<std::uint64_t> hist;
    for (double v : values)
    {
        if (!(v >= 0) || v != std::floor(v))
        {
            throw FitError("N_c values must be non-negative integers");
        }
        auto const k = static_cast<std::size_t>(v);
        if (hist.size() <= k)
        {
            hist.resize(k + 1, 0);
        }
        ++hist[k];
    }
    auto const s = summarize(values);
    double const variance = s.sd * s.sd;
    auto const fit = fit_moments(s.mean, variance);
    auto const& pa = fit.distribution;
    if (fit.clamped)
    {
        *ctx.stderr_stream << "warning: N_c sample is under-dispersed; theta clamped to 1\n";
    }

    auto const pmf = pa.pmf_table(std::max(hist.size(), pa.pmf_until_mass(1e-9).size()));
    Sink sink(ctx, "nc_fit.csv");
    CsvWriter csv(sink.stream(), {"k", "count", "empirical_pmf", "fitted_pmf"});
    auto const n = static_cast<double>(values.size());
    for (std::size_t k = 0; k < pmf.size(); ++k)
    {
        auto const c = k < hist.size() ? hist[k] : 0;
        csv << k << c << static_cast<double>(c) / n << pmf[k];
        csv.end_row();
    }

    json const summary{{"samples", values.size()},
                       {"mean", s.mean},
                       {"variance", variance},
                       {"lambda", pa.lambda()},
                       {"theta", pa.theta()},
                       {"clamped", fit.clamped}};
    if (ctx.out)
    {
        write_json(*ctx.out / "nc_fit.json", summary);
    }
    *ctx.stderr_stream << "lambda=" << format_double(pa.lambda())
                       << " theta=" << format_double(pa.theta()) << " mean=" << format_double(s.mean)
                       << " variance=" << format_double(variance) << '\n';
    return exit_ok;
}

int predict(json const& cfg, Context const& ctx)
{
    std::size_t const n = cfg.at("N");
    PolyaAeppli const weights(cfg.at("lambda").get<double>(), cfg.at("theta").get<double>());
    TailModelParams params;
    params.k0 = cfg.at("k0");
    params.delta_k = cfg.at("dk");
    TailModel const model(
        OrderStatBasis(StrengthDistribution{}, n), weights, gamma_from_json(cfg.at("gamma"), n), params);

    auto const grid = parse_grid(cfg.at("x_grid").get<std::string>());
    Sink sink(ctx, "predict.csv");
    CsvWriter csv(sink.stream(), {"x", "Pf", "weibull_x", "weibull_y"});
    for (double x : grid)
    {
        double const pf = model.failure_probability(x);
        csv << x << pf;
        weibull_cells(csv, pf, x);
        csv.end_row();
    }

    auto const probabilities = cfg.at("tail_probabilities").get<std::vector<double>>();
    auto const strengths = strength_json(model, probabilities);
    for (auto const& [p, s] : strengths.items())
    {
        *ctx.stderr_stream << "strength at Pf=" << p << ": " << format_double(s.at("x").get<double>())
                           << " MPa" << (s.at("at_floor").get<bool>() ? " (at search floor)" : "")
                           << '\n';
    }
    if (ctx.out)
    {
        write_json(*ctx.out / "predict_summary.json", {{"strength_at_probability", strengths}});
    }
    return exit_ok;
}

//---------------------------------------------------------------------------//

int simulate(json const& cfg, Context const& ctx)
{
    auto const out = require_out(ctx);
    auto const ec = ensemble_config_from_json(cfg.at("ensemble"));
    std::uint64_t const replica = cfg.value("replica", std::uint64_t{0});
    auto const topology = build_topology(ec.mesh);
    auto const strengths
        = StrengthDistribution(ec.strength).sample(topology.link_count(), replica_seed(ec.master_seed, replica));

    SimulationRecord record;
    int status = exit_ok;
    try
    {
        record = run_simulation(topology, strengths, simulation_config(ec));
    }
    catch (BudgetExhausted const& e)
    {
        *ctx.stderr_stream << "error: " << e.what() << '\n';
        record = e.partial();
        status = exit_numeric;
    }

    {
        CsvWriter csv(out / "events.csv", {"event", "k", "sigma_n", "link", "localized"});
        for (auto const& e : record.events)
        {
            csv << e.index << e.k << e.sigma_n << e.link << (e.localized ? 1 : 0);
            csv.end_row();
        }
    }
    write_json(out / "topology.json", topology_to_json(topology));

    if (!record.events.empty())
    {
        auto const stages = stage_events(record);
        std::pair<char const*, std::uint32_t> const snapshots[] = {
            {"prepeak", stages.prepeak},
            {"peak", stages.peak},
            {"postpeak", stages.postpeak},
            {"final", stages.last},
        };
        for (auto const& [name, index] : snapshots)
        {
            auto const jumps = damage_at_event(record, topology.link_count(), index);
            auto snapshot = damage_to_json(strengths, jumps, ec.jumps);
            snapshot["stage"] = name;
            snapshot["event"] = index;
            snapshot["sigma_n"] = record.events[index].sigma_n;
            write_json(out / (std::string{"stage_"} + name + ".json"), snapshot);
        }
    }

    write_json(out / "summary.json",
               {{"replica", replica},
                {"links", topology.link_count()},
                {"sigma_max", record.sigma_max},
                {"n_c", record.n_c},
                {"peak_event", record.peak_event},
                {"peak_localized", record.peak_localized},
                {"first_sigma_n", record.first_sigma_n},
                {"min_strength", *std::min_element(strengths.begin(), strengths.end())},
                {"events", record.event_count},
                {"stop", stop_reason_name(record.stop)}});
    *ctx.stdout_stream << "sigma_max=" << format_double(record.sigma_max) << " N_c=" << record.n_c
                       << " events=" << record.event_count << " stop=" << stop_reason_name(record.stop)
                       << '\n';
    return status;
}

json campaign_summary(EnsembleResult const& r)
{
    auto const sigma = r.sigma_max_values();
    return {{"replicas_ok", sigma.size()},
            {"failures", r.failures},
            {"sigma_max_mean", r.sigma_max.mean},
            {"sigma_max_sd", r.sigma_max.sd},
            {"sigma_max_median", sigma.empty() ? 0.0 : median(sigma)},
            {"n_c_mean", r.n_c.mean},
            {"n_c_sd", r.n_c.sd}};
}

void report_throughput(EnsembleResult const& r, Context const& ctx)
{
    auto const& t = r.throughput;
    *ctx.stdout_stream << "kt_ratio=" << r.config.kt_ratio << " replicas=" << r.replicas.size()
                       << " failures=" << r.failures.size() << " events=" << t.events
                       << " events/s=" << std::fixed << std::setprecision(0) << t.events_per_second()
                       << " solves/s=" << t.solves_per_second() << std::defaultfloat
                       << std::setprecision(6) << '\n';
}

int campaign(json const& cfg, Context const& ctx)
{
    auto const out = require_out(ctx);
    auto ec = ensemble_config_from_json(cfg);
    ec.threads = ctx.threads;
    auto const result = run_ensemble(ec);
    write_campaign_outputs(result, out);
    write_json(out / "summary.json", campaign_summary(result));
    report_throughput(result, ctx);
    if (!result.failures.empty())
    {
        *ctx.stderr_stream << "warning: " << result.failures.size() << " replica(s) failed\n";
        return exit_partial;
    }
    return exit_ok;
}

//---------------------------------------------------------------------------//

std::string slope_directory(double kt)
{
    std::ostringstream os;
    os << "kt_" << kt;
    return os.str();
}

int pipeline(json const& cfg, Context const& ctx)
{
    auto const out = require_out(ctx);
    auto const base = ensemble_config_from_json(cfg.at("ensemble"));
    auto const slopes = cfg.at("kt_ratios").get<std::vector<double>>();
    auto const gamma_kind = cfg.value("gamma", std::string{"rational"});
    std::size_t const gamma_replicas = cfg.value("gamma_replicas", std::size_t{32});
    auto const probabilities = cfg.at("tail_probabilities").get<std::vector<double>>();
    if (slopes.empty())
    {
        throw ConfigError("pipeline needs at least one --kt-ratio");
    }
    if (base.replicas < 100)
    {
        throw ConfigError("pipeline needs at least 100 replicas for fitting");
    }

    bool partial = false;
    json per_slope = json::array();
    std::vector<double> medians;
    CsvWriter comparison(out / "comparison.csv",
                         {"kt_ratio", "x", "pf_empirical", "pf_analytic", "weibull_x",
                          "weibull_y_empirical", "weibull_y_analytic"});

    for (double kt : slopes)
    {
        // Resolve (k0, dk) before the expensive campaign.
        TailModelParams params;
        auto const table = calibrated_orders(kt);
        if (cfg.contains("k0") && !cfg.at("k0").is_null())
        {
            params.k0 = cfg.at("k0");
        }
        else if (table)
        {
            params.k0 = table->k0;
        }
        else
        {
            throw ConfigError("no calibrated k0 for |Kt/K0| = " + format_double(kt) + "; pass --k0");
        }
        if (cfg.contains("dk") && !cfg.at("dk").is_null())
        {
            params.delta_k = cfg.at("dk");
        }
        else if (table)
        {
            params.delta_k = table->delta_k;
        }
        else
        {
            throw ConfigError("no calibrated dk for |Kt/K0| = " + format_double(kt) + "; pass --dk");
        }

        auto ec = base;
        ec.kt_ratio = kt;
        ec.threads = ctx.threads;
        auto const result = run_ensemble(ec);
        report_throughput(result, ctx);
        auto const dir = out / slope_directory(kt);
        fs::create_directories(dir);
        write_campaign_outputs(result, dir);
        partial = partial || !result.failures.empty();

        auto const n_c = result.n_c_values();
        auto const moments = summarize(n_c);
        auto const fit = fit_moments(moments.mean, moments.sd * moments.sd);
        if (fit.clamped)
        {
            *ctx.stderr_stream << "warning: N_c sample at |Kt/K0| = " << kt
                               << " is under-dispersed; theta clamped to 1\n";
        }

        auto const n = build_topology(ec.mesh).link_count();
        auto const estimate = estimate_gamma(result, gamma_replicas);
        {
            CsvWriter csv(dir / "gamma_estimate.csv",
                          {"k", "mean_ratio", "replicas", "rational_fit", "linear_fit"});
            auto const rational = estimate.rational();
            auto const linear = estimate.linear();
            for (std::size_t k = 0; k < estimate.mean.size(); ++k)
            {
                csv << k << estimate.mean[k] << estimate.count[k] << rational(k) << linear(k);
                csv.end_row();
            }
        }

        json gamma_json;
        GammaScaling gamma = GammaScaling::rational(n);
        if (gamma_kind == "rational")
        {
            gamma_json = {{"kind", "rational"}, {"c", 1.0}};
        }
        else if (gamma_kind == "fitted")
        {
            gamma = estimate.rational();
            gamma_json = {{"kind", "rational"}, {"c", estimate.rational_c}};
        }
        else if (gamma_kind == "linear")
        {
            gamma = estimate.linear();
            gamma_json = {{"kind", "linear"},
                          {"intercept", estimate.linear_intercept},
                          {"slope", estimate.linear_slope}};
        }
        else
        {
            throw ConfigError("unknown gamma form '" + gamma_kind + "'");
        }

        TailModel const model(OrderStatBasis(StrengthDistribution(ec.strength), n), fit.distribution,
                              gamma, params);
        auto const points = compare_with_model(result.ecdf, model);
        for (auto const& pt : points)
        {
            comparison << kt << pt.x << pt.p_empirical << pt.p_model << pt.weibull_x
                       << pt.weibull_y_empirical;
            if (std::isnan(pt.weibull_y_model))
            {
                comparison << std::string_view{};
            }
            else
            {
                comparison << pt.weibull_y_model;
            }
            comparison.end_row();
        }

        auto const sigma = result.sigma_max_values();
        double const med = median(sigma);
        medians.push_back(med);
        auto const sample_n = static_cast<double>(sigma.size());
        std::vector<double> sorted = sigma;
        std::sort(sorted.begin(), sorted.end());
        json empirical_quantiles = json::object();
        for (double p : {0.001, 0.01, 0.05, 0.5, 0.95})
        {
            // Reachable when at least one observation falls below the level.
            if (p * sample_n >= 1)
            {
                auto const idx = std::min(sorted.size() - 1,
                                          static_cast<std::size_t>(std::ceil(p * sample_n)) - 1);
                empirical_quantiles[probability_key(p)] = sorted[idx];
            }
        }
        double const p_lo = std::max(1e-3, 1.0 / sample_n);

        per_slope.push_back({{"kt_ratio", kt},
                             {"replicas_ok", sigma.size()},
                             {"failures", result.failures.size()},
                             {"sigma_max_median", med},
                             {"sigma_max_mean", result.sigma_max.mean},
                             {"sigma_max_sd", result.sigma_max.sd},
                             {"n_c_mean", moments.mean},
                             {"n_c_variance", moments.sd * moments.sd},
                             {"lambda", fit.distribution.lambda()},
                             {"theta", fit.distribution.theta()},
                             {"theta_clamped", fit.clamped},
                             {"k0", params.k0},
                             {"dk", params.delta_k},
                             {"gamma", gamma_json},
                             {"gamma_fit",
                              {{"rational_c", estimate.rational_c},
                               {"rational_ssr", estimate.rational_ssr},
                               {"linear_intercept", estimate.linear_intercept},
                               {"linear_slope", estimate.linear_slope},
                               {"linear_ssr", estimate.linear_ssr}}},
                             {"empirical_quantiles", empirical_quantiles},
                             {"strength_at_probability", strength_json(model, probabilities)},
                             {"max_weibull_gap", {{"p_lo", p_lo}, {"p_hi", 0.99},
                                                  {"gap", max_weibull_gap(points, p_lo, 0.99)}}}});
    }

    json ratios = json::array();
    for (std::size_t i = 0; i < slopes.size(); ++i)
    {
        for (std::size_t j = 0; j < slopes.size(); ++j)
        {
            if (slopes[i] < slopes[j])
            {
                ratios.push_back({{"flatter", slopes[i]},
                                  {"steeper", slopes[j]},
                                  {"median_ratio", medians[i] / medians[j]}});
            }
        }
    }
    json summary{{"slopes", per_slope}, {"median_ratios", ratios}};
    write_json(out / "summary.json", summary);
    for (auto const& r : ratios)
    {
        *ctx.stdout_stream << "median sigma_max ratio |Kt/K0| " << r.at("flatter").get<double>() << " vs "
                           << r.at("steeper").get<double>() << ": "
                           << format_double(r.at("median_ratio").get<double>()) << '\n';
    }
    return partial ? exit_partial : exit_ok;
}
}  // namespace

//---------------------------------------------------------------------------//

void write_manifest(std::string const& subcommand, json const& config, Context const& ctx)
{
    if (!ctx.out)
    {
        return;
    }
    fs::create_directories(*ctx.out);
    json seed = nullptr;
    if (config.contains("master_seed"))
    {
        seed = config.at("master_seed");
    }
    else if (config.contains("ensemble"))
    {
        seed = config.at("ensemble").value("master_seed", json(nullptr));
    }
    write_json(*ctx.out / "manifest.json",
               {{"subcommand", subcommand},
                {"config", config},
                {"master_seed", seed},
                {"output_directory", ctx.out->string()},
                {"version", kVersion}});
}

int execute(std::string const& subcommand, json const& config, Context const& ctx)
{
    static std::map<std::string, int (*)(json const&, Context const&)> const table{
        {"p1-table", p1_table},
        {"order-stats", order_stats},
        {"fit-nc", fit_nc},
        {"predict", predict},
        {"simulate", simulate},
        {"campaign", campaign},
        {"pipeline", pipeline},
    };
    auto const it = table.find(subcommand);
    if (it == table.end())
    {
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    }
    write_manifest(subcommand, config, ctx);
    return it->second(config, ctx);
}
}  // namespace fishnet::cli
