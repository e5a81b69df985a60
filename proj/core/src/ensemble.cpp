#include "fishnet/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <tuple>

#include <boost/math/tools/minima.hpp>
#include <nlohmann/json.hpp>

#include "fishnet/counter_rng.hpp"
#include "fishnet/csv.hpp"
#include "fishnet/errors.hpp"
#include "fishnet/order_stats.hpp"

namespace fishnet
{
namespace
{
char const* policy_name(FactorizationPolicy policy)
{
    return policy == FactorizationPolicy::rank_one_reuse ? "rank_one_reuse" : "always_refactor";
}

ReplicaOutcome run_replica(FishnetTopology const& topology,
                           StrengthDistribution const& parent,
                           SimulationConfig const& sim,
                           EnsembleConfig const& config,
                           std::uint64_t replica,
                           std::vector<double>& strengths,
                           Throughput& local)
{
    ReplicaOutcome out;
    out.replica = replica;
    try
    {
        parent.sample_into(strengths, replica_seed(config.master_seed, replica));
        out.min_strength = *std::min_element(strengths.begin(), strengths.end());
        auto record = run_simulation(topology, strengths, sim);
        out.ok = true;
        out.sigma_max = record.sigma_max;
        out.n_c = record.n_c;
        out.events = record.event_count;
        out.first_sigma_n = record.first_sigma_n;
        out.peak_localized = record.peak_localized;
        out.stop = record.stop;
        out.ratio_trace = std::move(record.ratio_trace);
        local.events += record.event_count;
        local.solves += record.counters.solves;
        local.factorizations += record.counters.factorizations;
        local.rank_one_updates += record.counters.rank_one_updates;
    }
    catch (BudgetExhausted const& e)
    {
        out.error = e.what();
        out.stop = StopReason::budget;
        out.events = e.partial().event_count;
    }
    catch (Error const& e)
    {
        out.error = e.what();
    }
    return out;
}
}  // namespace

SimulationConfig simulation_config(EnsembleConfig const& config)
{
    SimulationConfig sim;
    sim.kt_ratio = config.kt_ratio;
    sim.jumps = config.jumps;
    sim.termination_fraction = config.termination_fraction;
    sim.policy = config.policy;
    return sim;
}

nlohmann::json to_json(EnsembleConfig const& c)
{
    return {{"rows", c.mesh.rows},
            {"gaps", c.mesh.gaps},
            {"link_length", c.mesh.link_length},
            {"area", c.mesh.area},
            {"modulus", c.mesh.modulus},
            {"strength",
             {{"weibull_amplitude", c.strength.weibull_amplitude},
              {"weibull_scale", c.strength.weibull_scale},
              {"weibull_exponent", c.strength.weibull_exponent},
              {"crossover", c.strength.crossover},
              {"gauss_offset", c.strength.gauss_offset},
              {"gauss_amplitude", c.strength.gauss_amplitude},
              {"gauss_slope", c.strength.gauss_slope},
              {"gauss_center", c.strength.gauss_center}}},
            {"kt_ratio", c.kt_ratio},
            {"jumps", c.jumps},
            {"replicas", c.replicas},
            {"master_seed", c.master_seed},
            {"first_replica", c.first_replica},
            {"termination_fraction", c.termination_fraction},
            {"policy", policy_name(c.policy)}};
}

EnsembleConfig ensemble_config_from_json(nlohmann::json const& j)
{
    EnsembleConfig c;
    c.mesh.rows = j.value("rows", c.mesh.rows);
    c.mesh.gaps = j.value("gaps", c.mesh.gaps);
    c.mesh.link_length = j.value("link_length", c.mesh.link_length);
    c.mesh.area = j.value("area", c.mesh.area);
    c.mesh.modulus = j.value("modulus", c.mesh.modulus);
    if (auto it = j.find("strength"); it != j.end())
    {
        auto& s = c.strength;
        s.weibull_amplitude = it->value("weibull_amplitude", s.weibull_amplitude);
        s.weibull_scale = it->value("weibull_scale", s.weibull_scale);
        s.weibull_exponent = it->value("weibull_exponent", s.weibull_exponent);
        s.crossover = it->value("crossover", s.crossover);
        s.gauss_offset = it->value("gauss_offset", s.gauss_offset);
        s.gauss_amplitude = it->value("gauss_amplitude", s.gauss_amplitude);
        s.gauss_slope = it->value("gauss_slope", s.gauss_slope);
        s.gauss_center = it->value("gauss_center", s.gauss_center);
    }
    c.kt_ratio = j.value("kt_ratio", c.kt_ratio);
    c.jumps = j.value("jumps", c.jumps);
    c.replicas = j.value("replicas", c.replicas);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.first_replica = j.value("first_replica", c.first_replica);
    c.termination_fraction = j.value("termination_fraction", c.termination_fraction);
    c.threads = j.value("threads", c.threads);
    c.policy = j.value("policy", std::string{"rank_one_reuse"}) == "always_refactor"
                   ? FactorizationPolicy::always_refactor
                   : FactorizationPolicy::rank_one_reuse;
    return c;
}

//---------------------------------------------------------------------------//

std::vector<double> EnsembleResult::sigma_max_values() const
{
    std::vector<double> v;
    v.reserve(replicas.size());
    for (auto const& r : replicas)
    {
        if (r.ok)
        {
            v.push_back(r.sigma_max);
        }
    }
    return v;
}

std::vector<double> EnsembleResult::n_c_values() const
{
    std::vector<double> v;
    v.reserve(replicas.size());
    for (auto const& r : replicas)
    {
        if (r.ok)
        {
            v.push_back(r.n_c);
        }
    }
    return v;
}

SampleSummary summarize(std::span<double const> values)
{
    SampleSummary s;
    if (values.empty())
    {
        return s;
    }
    double sum = 0;
    for (double v : values)
    {
        sum += v;
    }
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1)
    {
        double ss = 0;
        for (double v : values)
        {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

double median(std::span<double const> values)
{
    if (values.empty())
    {
        throw DomainError("median of an empty sample");
    }
    std::vector<double> v(values.begin(), values.end());
    auto const mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double const upper = v[mid];
    if (v.size() % 2 == 1)
    {
        return upper;
    }
    double const lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::vector<ModelComparisonPoint> compare_with_model(std::span<EcdfPoint const> ecdf,
                                                     TailModel const& model)
{
    std::vector<ModelComparisonPoint> out;
    out.reserve(ecdf.size());
    for (auto const& e : ecdf)
    {
        double const pm = model.failure_probability(e.x);
        double const ym = (pm > 0 && pm < 1) ? std::log(-std::log1p(-pm)) : std::nan("");
        out.push_back({e.x, e.p, pm, e.weibull_x, e.weibull_y, ym});
    }
    return out;
}

double max_weibull_gap(std::span<ModelComparisonPoint const> points, double p_lo, double p_hi)
{
    double gap = 0;
    for (auto const& pt : points)
    {
        if (pt.p_empirical < p_lo || pt.p_empirical > p_hi)
        {
            continue;
        }
        if (std::isnan(pt.weibull_y_model))
        {
            return std::numeric_limits<double>::infinity();
        }
        gap = std::max(gap, std::abs(pt.weibull_y_model - pt.weibull_y_empirical));
    }
    return gap;
}

std::vector<EcdfPoint> empirical_cdf(std::span<double const> values)
{
    if (values.size() < 2)
    {
        throw DomainError("empirical CDF needs at least two values");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    auto const n = static_cast<double>(sorted.size());
    std::vector<EcdfPoint> out;
    out.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
    {
        double const p = (static_cast<double>(i) + 0.5) / n;
        EcdfPoint point{sorted[i], p, std::nan(""), std::nan("")};
        if (sorted[i] > 0)
        {
            std::tie(point.weibull_x, point.weibull_y) = weibull_scale(p, sorted[i]);
        }
        out.push_back(point);
    }
    return out;
}

EnsembleResult run_ensemble(EnsembleConfig const& config)
{
    if (config.replicas < 1)
    {
        throw ConfigError("campaign needs at least one replica");
    }
    auto const topology = build_topology(config.mesh);
    StrengthDistribution const parent(config.strength);
    auto sim = simulation_config(config);
    sim.keep_events = false;

    EnsembleResult result;
    result.config = config;
    result.replicas.resize(config.replicas);

    unsigned const workers = std::max(1u, std::min<unsigned>(
        config.threads, static_cast<unsigned>(std::min<std::uint64_t>(config.replicas, 1u << 16))));
    std::atomic<std::uint64_t> next{0};
    std::vector<Throughput> per_worker(workers);
    std::vector<std::exception_ptr> crashes(workers);

    auto const start = std::chrono::steady_clock::now();
    auto work = [&](unsigned w) {
        try
        {
            std::vector<double> strengths(topology.link_count());
            for (;;)
            {
                auto const i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= config.replicas)
                {
                    break;
                }
                result.replicas[i] = run_replica(topology, parent, sim, config,
                                                 config.first_replica + i, strengths,
                                                 per_worker[w]);
            }
        }
        catch (...)
        {
            crashes[w] = std::current_exception();
        }
    };
    if (workers == 1)
    {
        work(0);
    }
    else
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
        {
            pool.emplace_back(work, w);
        }
    }
    for (auto const& crash : crashes)
    {
        if (crash)
        {
            std::rethrow_exception(crash);
        }
    }
    result.throughput.seconds
        = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto const& t : per_worker)
    {
        result.throughput.events += t.events;
        result.throughput.solves += t.solves;
        result.throughput.factorizations += t.factorizations;
        result.throughput.rank_one_updates += t.rank_one_updates;
    }

    // Serial aggregation in replica order.
    std::vector<double> ratio_sum;
    std::vector<std::uint64_t> ratio_count;
    for (auto const& r : result.replicas)
    {
        if (!r.ok)
        {
            result.failures.push_back(r.replica);
            continue;
        }
        if (result.nc_histogram.size() <= r.n_c)
        {
            result.nc_histogram.resize(r.n_c + 1, 0);
        }
        ++result.nc_histogram[r.n_c];
        if (ratio_sum.size() < r.ratio_trace.size())
        {
            ratio_sum.resize(r.ratio_trace.size(), 0.0);
            ratio_count.resize(r.ratio_trace.size(), 0);
        }
        for (std::size_t k = 0; k < r.ratio_trace.size(); ++k)
        {
            ratio_sum[k] += r.ratio_trace[k];
            ++ratio_count[k];
        }
    }
    for (std::size_t k = 0; k < ratio_sum.size(); ++k)
    {
        result.mean_ratio.push_back({k, ratio_sum[k] / static_cast<double>(ratio_count[k]),
                                     ratio_count[k]});
    }
    auto const sigmas = result.sigma_max_values();
    auto const counts = result.n_c_values();
    result.sigma_max = summarize(sigmas);
    result.n_c = summarize(counts);
    if (sigmas.size() >= 2)
    {
        result.ecdf = empirical_cdf(sigmas);
    }
    return result;
}

//---------------------------------------------------------------------------//

GammaEstimate estimate_gamma(EnsembleResult const& result, std::size_t max_replicas)
{
    GammaEstimate est;
    est.n = 2 * static_cast<std::size_t>(result.config.mesh.rows)
            * static_cast<std::size_t>(result.config.mesh.gaps);
    std::vector<double> sum;
    std::size_t used = 0;
    for (auto const& r : result.replicas)
    {
        if (!r.ok || r.ratio_trace.empty())
        {
            continue;
        }
        if (max_replicas != 0 && used >= max_replicas)
        {
            break;
        }
        ++used;
        if (sum.size() < r.ratio_trace.size())
        {
            sum.resize(r.ratio_trace.size(), 0.0);
            est.count.resize(r.ratio_trace.size(), 0);
        }
        for (std::size_t k = 0; k < r.ratio_trace.size(); ++k)
        {
            sum[k] += r.ratio_trace[k];
            ++est.count[k];
        }
    }
    if (used < 10)
    {
        throw FitError("gamma estimation needs ratio traces from at least 10 replicas");
    }
    est.mean.resize(sum.size());
    for (std::size_t k = 0; k < sum.size(); ++k)
    {
        est.mean[k] = sum[k] / static_cast<double>(est.count[k]);
    }

    // Count-weighted linear least squares: gamma = a + b k.
    double sw = 0, sk = 0, sy = 0, skk = 0, sky = 0;
    for (std::size_t k = 0; k < est.mean.size(); ++k)
    {
        double const w = static_cast<double>(est.count[k]);
        double const kd = static_cast<double>(k);
        sw += w;
        sk += w * kd;
        sy += w * est.mean[k];
        skk += w * kd * kd;
        sky += w * kd * est.mean[k];
    }
    double const det = sw * skk - sk * sk;
    if (det > 0)
    {
        est.linear_slope = (sw * sky - sk * sy) / det;
        est.linear_intercept = (sy - est.linear_slope * sk) / sw;
    }
    else
    {
        est.linear_slope = 0;
        est.linear_intercept = sy / sw;
    }

    auto const nd = static_cast<double>(est.n);
    auto ssr_rational = [&](double c) {
        double ssr = 0;
        for (std::size_t k = 0; k < est.mean.size(); ++k)
        {
            double const r = est.mean[k] - nd / (nd - c * static_cast<double>(k));
            ssr += static_cast<double>(est.count[k]) * r * r;
        }
        return ssr;
    };
    auto const kmax = static_cast<double>(std::max<std::size_t>(est.mean.size() - 1, 1));
    double const c_hi = std::min(0.999 * nd / kmax, 50.0);
    auto const [c_best, ssr_best] = boost::math::tools::brent_find_minima(ssr_rational, 0.0, c_hi, 52);
    est.rational_c = c_best;
    est.rational_ssr = ssr_best;
    est.linear_ssr = 0;
    for (std::size_t k = 0; k < est.mean.size(); ++k)
    {
        double const r
            = est.mean[k] - (est.linear_intercept + est.linear_slope * static_cast<double>(k));
        est.linear_ssr += static_cast<double>(est.count[k]) * r * r;
    }
    return est;
}

void write_campaign_outputs(EnsembleResult const& result, std::filesystem::path const& directory)
{
    std::filesystem::create_directories(directory);
    {
        CsvWriter csv(directory / "sigma_max.csv",
                      {"replica", "sigma_max", "N_c", "events", "status"});
        for (auto const& r : result.replicas)
        {
            csv << r.replica << r.sigma_max << r.n_c << r.events
                << (r.ok ? std::string_view{stop_reason_name(r.stop)} : std::string_view{"failed"});
            csv.end_row();
        }
    }
    {
        CsvWriter csv(directory / "nc_hist.csv", {"N_c", "count", "frequency"});
        double total = 0;
        for (auto c : result.nc_histogram)
        {
            total += static_cast<double>(c);
        }
        for (std::size_t k = 0; k < result.nc_histogram.size(); ++k)
        {
            csv << k << result.nc_histogram[k]
                << static_cast<double>(result.nc_histogram[k]) / total;
            csv.end_row();
        }
    }
    {
        CsvWriter csv(directory / "ratio_trace.csv", {"k", "mean_ratio", "replicas"});
        for (auto const& p : result.mean_ratio)
        {
            csv << p.k << p.mean << p.replicas;
            csv.end_row();
        }
    }
    {
        CsvWriter csv(directory / "ecdf_weibull.csv",
                      {"sigma_max", "p", "weibull_x", "weibull_y"});
        for (auto const& p : result.ecdf)
        {
            csv << p.x << p.p << p.weibull_x << p.weibull_y;
            csv.end_row();
        }
    }
}
}  // namespace fishnet
