// Acceptance suite: one verdict line per criterion, nonzero exit on any FAIL.
//
//   fishnet_acceptance [--criterion N]
//
// FISHNET_ACCEPTANCE_REPLICAS lowers the criterion 7 sample below 10^4; the
// checked probability range then narrows to [1e-2, 0.99].

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fishnet/cli.hpp"
#include "fishnet/counter_rng.hpp"
#include "fishnet/ensemble.hpp"
#include "fishnet/order_stats.hpp"
#include "fishnet/polya_aeppli.hpp"
#include "fishnet/sla_solver.hpp"
#include "fishnet/strength_model.hpp"
#include "fishnet/tail_predictor.hpp"

namespace fs = std::filesystem;
using namespace fishnet;

namespace
{
struct Verdict
{
    bool pass;
    std::string detail;
};

std::string fmt(double v, int precision = 6)
{
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

std::string slurp(fs::path const& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// Campaign at full size (R = 16, C = 16, N = 512) shared by several criteria.
EnsembleConfig full_config(double kt_ratio, std::uint64_t replicas)
{
    EnsembleConfig c;
    c.kt_ratio = kt_ratio;
    c.replicas = replicas;
    c.threads = cli::default_threads();
    return c;
}

EnsembleResult const& campaign(double kt_ratio, std::uint64_t replicas)
{
    static std::map<std::pair<double, std::uint64_t>, EnsembleResult> cache;
    auto const key = std::pair{kt_ratio, replicas};
    auto it = cache.find(key);
    if (it == cache.end())
    {
        it = cache.emplace(key, run_ensemble(full_config(kt_ratio, replicas))).first;
    }
    return it->second;
}

Verdict criterion1()
{
    using big = boost::multiprecision::cpp_bin_float_50;
    StrengthDistribution const p1;
    big const x{"8.6"};
    big const lower = 2.55 * (1 - exp(-pow(x / 12, 10)));
    big const upper = big{"0.526"} - big{"0.474"} * erf(big{"0.884"} * (10 - x));
    double const lo = p1.lower_branch(8.6);
    double const hi = p1.upper_branch(8.6);
    double const gap = std::abs(lo - hi);
    double const oracle_err = std::max(std::abs(lo - lower.convert_to<double>()) / lo,
                                       std::abs(hi - upper.convert_to<double>()) / hi);
    bool const near = std::abs(lo - 0.090) <= 5e-4 && std::abs(hi - 0.090) <= 5e-4;
    bool const pass = gap <= 1e-3 && near && oracle_err <= 1e-12;
    return {pass, "lower=" + fmt(lo, 10) + " upper=" + fmt(hi, 10) + " gap=" + fmt(gap, 4)
                      + " oracle_rel_err=" + fmt(oracle_err, 3)};
}

Verdict criterion2()
{
    constexpr std::size_t trials = 100'000;
    StrengthDistribution const p1;
    double worst = 0;
    std::string where;
    for (std::size_t n : {8u, 512u})
    {
        std::vector<std::size_t> ks{0, 1, 5};
        if (n == 512)
        {
            ks.push_back(20);
        }
        std::size_t const kmax = ks.back();
        OrderStatBasis const basis(p1, n);
        std::vector<std::vector<double>> kth(ks.size());
        std::vector<double> sample(n);
        for (std::size_t t = 0; t < trials; ++t)
        {
            p1.sample_into(sample, replica_seed(0xacce55 + n, t));
            std::partial_sort(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(kmax + 1), sample.end());
            for (std::size_t i = 0; i < ks.size(); ++i)
            {
                kth[i].push_back(sample[ks[i]]);
            }
        }
        for (std::size_t i = 0; i < ks.size(); ++i)
        {
            auto& v = kth[i];
            std::sort(v.begin(), v.end());
            double d = 0;
            for (std::size_t j = 0; j < v.size(); ++j)
            {
                double const w = basis.wk(v[j], ks[i]);
                d = std::max({d, std::abs(w - static_cast<double>(j) / trials),
                              std::abs(w - static_cast<double>(j + 1) / trials)});
            }
            worst = std::max(worst, d);
            where += " N=" + std::to_string(n) + "/k=" + std::to_string(ks[i]) + ":" + fmt(d, 3);
        }
    }
    return {worst <= 0.01, "sup distances" + where + " (limit 0.01)"};
}

Verdict criterion3()
{
    double worst_sum = 0, worst_moment = 0;
    for (auto [l, th] : {std::pair{2.0, 0.5}, std::pair{24.0, 0.69}, std::pair{7.0, 0.81}})
    {
        PolyaAeppli const pa(l, th);
        auto const p = pa.pmf_until_mass(1e-15);
        worst_sum = std::max(worst_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1));
        auto const q = pa.pmf_table(4000);
        double m = 0, m2 = 0;
        for (std::size_t k = 0; k < q.size(); ++k)
        {
            m += static_cast<double>(k) * q[k];
            m2 += static_cast<double>(k) * static_cast<double>(k) * q[k];
        }
        double const mean = l / th;
        double const var = l * (2 - th) / (th * th);
        worst_moment = std::max({worst_moment, std::abs(m - mean) / mean, std::abs(m2 - m * m - var) / var});
    }

    PolyaAeppli const ref(2.0, 0.5);
    auto const fit = fit_moments(4.0, 12.0);
    bool const round_trip = ref.moments().mean == 4.0 && ref.moments().variance == 12.0
                            && fit.distribution.lambda() == 2.0 && fit.distribution.theta() == 0.5;

    constexpr std::size_t draws = 1'000'000;
    PolyaAeppli const pa(6.0, 0.6);
    auto const sample = pa.sample(draws, 99);
    auto const pmf = pa.pmf_until_mass(1e-14);
    std::vector<double> freq(pmf.size(), 0.0);
    double tv = 0;
    for (auto d : sample)
    {
        if (d < freq.size())
        {
            freq[d] += 1.0 / draws;
        }
        else
        {
            tv += 1.0 / draws;
        }
    }
    for (std::size_t k = 0; k < pmf.size(); ++k)
    {
        tv += std::abs(freq[k] - pmf[k]);
    }
    tv *= 0.5;

    bool const pass = worst_sum <= 1e-12 && worst_moment <= 1e-9 && round_trip && tv <= 0.005;
    return {pass, "sum_err=" + fmt(worst_sum, 3) + " moment_rel_err=" + fmt(worst_moment, 3)
                      + " round_trip=" + (round_trip ? "exact" : "inexact") + " tv=" + fmt(tv, 4)};
}

Verdict criterion4()
{
    auto const& r = campaign(0.1, 100);
    double worst = 0;
    for (auto const& o : r.replicas)
    {
        worst = std::max(worst, std::abs(o.first_sigma_n - o.min_strength) / o.min_strength);
    }
    bool const pass = r.failures.empty() && r.replicas.size() == 100 && worst <= 1e-9;
    return {pass, "100 replicas, max relative difference " + fmt(worst, 3)};
}

Verdict criterion5()
{
    EnsembleConfig c;
    c.mesh.rows = 8;
    c.mesh.gaps = 8;
    c.kt_ratio = 0.01;
    c.jumps = 500;
    c.replicas = 50;
    c.threads = cli::default_threads();
    auto const topology = build_topology(c.mesh);
    auto const sim = simulation_config(c);

    std::uint64_t prepeak = 0, violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < c.replicas; ++i)
    {
        auto const strengths = sample_strengths(topology.link_count(), replica_seed(c.master_seed, i));
        auto sorted = strengths;
        std::sort(sorted.begin(), sorted.end());
        auto const rec = run_simulation(topology, strengths, sim);
        for (auto const& e : rec.events)
        {
            if (e.index > rec.peak_event)
            {
                break;
            }
            ++prepeak;
            double const ratio = sorted[e.k] / e.sigma_n;
            worst = std::min(worst, ratio);
            if (ratio < 1.0)
            {
                ++violations;
            }
        }
    }

    auto const r = run_ensemble(c);
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (auto const& p : r.mean_ratio)
    {
        lo = std::min(lo, p.mean);
        hi = std::max(hi, p.mean);
    }
    bool const bound = violations == 0;
    bool const band = lo >= 1.0 && hi <= 1.10;
    return {bound && band, "upper bound violated at " + std::to_string(violations) + "/" + std::to_string(prepeak)
                               + " prepeak events (min s_(k)/sigma_N " + fmt(worst, 4) + "); mean ratio in ["
                               + fmt(lo, 4) + ", " + fmt(hi, 4) + "] (band [1.00, 1.10])"};
}

Verdict criterion6()
{
    std::string detail;
    std::vector<std::pair<double, double>> ci;
    for (double kt : {0.1, 0.3, 0.5})
    {
        auto const& r = campaign(kt, 1000);
        double const n = static_cast<double>(r.replicas.size() - r.failures.size());
        double const half = 1.96 * r.n_c.sd / std::sqrt(n);
        ci.emplace_back(r.n_c.mean - half, r.n_c.mean + half);
        detail += "kt=" + fmt(kt, 2) + " N_c " + fmt(r.n_c.mean, 4) + " +- " + fmt(half, 3) + "; ";
    }
    bool pass = true;
    for (std::size_t i = 1; i < ci.size(); ++i)
    {
        pass = pass && ci[i].second < ci[i - 1].first;
    }
    return {pass, detail + "strictly decreasing, disjoint CIs required"};
}

Verdict criterion7()
{
    std::uint64_t replicas = 10'000;
    if (char const* env = std::getenv("FISHNET_ACCEPTANCE_REPLICAS"))
    {
        replicas = std::min<std::uint64_t>(replicas, std::stoull(env));
    }
    double const p_lo = replicas < 10'000 ? 1e-2 : 1e-3;
    auto const& r = campaign(0.1, replicas);
    auto const nc = r.n_c_values();
    double const var = r.n_c.sd * r.n_c.sd;
    auto const fit = fit_moments(r.n_c.mean, var);
    std::size_t const n = build_topology(r.config.mesh).link_count();
    TailModel const model(OrderStatBasis(StrengthDistribution(r.config.strength), n), fit.distribution,
                          GammaScaling::rational(n), {5, 0});
    auto const points = compare_with_model(r.ecdf, model);
    double const gap = max_weibull_gap(points, p_lo, 0.99);
    return {gap <= 0.3, std::to_string(nc.size()) + " replicas, lambda=" + fmt(fit.distribution.lambda(), 4)
                            + " theta=" + fmt(fit.distribution.theta(), 4) + ", max Weibull gap " + fmt(gap, 4)
                            + " over P_f in [" + fmt(p_lo, 2) + ", 0.99] (limit 0.3)"};
}

Verdict criterion8()
{
    auto const& flat = campaign(0.1, 1000);
    auto const& steep = campaign(0.5, 1000);
    auto const a = flat.sigma_max_values();
    auto const b = steep.sigma_max_values();
    double const ratio = median(a) / median(b);

    auto tail = [](EnsembleResult const& r, double kt) {
        auto const fit = fit_moments(r.n_c.mean, r.n_c.sd * r.n_c.sd);
        auto const t1 = *calibrated_orders(kt);
        std::size_t const n = build_topology(r.config.mesh).link_count();
        TailModel const model(OrderStatBasis(StrengthDistribution(r.config.strength), n), fit.distribution,
                              GammaScaling::rational(n), {t1.k0, t1.delta_k});
        return model.strength_at_probability(1e-6).x;
    };
    double const tail_flat = tail(flat, 0.1);
    double const tail_steep = tail(steep, 0.5);
    bool const pass = ratio >= 1.15 && tail_flat > tail_steep;
    return {pass, "median " + fmt(median(a), 5) + " vs " + fmt(median(b), 5) + ", ratio " + fmt(ratio, 4)
                      + " (limit 1.15); analytic 1e-6 strength " + fmt(tail_flat, 5) + " vs " + fmt(tail_steep, 5)};
}

Verdict criterion9()
{
    auto const root = fs::path("acceptance_determinism");
    fs::remove_all(root);
    std::ostringstream out, err;
    int code = cli::run({"campaign", "--replicas", "200", "--kt-ratio", "0.3", "--threads", "1", "--out",
                         (root / "t1").string()},
                        out, err);
    if (code != 0)
    {
        return {false, "campaign exited " + std::to_string(code) + ": " + err.str()};
    }
    auto const manifest = (root / "t1" / "manifest.json").string();
    for (char const* threads : {"4", "16"})
    {
        code = cli::run({"replay", "--manifest", manifest, "--threads", threads, "--out",
                         (root / (std::string("t") + threads)).string()},
                        out, err);
        if (code != 0)
        {
            return {false, "replay exited " + std::to_string(code) + ": " + err.str()};
        }
    }
    std::size_t compared = 0;
    for (char const* f : {"sigma_max.csv", "nc_hist.csv", "ratio_trace.csv", "ecdf_weibull.csv", "summary.json"})
    {
        auto const ref = slurp(root / "t1" / f);
        for (char const* t : {"t4", "t16"})
        {
            if (ref.empty() || slurp(root / t / f) != ref)
            {
                return {false, std::string(f) + " differs at " + t};
            }
            ++compared;
        }
    }
    return {true, std::to_string(compared) + " output files byte-identical at 1, 4 and 16 workers"};
}

Verdict criterion10()
{
    MeshGeometry const mesh{};
    auto const topology = build_topology(mesh);
    SimulationConfig check;
    check.cross_check = true;
    check.keep_events = false;
    double worst = 0;
    std::uint64_t events = 0;
    for (std::uint64_t i = 0; i < 10; ++i)
    {
        auto const s = sample_strengths(topology.link_count(), replica_seed(20170101, i));
        auto const rec = run_simulation(topology, s, check);
        worst = std::max(worst, rec.max_cross_check_error);
        events += rec.event_count;
    }

    auto timed = [](FactorizationPolicy policy) {
        auto c = full_config(0.1, 20);
        c.threads = 1;
        c.policy = policy;
        return run_ensemble(c).throughput.events_per_second();
    };
    double const fast = timed(FactorizationPolicy::rank_one_reuse);
    double const slow = timed(FactorizationPolicy::always_refactor);
    double const speedup = fast / slow;
    bool const pass = worst <= 1e-8 && speedup >= 3.0;
    return {pass, "max relative deviation " + fmt(worst, 3) + " over " + std::to_string(events)
                      + " events; throughput " + fmt(fast, 4) + " vs " + fmt(slow, 4) + " events/s, speedup "
                      + fmt(speedup, 3) + "x (limit 3x)"};
}
}  // namespace

int main(int argc, char** argv)
{
    std::vector<std::function<Verdict()>> const criteria{criterion1, criterion2, criterion3, criterion4,
                                                         criterion5, criterion6, criterion7, criterion8,
                                                         criterion9, criterion10};
    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i)
    {
        std::string const arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc)
        {
            auto const n = std::stoul(argv[++i]);
            if (n < 1 || n > criteria.size())
            {
                std::cerr << "criterion must be in 1.." << criteria.size() << '\n';
                return 2;
            }
            selected.push_back(n);
        }
        else
        {
            std::cerr << "usage: fishnet_acceptance [--criterion N]...\n";
            return 2;
        }
    }
    if (selected.empty())
    {
        selected.resize(criteria.size());
        std::iota(selected.begin(), selected.end(), 1);
    }

    int failed = 0;
    for (auto n : selected)
    {
        auto const start = std::chrono::steady_clock::now();
        Verdict v;
        try
        {
            v = criteria[n - 1]();
        }
        catch (std::exception const& e)
        {
            v = {false, std::string("error: ") + e.what()};
        }
        double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << " ["
                  << fmt(secs, 3) << " s]" << std::endl;
        failed += v.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
