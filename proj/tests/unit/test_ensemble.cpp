#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fishnet/ensemble.hpp"
#include "fishnet/errors.hpp"
#include "fishnet/strength_model.hpp"

using namespace fishnet;
namespace fs = std::filesystem;

namespace
{
EnsembleConfig small_config(std::uint64_t replicas)
{
    EnsembleConfig c;
    c.mesh.rows = 6;
    c.mesh.gaps = 6;
    c.replicas = replicas;
    c.master_seed = 4242;
    return c;
}

std::string slurp(fs::path const& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}
}  // namespace

TEST(EmpiricalCdf, MidpointPositions)
{
    std::vector<double> v{2.0, 1.0};
    auto const e = empirical_cdf(v);
    ASSERT_EQ(e.size(), 2u);
    EXPECT_EQ(e[0].x, 1.0);
    EXPECT_EQ(e[0].p, 0.25);
    EXPECT_EQ(e[1].p, 0.75);
    EXPECT_NEAR(e[1].weibull_x, std::log(2.0), 1e-15);
    EXPECT_NEAR(e[1].weibull_y, std::log(-std::log(0.25)), 1e-15);
    std::vector<double> one{1.0};
    EXPECT_THROW((void)empirical_cdf(one), DomainError);
}

TEST(EmpiricalCdf, RecoversKnownDistribution)
{
    StrengthDistribution const p1;
    auto const v = p1.sample(10000, 3);
    auto const e = empirical_cdf(v);
    double d = 0;
    for (std::size_t i = 0; i < e.size(); ++i)
    {
        ASSERT_TRUE(i == 0 || e[i].p > e[i - 1].p);
        d = std::max(d, std::abs(p1.cdf(e[i].x) - e[i].p));
    }
    // KS critical value at n = 1e4, alpha = 0.01, plus the half-step offset.
    EXPECT_LE(d, 1.63 / 100.0 + 0.5e-4);
}

TEST(Statistics, SummaryAndMedian)
{
    std::vector<double> v{4, 1, 3, 2};
    auto const s = summarize(v);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.sd, std::sqrt(5.0 / 3.0));
    EXPECT_DOUBLE_EQ(median(v), 2.5);
    std::vector<double> odd{5, 1, 3};
    EXPECT_DOUBLE_EQ(median(odd), 3.0);
    EXPECT_THROW((void)median(std::vector<double>{}), DomainError);
}

TEST(Ensemble, ConfigJsonRoundTrip)
{
    auto c = small_config(17);
    c.kt_ratio = 0.3;
    c.jumps = 7;
    c.first_replica = 5;
    c.termination_fraction = 0.1;
    c.policy = FactorizationPolicy::always_refactor;
    auto const back = ensemble_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(back.policy, FactorizationPolicy::always_refactor);
}

TEST(Ensemble, DeterministicAcrossWorkerCounts)
{
    std::vector<std::string> outputs;
    for (unsigned threads : {1u, 4u, 16u})
    {
        auto c = small_config(40);
        c.threads = threads;
        auto const r = run_ensemble(c);
        auto const dir = fs::path("ensemble_det") / std::to_string(threads);
        fs::create_directories(dir);
        write_campaign_outputs(r, dir);
        std::string all;
        for (char const* f : {"sigma_max.csv", "nc_hist.csv", "ratio_trace.csv", "ecdf_weibull.csv"})
        {
            all += slurp(dir / f);
        }
        outputs.push_back(all);
    }
    EXPECT_EQ(outputs[0], outputs[1]);
    EXPECT_EQ(outputs[0], outputs[2]);
    EXPECT_FALSE(outputs[0].empty());
}

TEST(Ensemble, ReplicaRangesCompose)
{
    // Resumption: [0, 10) + [10, 20) reproduces [0, 20).
    auto whole = small_config(20);
    auto first = small_config(10);
    auto second = small_config(10);
    second.first_replica = 10;
    auto const a = run_ensemble(whole);
    auto const b = run_ensemble(first);
    auto const c = run_ensemble(second);
    for (std::size_t i = 0; i < 10; ++i)
    {
        EXPECT_EQ(a.replicas[i].sigma_max, b.replicas[i].sigma_max);
        EXPECT_EQ(a.replicas[i + 10].sigma_max, c.replicas[i].sigma_max);
        EXPECT_EQ(a.replicas[i + 10].replica, 10 + i);
    }
}

TEST(Ensemble, AggregatesAreConsistent)
{
    auto const r = run_ensemble(small_config(30));
    EXPECT_TRUE(r.failures.empty());
    auto const sigma = r.sigma_max_values();
    auto const nc = r.n_c_values();
    ASSERT_EQ(sigma.size(), 30u);
    EXPECT_NEAR(r.sigma_max.mean, summarize(sigma).mean, 1e-12);
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < r.nc_histogram.size(); ++k)
    {
        total += r.nc_histogram[k];
    }
    EXPECT_EQ(total, 30u);
    EXPECT_EQ(r.ecdf.size(), 30u);
    for (auto const& o : r.replicas)
    {
        EXPECT_NEAR(o.first_sigma_n, o.min_strength, 1e-9 * o.min_strength);
    }
    ASSERT_FALSE(r.mean_ratio.empty());
    EXPECT_NEAR(r.mean_ratio[0].mean, 1.0, 1e-9);
    EXPECT_EQ(r.mean_ratio[0].replicas, 30u);
}

TEST(Ensemble, GammaEstimate)
{
    auto const r = run_ensemble(small_config(40));
    auto const g = estimate_gamma(r, 32);
    ASSERT_FALSE(g.mean.empty());
    EXPECT_NEAR(g.mean[0], 1.0, 1e-9);
    EXPECT_EQ(g.count[0], 32u);
    EXPECT_EQ(g.n, 72u);
    // Oracle: plain pointwise mean over the first 32 traces.
    for (std::size_t k = 0; k < g.mean.size(); ++k)
    {
        double sum = 0;
        std::uint64_t n = 0;
        for (std::size_t i = 0; i < 32; ++i)
        {
            auto const& t = r.replicas[i].ratio_trace;
            if (k < t.size())
            {
                sum += t[k];
                ++n;
            }
        }
        EXPECT_EQ(g.count[k], n);
        EXPECT_NEAR(g.mean[k], sum / static_cast<double>(n), 1e-12);
    }
    EXPECT_GE(g.rational_ssr, 0.0);
    EXPECT_GE(g.linear_ssr, 0.0);

    auto tiny = small_config(5);
    EXPECT_THROW((void)estimate_gamma(run_ensemble(tiny)), FitError);
}

TEST(Ensemble, ModelComparison)
{
    std::vector<double> v{7.2, 7.5, 7.8, 8.0};
    auto const e = empirical_cdf(v);
    TailModel const m(OrderStatBasis(StrengthDistribution{}, 512), PolyaAeppli(24.0, 0.69),
                      GammaScaling::rational(512), {5, 0});
    auto const pts = compare_with_model(e, m);
    ASSERT_EQ(pts.size(), 4u);
    double gap = 0;
    for (auto const& p : pts)
    {
        EXPECT_EQ(p.p_model, m.failure_probability(p.x));
        gap = std::max(gap, std::abs(p.weibull_y_model - p.weibull_y_empirical));
    }
    EXPECT_EQ(max_weibull_gap(pts, 0.0, 1.0), gap);
    EXPECT_EQ(max_weibull_gap(pts, 0.4, 0.6), 0.0);  // no points inside
}
