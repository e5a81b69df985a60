#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "fishnet/errors.hpp"
#include "fishnet/strength_model.hpp"

using namespace fishnet;
using big = boost::multiprecision::cpp_bin_float_50;

namespace
{
// 50-digit evaluation of the two branches.
double lower_oracle(double x)
{
    big const t = big(x) / 12;
    return static_cast<double>(big("2.55") * (1 - exp(-pow(t, 10))));
}

double upper_oracle(double x)
{
    return static_cast<double>(big("0.526") - big("0.474") * boost::math::erf(big("0.884") * (10 - big(x))));
}
}  // namespace

TEST(StrengthModel, ReferenceValues)
{
    // 40-digit reference values computed offline.
    StrengthDistribution const p1;
    EXPECT_EQ(p1.cdf(0.0), 0.0);
    EXPECT_NEAR(p1.cdf(5.0), 0.00040215503942716244, 1e-17);
    EXPECT_NEAR(p1.cdf(7.25), 0.016470297936752764, 1e-16);
    EXPECT_NEAR(p1.cdf(8.6), 0.089531156243998974, 1e-15);
    EXPECT_NEAR(p1.cdf(9.0), 0.15212745491599036, 1e-15);
    EXPECT_NEAR(p1.cdf(12.0), 0.99411871156130127, 1e-15);
    EXPECT_NEAR(p1.cdf(15.0), 0.99999999980646916, 1e-15);
}

TEST(StrengthModel, MatchesHighPrecisionOracleOnGrid)
{
    StrengthDistribution const p1;
    for (double x = 0.05; x < 20; x += 0.05)
    {
        double const expect = x <= 8.6 ? lower_oracle(x) : upper_oracle(x);
        EXPECT_NEAR(p1.cdf(x), std::clamp(expect, 0.0, 1.0), 1e-14 * std::max(1e-3, expect)) << x;
    }
}

TEST(StrengthModel, BranchMismatchAtCrossover)
{
    StrengthDistribution const p1;
    double const lo = p1.lower_branch(8.6);
    double const up = p1.upper_branch(8.6);
    EXPECT_NEAR(lo, lower_oracle(8.6), 1e-15);
    EXPECT_NEAR(up, upper_oracle(8.6), 1e-15);
    EXPECT_LE(std::abs(lo - up), 1e-3);
    EXPECT_NEAR(lo, 0.090, 1e-3);
    EXPECT_NEAR(up, 0.090, 1e-3);
    EXPECT_NEAR(up - lo, 4.2605871944374447e-4, 1e-12);
}

TEST(StrengthModel, SurvivalComplementsCdf)
{
    StrengthDistribution const p1;
    for (double x : {1.0, 8.0, 8.7, 11.0, 14.0})
    {
        EXPECT_NEAR(p1.survival(x), 1.0 - p1.cdf(x), 1e-15);
    }
    // Far tail keeps relative precision where 1 - cdf rounds to zero.
    double const far = static_cast<double>(big("0.474") * boost::math::erfc(big("0.884") * 8));
    EXPECT_NEAR(p1.survival(18.0), far, 1e-13 * far);
}

TEST(StrengthModel, MonotoneAndBounded)
{
    StrengthDistribution const p1;
    double prev = 0;
    for (double x = 0; x <= 25; x += 0.001)
    {
        double const c = p1.cdf(x);
        ASSERT_GE(c, prev) << x;
        ASSERT_LE(c, 1.0);
        prev = c;
    }
    EXPECT_EQ(p1.cdf(40.0), 1.0);
}

TEST(StrengthModel, InverseRoundTrip)
{
    StrengthDistribution const p1;
    double const lo = p1.lower_branch(8.6);
    double const up = p1.upper_branch(8.6);
    for (double p = 0; p <= 0.999; p += 0.0005)
    {
        if (p > lo && p < up)
        {
            continue;
        }
        double const x = p1.inverse_cdf(p);
        EXPECT_LE(std::abs(p1.cdf(x) - p), 1e-9) << p;
    }
    EXPECT_EQ(p1.inverse_cdf(0.0), 0.0);
    EXPECT_NEAR(p1.inverse_cdf(0.0895), 8.6, 2e-3);
}

TEST(StrengthModel, InverseInsideGapIsCrossover)
{
    StrengthDistribution const p1;
    double const mid = 0.5 * (p1.lower_branch(8.6) + p1.upper_branch(8.6));
    EXPECT_DOUBLE_EQ(p1.inverse_cdf(mid), 8.6);
}

TEST(StrengthModel, InverseOnUpperBranchAtMedian)
{
    StrengthDistribution const p1;
    double const x = p1.inverse_cdf(0.5);
    EXPECT_GT(x, 8.6);
    EXPECT_NEAR(upper_oracle(x), 0.5, 1e-10);
}

TEST(StrengthModel, DomainErrors)
{
    StrengthDistribution const p1;
    EXPECT_THROW((void)p1.cdf(-1e-9), DomainError);
    EXPECT_THROW((void)p1.inverse_cdf(1.0), DomainError);
    EXPECT_THROW((void)p1.inverse_cdf(-0.1), DomainError);
    EXPECT_THROW((void)p1.inverse_cdf(std::nan("")), DomainError);
}

TEST(StrengthModel, RejectsInconsistentParameters)
{
    StrengthParams bad;
    bad.gauss_offset = 0.6;  // offset + amplitude != 1
    EXPECT_THROW(StrengthDistribution{bad}, ConfigError);
    StrengthParams neg;
    neg.weibull_scale = -1;
    EXPECT_THROW(StrengthDistribution{neg}, ConfigError);
}

TEST(StrengthModel, SamplingIsDeterministic)
{
    auto const a = sample_strengths(5, 42);
    auto const b = sample_strengths(5, 42);
    EXPECT_EQ(a, b);
    auto const c = sample_strengths(5, 43);
    EXPECT_NE(a, c);
    // Element i depends only on (seed, i): a longer draw extends the shorter.
    auto const longer = sample_strengths(9, 42);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), longer.begin()));
}

TEST(StrengthModel, SampleMatchesCdfWithinKolmogorovBound)
{
    StrengthDistribution const p1;
    auto v = p1.sample(100000, 7);
    ASSERT_TRUE(std::all_of(v.begin(), v.end(), [](double x) { return x >= 0; }));
    std::sort(v.begin(), v.end());
    double const n = static_cast<double>(v.size());
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        double const c = p1.cdf(v[i]);
        d = std::max({d, std::abs(c - static_cast<double>(i) / n), std::abs(c - static_cast<double>(i + 1) / n)});
    }
    EXPECT_LE(d, 0.006);
}
