#include "fishnet/strength_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fishnet/counter_rng.hpp"
#include "fishnet/errors.hpp"

namespace fishnet
{
namespace
{
constexpr int kMaxBisection = 200;

[[nodiscard]] double tolerance_for(double p) noexcept
{
    return 1e-10 * std::max(1.0, p);
}

// Bisection on a nondecreasing branch over [lo, hi] where f(lo) <= p <= f(hi).
template<class F>
[[nodiscard]] double bisect(F const& f, double p, double lo, double hi)
{
    double const tol = tolerance_for(p);
    for (int it = 0; it < kMaxBisection; ++it)
    {
        double const mid = 0.5 * (lo + hi);
        double const value = f(mid);
        if (std::abs(value - p) <= tol || mid == lo || mid == hi)
        {
            return mid;
        }
        (value < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}
}  // namespace

StrengthDistribution::StrengthDistribution(StrengthParams const& params)
    : params_(params)
{
    if (!(params.weibull_scale > 0) || !(params.weibull_exponent > 0)
        || !(params.weibull_amplitude > 0) || !(params.crossover > 0)
        || !(params.gauss_slope > 0) || !(params.gauss_amplitude > 0))
    {
        throw ConfigError("strength distribution: scales, exponent, "
                          "amplitudes and crossover must be positive");
    }
    if (std::abs(params.gauss_offset + params.gauss_amplitude - 1.0) > 1e-12)
    {
        throw ConfigError("strength distribution: upper branch must tend to 1 "
                          "(gauss_offset + gauss_amplitude == 1)");
    }
}

double StrengthDistribution::lower_branch(double x) const
{
    double const z = std::pow(x / params_.weibull_scale, params_.weibull_exponent);
    return -params_.weibull_amplitude * std::expm1(-z);
}

double StrengthDistribution::upper_branch(double x) const
{
    return params_.gauss_offset
           - params_.gauss_amplitude
                 * std::erf(params_.gauss_slope * (params_.gauss_center - x));
}

double StrengthDistribution::cdf(double x) const
{
    if (!(x >= 0))
    {
        throw DomainError("P1: negative stress " + std::to_string(x));
    }
    double const value = x <= params_.crossover ? lower_branch(x) : upper_branch(x);
    return std::clamp(value, 0.0, 1.0);
}

double StrengthDistribution::survival(double x) const
{
    if (!(x >= 0))
    {
        throw DomainError("P1: negative stress " + std::to_string(x));
    }
    if (x <= params_.crossover)
    {
        return std::clamp(1.0 - lower_branch(x), 0.0, 1.0);
    }
    // 1 - c0 + c1 erf(z) = (1 - c0 - c1) + c1 erfc(-z)
    double const z = params_.gauss_slope * (params_.gauss_center - x);
    double const value = (1.0 - params_.gauss_offset - params_.gauss_amplitude)
                         + params_.gauss_amplitude * std::erfc(-z);
    return std::clamp(value, 0.0, 1.0);
}

double StrengthDistribution::inverse_cdf(double p) const
{
    if (!(p >= 0 && p < 1))
    {
        throw DomainError("P1 inverse: probability outside [0, 1): "
                          + std::to_string(p));
    }
    if (p == 0)
    {
        return 0;
    }
    double const xc = params_.crossover;
    double const lower_top = lower_branch(xc);
    if (p <= lower_top)
    {
        return bisect([this](double x) { return lower_branch(x); }, p, 0.0, xc);
    }
    if (p <= upper_branch(xc))
    {
        return xc;
    }
    auto upper = [this](double x) { return std::min(upper_branch(x), 1.0); };
    double hi = std::max(xc, params_.gauss_center) + 1.0;
    while (upper(hi) < p)
    {
        hi += 2.0 * (hi - xc);
    }
    return bisect(upper, p, xc, hi);
}

void StrengthDistribution::sample_into(std::span<double> out, std::uint64_t seed) const
{
    CounterRng const rng{seed};
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        out[i] = inverse_cdf(rng.uniform(i));
    }
}

std::vector<double> StrengthDistribution::sample(std::size_t n, std::uint64_t seed) const
{
    if (n == 0)
    {
        throw DomainError("sample_strengths: n must be at least 1");
    }
    std::vector<double> out(n);
    sample_into(out, seed);
    return out;
}

std::vector<double> sample_strengths(std::size_t n, std::uint64_t seed)
{
    return StrengthDistribution{}.sample(n, seed);
}
}  // namespace fishnet
