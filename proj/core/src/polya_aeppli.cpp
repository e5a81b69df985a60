#include "fishnet/polya_aeppli.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fishnet/errors.hpp"

namespace fishnet
{
PolyaAeppli::PolyaAeppli(double lambda, double theta) : lambda_(lambda), theta_(theta)
{
    if (!(lambda > 0) || !std::isfinite(lambda))
    {
        throw ConfigError("Polya-Aeppli: lambda must be positive");
    }
    if (!(theta > 0 && theta <= 1))
    {
        throw ConfigError("Polya-Aeppli: theta must lie in (0, 1]");
    }
}

std::vector<double> PolyaAeppli::pmf_table(std::size_t kmax) const
{
    // (k+1) p_{k+1} = (lambda theta + 2 q k) p_k - q^2 (k - 1) p_{k-1}, q = 1 - theta
    std::vector<double> p(kmax + 1, 0.0);
    double const q = 1.0 - theta_;
    p[0] = std::exp(-lambda_);
    if (kmax >= 1)
    {
        p[1] = lambda_ * theta_ * p[0];
    }
    for (std::size_t k = 1; k < kmax; ++k)
    {
        double const kd = static_cast<double>(k);
        double const next = ((lambda_ * theta_ + 2 * q * kd) * p[k] - q * q * (kd - 1) * p[k - 1])
                            / (kd + 1);
        p[k + 1] = std::max(next, 0.0);
    }
    return p;
}

double PolyaAeppli::pmf(long k) const
{
    if (k < 0)
    {
        throw DomainError("Polya-Aeppli pmf: negative count");
    }
    return pmf_table(static_cast<std::size_t>(k)).back();
}

std::vector<double> PolyaAeppli::pmf_until_mass(double tail_mass) const
{
    auto const m = moments();
    // Generous initial guess; grows if the mass is not yet reached.
    auto kmax = static_cast<std::size_t>(m.mean + 20 * std::sqrt(m.variance) + 20);
    for (;;)
    {
        auto table = pmf_table(kmax);
        double cumulative = 0;
        for (std::size_t k = 0; k < table.size(); ++k)
        {
            cumulative += table[k];
            if (cumulative >= 1.0 - tail_mass)
            {
                table.resize(k + 1);
                return table;
            }
        }
        kmax *= 2;
    }
}

PolyaAeppli::Moments PolyaAeppli::moments() const noexcept
{
    return {lambda_ / theta_, lambda_ * (2 - theta_) / (theta_ * theta_)};
}

std::vector<std::uint64_t> PolyaAeppli::sample(std::size_t n, std::uint64_t seed) const
{
    if (n == 0)
    {
        throw DomainError("Polya-Aeppli sample: n must be at least 1");
    }
    std::mt19937_64 engine(seed);
    std::poisson_distribution<std::uint64_t> clusters(lambda_);
    std::geometric_distribution<std::uint64_t> extra(theta_);
    std::vector<std::uint64_t> out(n);
    for (auto& value : out)
    {
        auto const count = clusters(engine);
        std::uint64_t total = 0;
        for (std::uint64_t c = 0; c < count; ++c)
        {
            total += 1 + (theta_ < 1 ? extra(engine) : 0);
        }
        value = total;
    }
    return out;
}

double polya_aeppli_pmf_direct(double lambda, double theta, long k)
{
    if (k < 0)
    {
        throw DomainError("Polya-Aeppli pmf: negative count");
    }
    if (k == 0)
    {
        return std::exp(-lambda);
    }
    double const kd = static_cast<double>(k);
    if (theta == 1)
    {
        return std::exp(-lambda + kd * std::log(lambda) - std::lgamma(kd + 1));
    }
    double const log_theta = std::log(theta);
    double const log_q = std::log1p(-theta);
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(k));
    for (long s = 1; s <= k; ++s)
    {
        double const sd = static_cast<double>(s);
        double const log_choose
            = std::lgamma(kd) - std::lgamma(sd) - std::lgamma(kd - sd + 1);
        logs.push_back(-lambda + sd * std::log(lambda) - std::lgamma(sd + 1) + log_choose
                       + sd * log_theta + (kd - sd) * log_q);
    }
    double const top = *std::max_element(logs.begin(), logs.end());
    double sum = 0;
    for (double v : logs)
    {
        sum += std::exp(v - top);
    }
    return std::exp(top + std::log(sum));
}

PolyaAeppliFit fit_moments(double sample_mean, double sample_variance)
{
    if (!(sample_mean > 0) || !std::isfinite(sample_mean))
    {
        throw FitError("Polya-Aeppli fit: sample mean must be positive");
    }
    if (!(sample_variance >= 0) || !std::isfinite(sample_variance))
    {
        throw FitError("Polya-Aeppli fit: invalid sample variance");
    }
    if (sample_variance < sample_mean)
    {
        return {PolyaAeppli(sample_mean, 1.0), true};
    }
    double const theta = 2 * sample_mean / (sample_mean + sample_variance);
    return {PolyaAeppli(sample_mean * theta, theta), false};
}
}  // namespace fishnet
