#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fishnet
{
/*!
 * Geometric-Poisson (Polya-Aeppli) law: a Poisson(lambda) number of clusters,
 * each of Geometric(theta) size on {1, 2, ...}.
 */
class PolyaAeppli
{
  public:
    //! Throws ConfigError unless lambda > 0 and 0 < theta <= 1.
    PolyaAeppli(double lambda, double theta);

    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] double theta() const noexcept { return theta_; }

    //! P(N = k) via the three-term recurrence in k.
    [[nodiscard]] double pmf(long k) const;
    //! p_0 .. p_{kmax}
    [[nodiscard]] std::vector<double> pmf_table(std::size_t kmax) const;
    //! p_0 .. p_K with K the first index whose cumulative mass >= 1 - tail_mass.
    [[nodiscard]] std::vector<double> pmf_until_mass(double tail_mass) const;

    struct Moments
    {
        double mean;
        double variance;
    };
    [[nodiscard]] Moments moments() const noexcept;

    [[nodiscard]] std::vector<std::uint64_t> sample(std::size_t n, std::uint64_t seed) const;

  private:
    double lambda_;
    double theta_;
};

//! Direct log-space summation of the pmf; independent of the recurrence.
[[nodiscard]] double polya_aeppli_pmf_direct(double lambda, double theta, long k);

struct PolyaAeppliFit
{
    PolyaAeppli distribution;
    //! Sample variance was below the mean; theta clamped to 1.
    bool clamped;
};

/*!
 * Inverts mean = lambda/theta, variance = lambda (2 - theta)/theta^2.
 * Under-dispersed samples clamp to the Poisson boundary (theta = 1).
 * Throws FitError for a non-positive mean.
 */
[[nodiscard]] PolyaAeppliFit fit_moments(double sample_mean, double sample_variance);
}  // namespace fishnet
