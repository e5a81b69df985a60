#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fishnet
{
/*!
 * Constants of the piecewise link-strength CDF.
 *
 * Below \c crossover the CDF is a scaled Weibull tail,
 * a (1 - exp(-(x/s)^m)); above it a Gaussian core
 * c0 - c1 erf(g (mu - x)). Stresses are in MPa.
 */
struct StrengthParams
{
    double weibull_amplitude{2.55};
    double weibull_scale{12.0};
    double weibull_exponent{10.0};
    double crossover{8.6};
    double gauss_offset{0.526};
    double gauss_amplitude{0.474};
    double gauss_slope{0.884};
    double gauss_center{10.0};
};

/*!
 * Parent distribution P1 of link strength.
 *
 * The two branches do not meet exactly at the crossover (the default
 * constants leave a jump of about 4.3e-4). The CDF keeps that jump; the
 * inverse maps probabilities falling inside it to the crossover abscissa.
 * Immutable and safe to share across threads.
 */
class StrengthDistribution
{
  public:
    StrengthDistribution() = default;
    explicit StrengthDistribution(StrengthParams const& params);

    [[nodiscard]] StrengthParams const& params() const noexcept { return params_; }

    //! P1(x), clamped to [0, 1]. Throws DomainError for x < 0.
    [[nodiscard]] double cdf(double x) const;
    //! 1 - P1(x), evaluated without cancellation on the upper branch.
    [[nodiscard]] double survival(double x) const;

    //! Unclamped branch values; used for the crossover consistency check.
    [[nodiscard]] double lower_branch(double x) const;
    [[nodiscard]] double upper_branch(double x) const;

    //! Bisection inverse with |cdf(x) - p| <= 1e-10 max(1, p); p in [0, 1).
    [[nodiscard]] double inverse_cdf(double p) const;

    //! n i.i.d. strengths; element i depends only on (seed, i).
    [[nodiscard]] std::vector<double> sample(std::size_t n, std::uint64_t seed) const;
    void sample_into(std::span<double> out, std::uint64_t seed) const;

  private:
    StrengthParams params_{};
};

//! Free-function form of StrengthDistribution::sample for the default law.
[[nodiscard]] std::vector<double> sample_strengths(std::size_t n, std::uint64_t seed);
}  // namespace fishnet
