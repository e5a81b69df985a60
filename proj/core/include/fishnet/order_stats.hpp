#pragma once

#include <cstddef>
#include <utility>

#include "fishnet/strength_model.hpp"

namespace fishnet
{
/*!
 * CDFs of the order statistics of N i.i.d. link strengths.
 *
 * Order k is 0-based: wk(x, 0) is the CDF of the minimum and wk(x, k) the CDF
 * of the (k+1)-th smallest value. Uses the Poisson form
 * W_k = 1 - (1 - W_0) sum_{s<=k} t^s / s!, t = -ln(1 - W_0), with
 * 1 - W_0 = (1 - P1)^N exactly (no asymptotic normalization).
 */
class OrderStatBasis
{
  public:
    OrderStatBasis(StrengthDistribution parent, std::size_t n);

    [[nodiscard]] StrengthDistribution const& parent() const noexcept { return parent_; }
    [[nodiscard]] std::size_t n() const noexcept { return n_; }

    //! t(x) = -N ln(1 - P1(x)); +inf once P1 reaches 1.
    [[nodiscard]] double exceedance_mean(double x) const;

    //! 1 - (1 - P1(x))^N, in log space.
    [[nodiscard]] double w0(double x) const;
    //! Throws DomainError for k >= N or x < 0.
    [[nodiscard]] double wk(double x, std::size_t k) const;

  private:
    StrengthDistribution parent_;
    std::size_t n_;
};

/*!
 * Probability that a Poisson(t) count exceeds k, i.e. 1 - e^-t sum_{s<=k} t^s/s!.
 *
 * Sums whichever tail is smaller in log-scaled form so that results down to
 * the underflow limit keep full relative precision.
 */
[[nodiscard]] double poisson_exceedance(double t, std::size_t k);

//! (ln x, ln(-ln(1 - p))); throws DomainError unless 0 < p < 1 and x > 0.
[[nodiscard]] std::pair<double, double> weibull_scale(double p, double x);
}  // namespace fishnet
