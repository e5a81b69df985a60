#include "fishnet/order_stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fishnet/errors.hpp"

namespace fishnet
{
OrderStatBasis::OrderStatBasis(StrengthDistribution parent, std::size_t n)
    : parent_(std::move(parent)), n_(n)
{
    if (n == 0)
    {
        throw ConfigError("order statistics need N >= 1");
    }
}

double OrderStatBasis::exceedance_mean(double x) const
{
    double const survival = parent_.survival(x);
    if (survival <= 0)
    {
        return std::numeric_limits<double>::infinity();
    }
    if (survival >= 1)
    {
        return 0.0;
    }
    // log1p(-P1) is more accurate than log(survival) in the lower tail.
    double const p1 = parent_.cdf(x);
    double const log_survival = p1 < 0.5 ? std::log1p(-p1) : std::log(survival);
    return -static_cast<double>(n_) * log_survival;
}

double OrderStatBasis::w0(double x) const
{
    double const t = exceedance_mean(x);
    return std::isinf(t) ? 1.0 : -std::expm1(-t);
}

double OrderStatBasis::wk(double x, std::size_t k) const
{
    if (k >= n_)
    {
        throw DomainError("order " + std::to_string(k) + " out of range for N = "
                          + std::to_string(n_));
    }
    return poisson_exceedance(exceedance_mean(x), k);
}

double poisson_exceedance(double t, std::size_t k)
{
    if (!(t >= 0))
    {
        throw DomainError("poisson_exceedance: negative mean");
    }
    if (t == 0)
    {
        return 0.0;
    }
    if (std::isinf(t))
    {
        return 1.0;
    }
    if (k == 0)
    {
        return -std::expm1(-t);
    }
    double const kk = static_cast<double>(k);
    if (t < kk + 1)
    {
        // Upper tail: sum_{s>k} e^-t t^s / s!, terms relative to s = k + 1.
        double const log_first = -t + (kk + 1) * std::log(t) - std::lgamma(kk + 2);
        double sum = 1.0;
        double term = 1.0;
        for (double s = kk + 2;; s += 1)
        {
            term *= t / s;
            sum += term;
            if (term < 1e-17 * sum)
            {
                break;
            }
        }
        return std::min(1.0, std::exp(log_first + std::log(sum)));
    }
    // Lower tail: 1 - sum_{s<=k} e^-t t^s / s!, summed downward from s = k.
    double const log_last = -t + kk * std::log(t) - std::lgamma(kk + 1);
    double sum = 1.0;
    double term = 1.0;
    for (double s = kk; s >= 1; s -= 1)
    {
        term *= s / t;
        sum += term;
        if (term < 1e-17 * sum)
        {
            break;
        }
    }
    return std::max(0.0, 1.0 - std::exp(log_last + std::log(sum)));
}

std::pair<double, double> weibull_scale(double p, double x)
{
    if (!(p > 0 && p < 1))
    {
        throw DomainError("Weibull transform needs 0 < p < 1");
    }
    if (!(x > 0))
    {
        throw DomainError("Weibull transform needs x > 0");
    }
    return {std::log(x), std::log(-std::log1p(-p))};
}
}  // namespace fishnet
