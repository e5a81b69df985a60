#include "fishnet/tail_predictor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <utility>

#include "fishnet/errors.hpp"

namespace fishnet
{
double gamma_default(std::size_t k, std::size_t n)
{
    if (k >= n)
    {
        throw DomainError("gamma_k needs k < N");
    }
    return static_cast<double>(n) / static_cast<double>(n - k);
}

GammaScaling GammaScaling::rational(std::size_t n, double c)
{
    if (n == 0 || !(c >= 0))
    {
        throw ConfigError("rational gamma needs N >= 1 and c >= 0");
    }
    auto const nd = static_cast<double>(n);
    return {[nd, c](std::size_t k) {
                double const denom = nd - c * static_cast<double>(k);
                if (!(denom > 0))
                {
                    throw DomainError("rational gamma undefined at this order");
                }
                return nd / denom;
            },
            "rational"};
}

GammaScaling GammaScaling::linear(double intercept, double slope)
{
    return {[intercept, slope](std::size_t k) { return intercept + slope * static_cast<double>(k); },
            "linear"};
}

GammaScaling GammaScaling::constant(double value)
{
    return {[value](std::size_t) { return value; }, "constant"};
}

//---------------------------------------------------------------------------//

TailModel::TailModel(OrderStatBasis basis,
                     PolyaAeppli weights,
                     GammaScaling gamma,
                     TailModelParams params)
    : basis_(std::move(basis)), weights_(std::move(weights)), params_(params)
{
    if (params.k0 < 1)
    {
        throw ConfigError("truncation order k0 must be at least 1");
    }
    if (params.delta_k > params.k0)
    {
        throw ConfigError("shift dk must not exceed the truncation order k0");
    }
    if (!(params.tail_mass > 0 && params.tail_mass < 1))
    {
        throw ConfigError("tail mass must lie in (0, 1)");
    }

    // Extend the table until the dropped tail is negligible relative to the
    // mass kept at k >= k0 (which can itself be tiny when lambda is small).
    auto kmax = std::max(weights_.pmf_until_mass(params.tail_mass).size(), params.k0 + 8);
    std::vector<double> pmf;
    double kept = 0;
    for (;;)
    {
        pmf = weights_.pmf_table(kmax);
        kept = std::accumulate(pmf.begin() + static_cast<std::ptrdiff_t>(params.k0), pmf.end(), 0.0);
        if (!(kept > 0))
        {
            throw ConfigError("no Polya-Aeppli mass at or beyond k0");
        }
        if (pmf[kmax] <= 1e-2 * params.tail_mass * kept && pmf[kmax] <= pmf[kmax - 1])
        {
            break;
        }
        kmax *= 2;
    }

    auto const last_order = basis_.n() - 1;
    for (std::size_t k = params.k0; k < pmf.size(); ++k)
    {
        auto const order = std::min(k - params.delta_k, last_order);
        double const w = pmf[k] / kept;
        if (!terms_.empty() && terms_.back().order == order)
        {
            terms_.back().weight += w;
            continue;
        }
        double const g = gamma(order);
        if (!(g > 0) || !std::isfinite(g))
        {
            throw ConfigError("gamma must be positive and finite on every used order");
        }
        terms_.push_back({order, g, w});
    }
}

double TailModel::failure_probability(double x) const
{
    if (!(x >= 0))
    {
        throw DomainError("failure probability needs x >= 0");
    }
    double total = 0;
    for (auto const& term : terms_)
    {
        total += term.weight * basis_.wk(term.gamma * x, term.order);
    }
    return std::clamp(total, 0.0, 1.0);
}

TailModel::Strength TailModel::strength_at_probability(double p) const
{
    if (!(p > 0 && p < 1))
    {
        throw DomainError("strength_at_probability needs 0 < p < 1");
    }
    double lo = 1e-9;
    if (failure_probability(lo) >= p)
    {
        return {lo, true};
    }
    double hi = 1.0;
    while (failure_probability(hi) < p)
    {
        lo = hi;
        hi *= 2;
        if (hi > 1e6)
        {
            throw DomainError("strength_at_probability: probability not reached");
        }
    }
    while (hi - lo > 1e-7)
    {
        double const mid = 0.5 * (lo + hi);
        (failure_probability(mid) < p ? lo : hi) = mid;
    }
    return {0.5 * (lo + hi), false};
}

std::optional<CalibratedOrders> calibrated_orders(double kt_ratio)
{
    constexpr std::array<std::pair<double, CalibratedOrders>, 4> table{{
        {0.1, {5, 0}},
        {0.2, {5, 2}},
        {0.3, {5, 3}},
        {0.5, {5, 3}},
    }};
    for (auto const& [ratio, entry] : table)
    {
        if (std::abs(std::abs(kt_ratio) - ratio) <= 1e-9)
        {
            return entry;
        }
    }
    return std::nullopt;
}
}  // namespace fishnet
