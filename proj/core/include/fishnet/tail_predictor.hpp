#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fishnet/order_stats.hpp"
#include "fishnet/polya_aeppli.hpp"

namespace fishnet
{
//! N / (N - k), the default stress-to-order-statistic factor. k < N.
[[nodiscard]] double gamma_default(std::size_t k, std::size_t n);

/*!
 * Factor gamma_k converting the k-th order statistic into nominal stress
 * (sigma_N ~ s_(k) / gamma_k). k is 0-based like OrderStatBasis.
 */
class GammaScaling
{
  public:
    //! N / (N - c k); c = 1 is the default.
    [[nodiscard]] static GammaScaling rational(std::size_t n, double c = 1.0);
    //! intercept + slope k
    [[nodiscard]] static GammaScaling linear(double intercept, double slope);
    [[nodiscard]] static GammaScaling constant(double value = 1.0);

    [[nodiscard]] double operator()(std::size_t k) const { return fn_(k); }
    [[nodiscard]] std::string const& description() const noexcept { return description_; }

  private:
    GammaScaling(std::function<double(std::size_t)> fn, std::string description)
        : fn_(std::move(fn)), description_(std::move(description))
    {
    }

    std::function<double(std::size_t)> fn_;
    std::string description_;
};

struct TailModelParams
{
    std::size_t k0{5};        //!< truncation order, >= 1
    std::size_t delta_k{0};   //!< index shift, <= k0
    double tail_mass{1e-10};  //!< Polya-Aeppli mass dropped beyond the last term
};

/*!
 * Failure probability as a Polya-Aeppli mixture of order-statistic CDFs:
 * P_f(x) = sum_{k>=k0} p^_k W_{k - dk}(gamma_{k - dk} x),
 * with p^ the weights renormalized over k >= k0. Terms past order N - 1 fold
 * into the last defined order.
 */
class TailModel
{
  public:
    //! Throws ConfigError when delta_k > k0 or k0 == 0.
    TailModel(OrderStatBasis basis, PolyaAeppli weights, GammaScaling gamma, TailModelParams params);

    [[nodiscard]] double failure_probability(double x) const;

    struct Strength
    {
        double x;
        bool at_floor;  //!< p was below the smallest representable P_f
    };
    //! Bisection inverse of failure_probability to 1e-6 MPa.
    [[nodiscard]] Strength strength_at_probability(double p) const;

    [[nodiscard]] OrderStatBasis const& basis() const noexcept { return basis_; }
    [[nodiscard]] PolyaAeppli const& weights() const noexcept { return weights_; }
    [[nodiscard]] TailModelParams const& params() const noexcept { return params_; }

    struct Term
    {
        std::size_t order;  //!< W index k - dk
        double gamma;
        double weight;      //!< renormalized
    };
    [[nodiscard]] std::vector<Term> const& terms() const noexcept { return terms_; }

  private:
    OrderStatBasis basis_;
    PolyaAeppli weights_;
    TailModelParams params_;
    std::vector<Term> terms_;
};

struct CalibratedOrders
{
    std::size_t k0;
    std::size_t delta_k;
};

//! Calibrated (k0, dk) for |Kt/K0| in {0.1, 0.2, 0.3, 0.5}; nullopt otherwise.
[[nodiscard]] std::optional<CalibratedOrders> calibrated_orders(double kt_ratio);
}  // namespace fishnet
