#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fishnet/fishnet_mesh.hpp"
#include "fishnet/sla_solver.hpp"
#include "fishnet/strength_model.hpp"
#include "fishnet/tail_predictor.hpp"

namespace fishnet
{
struct EnsembleConfig
{
    MeshGeometry mesh{};
    StrengthParams strength{};
    double kt_ratio{0.1};
    int jumps{20};
    std::uint64_t replicas{1000};
    std::uint64_t master_seed{20170101};
    //! Replica indices run over [first_replica, first_replica + replicas).
    std::uint64_t first_replica{0};
    double termination_fraction{0.05};
    unsigned threads{1};
    FactorizationPolicy policy{FactorizationPolicy::rank_one_reuse};
};

//! Per-replica simulation settings implied by \c config.
[[nodiscard]] SimulationConfig simulation_config(EnsembleConfig const& config);

[[nodiscard]] nlohmann::json to_json(EnsembleConfig const& config);
//! Missing keys keep their defaults.
[[nodiscard]] EnsembleConfig ensemble_config_from_json(nlohmann::json const& j);

struct ReplicaOutcome
{
    std::uint64_t replica{0};
    bool ok{false};
    std::string error;
    double sigma_max{0};
    std::uint32_t n_c{0};
    std::uint64_t events{0};
    double first_sigma_n{0};
    double min_strength{0};
    bool peak_localized{false};
    StopReason stop{StopReason::separation};
    std::vector<double> ratio_trace;
};

struct SampleSummary
{
    double mean{0};
    double sd{0};  //!< unbiased (n - 1) standard deviation
};

struct EcdfPoint
{
    double x;
    double p;
    double weibull_x;
    double weibull_y;
};

struct RatioPoint
{
    std::size_t k;
    double mean;
    std::uint64_t replicas;
};

struct Throughput
{
    std::uint64_t events{0};
    std::uint64_t solves{0};
    std::uint64_t factorizations{0};
    std::uint64_t rank_one_updates{0};
    double seconds{0};

    [[nodiscard]] double events_per_second() const { return seconds > 0 ? events / seconds : 0; }
    [[nodiscard]] double solves_per_second() const { return seconds > 0 ? solves / seconds : 0; }
};

struct EnsembleResult
{
    EnsembleConfig config;
    std::vector<ReplicaOutcome> replicas;  //!< in replica order
    std::vector<std::uint64_t> failures;   //!< replica indices that errored
    SampleSummary sigma_max;
    SampleSummary n_c;
    std::vector<EcdfPoint> ecdf;
    std::vector<std::uint64_t> nc_histogram;  //!< index = N_c
    std::vector<RatioPoint> mean_ratio;
    Throughput throughput;  //!< timing; not part of the deterministic output

    [[nodiscard]] std::vector<double> sigma_max_values() const;
    [[nodiscard]] std::vector<double> n_c_values() const;
};

/*!
 * Runs independent replicas on \c config.threads workers.
 *
 * Replica i uses strengths sampled with replica_seed(master_seed, i), so its
 * outcome does not depend on the worker count or schedule. Aggregation runs
 * serially in replica order after all workers finish. Failed replicas are
 * listed in \c failures and left out of every statistic.
 */
[[nodiscard]] EnsembleResult run_ensemble(EnsembleConfig const& config);

//! Midpoint plotting positions (i - 0.5)/n on sorted values; needs >= 2 values.
[[nodiscard]] std::vector<EcdfPoint> empirical_cdf(std::span<double const> values);

[[nodiscard]] SampleSummary summarize(std::span<double const> values);

//! Sample median (mean of the two middle values for even n); throws on empty input.
[[nodiscard]] double median(std::span<double const> values);

struct ModelComparisonPoint
{
    double x;
    double p_empirical;
    double p_model;
    double weibull_x;
    double weibull_y_empirical;
    double weibull_y_model;  //!< NaN where the model probability is 0 or 1
};

//! Model failure probability at every empirical point.
[[nodiscard]] std::vector<ModelComparisonPoint> compare_with_model(std::span<EcdfPoint const> ecdf,
                                                                   TailModel const& model);

/*!
 * Largest |weibull_y_model - weibull_y_empirical| over points with
 * p_empirical in [p_lo, p_hi]. Infinite if the model saturates at 0 or 1 there.
 */
[[nodiscard]] double max_weibull_gap(std::span<ModelComparisonPoint const> points,
                                     double p_lo,
                                     double p_hi);

struct GammaEstimate
{
    std::vector<double> mean;          //!< index k
    std::vector<std::uint64_t> count;  //!< replicas contributing at k
    std::size_t n{0};
    double rational_c{1};  //!< best N / (N - c k)
    double rational_ssr{0};
    double linear_intercept{1};
    double linear_slope{0};
    double linear_ssr{0};

    [[nodiscard]] GammaScaling rational() const { return GammaScaling::rational(n, rational_c); }
    [[nodiscard]] GammaScaling linear() const
    {
        return GammaScaling::linear(linear_intercept, linear_slope);
    }
};

/*!
 * Pointwise mean of s_(k)/sigma_N over the first \c max_replicas successful
 * replicas (0 = all), with count-weighted least-squares fits of the
 * rational and linear forms. Throws FitError with fewer than 10 traces.
 */
[[nodiscard]] GammaEstimate estimate_gamma(EnsembleResult const& result,
                                           std::size_t max_replicas = 32);

//! Writes sigma_max.csv, nc_hist.csv, ratio_trace.csv and ecdf_weibull.csv.
void write_campaign_outputs(EnsembleResult const& result, std::filesystem::path const& directory);
}  // namespace fishnet
