#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fishnet/banded_ldlt.hpp"
#include "fishnet/errors.hpp"
#include "fishnet/fishnet_mesh.hpp"

namespace fishnet
{
struct SimulationConfig
{
    double kt_ratio{0.1};  //!< |Kt / K0|
    int jumps{20};         //!< J
    //! Stop once sigma_N < fraction * sigma_max after the peak.
    double termination_fraction{0.05};
    FactorizationPolicy policy{FactorizationPolicy::rank_one_reuse};
    std::size_t refactor_interval{64};
    bool keep_events{true};
    //! Compare every solve against a fresh factorization (slow; diagnostics).
    bool cross_check{false};
};

struct Event
{
    std::uint32_t index;
    std::uint32_t k;  //!< distinct links damaged before this event
    double sigma_n;   //!< MPa
    std::uint32_t link;
    bool localized;   //!< the link had already jumped at least once
};

enum class StopReason : std::uint8_t
{
    separation,
    load_drop,
    budget,
};

[[nodiscard]] char const* stop_reason_name(StopReason stop);

struct SimulationRecord
{
    std::vector<Event> events;  //!< empty unless keep_events
    double sigma_max{0};
    double first_sigma_n{0};
    //! Distinct damaged links before the first event attaining sigma_max.
    std::uint32_t n_c{0};
    std::uint32_t peak_event{0};
    bool peak_localized{false};
    //! ratio_trace[k] = s_(k) / max{sigma_N : events with k}, k = 0..n_c,
    //! where s_(k) is the (k+1)-th smallest strength.
    std::vector<double> ratio_trace;
    std::uint64_t event_count{0};
    StopReason stop{StopReason::separation};
    SolverCounters counters{};
    double max_cross_check_error{0};
};

//! Event budget N J exhausted; carries the partial record.
class BudgetExhausted : public Error
{
  public:
    explicit BudgetExhausted(SimulationRecord partial);
    [[nodiscard]] SimulationRecord const& partial() const noexcept { return partial_; }

  private:
    SimulationRecord partial_;
};

struct CriticalEvent
{
    double load_factor;  //!< end displacement at which the link reaches its residual strength
    std::uint32_t link;
};

/*!
 * Next link to soften under the current damage state.
 *
 * Solves the unit end displacement problem from scratch and returns the
 * smallest ratio of residual strength to unit-load stress; ties go to the
 * lowest link id. Throws SingularSystem on separation and DegenerateLoad
 * when no link is in tension.
 */
[[nodiscard]] CriticalEvent critical_event(FishnetTopology const& topology,
                                           std::span<LinkState const> states);

/*!
 * Event-driven simulation of one specimen.
 *
 * Each event reloads the net from zero with the current secant stiffnesses,
 * scales the load until exactly one link reaches its residual strength, and
 * applies one jump to that link. The number of jumps is the control variable.
 */
[[nodiscard]] SimulationRecord run_simulation(FishnetTopology const& topology,
                                              std::span<double const> strengths,
                                              SimulationConfig const& config);

//! Jump counts after events [0, event_index] have been applied.
[[nodiscard]] std::vector<int> damage_at_event(SimulationRecord const& record,
                                               std::size_t link_count,
                                               std::size_t event_index);

//! Representative events: prepeak (A), peak (B), two postpeak stages (C, D).
struct StageEvents
{
    std::uint32_t prepeak;
    std::uint32_t peak;
    std::uint32_t postpeak;
    std::uint32_t last;
};
[[nodiscard]] StageEvents stage_events(SimulationRecord const& record);
}  // namespace fishnet
