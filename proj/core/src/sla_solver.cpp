#include "fishnet/sla_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace fishnet
{
BudgetExhausted::BudgetExhausted(SimulationRecord partial)
    : Error("event budget exhausted before the specimen failed")
    , partial_(std::move(partial))
{
}

namespace
{
struct Argmin
{
    double ratio{std::numeric_limits<double>::infinity()};
    std::uint32_t link{0};
    bool found{false};
};

// Smallest residual/stress ratio over links in tension; lowest id wins ties.
// Ratios within tie_tolerance (relative) count as tied so that rounding noise
// in a uniform field cannot decide the order.
constexpr double tie_tolerance = 1e-12;

[[nodiscard]] Argmin find_critical(FishnetTopology const& topology,
                                   std::span<double const> stiffness,
                                   std::span<double const> residual,
                                   std::span<double const> u)
{
    Argmin best;
    auto const links = topology.links();
    double const inv_area = 1.0 / topology.geometry().area;
    for (std::size_t l = 0; l < links.size(); ++l)
    {
        double const k = stiffness[l];
        if (k <= 0)
        {
            continue;
        }
        double const stress = k * (u[links[l].b] - u[links[l].a]) * inv_area;
        if (stress <= 0)
        {
            continue;
        }
        double const ratio = residual[l] / stress;
        if (ratio < best.ratio * (1 - tie_tolerance))
        {
            best.ratio = ratio;
            best.link = static_cast<std::uint32_t>(l);
            best.found = true;
        }
    }
    return best;
}

double max_relative_difference(std::span<double const> a, std::span<double const> b)
{
    double diff = 0;
    double scale = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return scale > 0 ? diff / scale : diff;
}
}  // namespace

char const* stop_reason_name(StopReason stop)
{
    switch (stop)
    {
        case StopReason::separation: return "separation";
        case StopReason::load_drop: return "load_drop";
        case StopReason::budget: return "budget";
    }
    return "unknown";
}

CriticalEvent critical_event(FishnetTopology const& topology, std::span<LinkState const> states)
{
    auto const system = assemble_stiffness(topology, states);
    auto const x = solve_linear(system.matrix, system.rhs);
    auto const u = expand_displacements(topology, x, 1.0);

    std::vector<double> stiffness(states.size());
    std::vector<double> residual(states.size());
    for (std::size_t l = 0; l < states.size(); ++l)
    {
        stiffness[l] = secant_stiffness(states[l]);
        residual[l] = residual_strength(states[l]);
    }
    auto const best = find_critical(topology, stiffness, residual, u);
    if (!best.found)
    {
        throw DegenerateLoad("no link is in tension under the end displacement");
    }
    return {best.ratio, best.link};
}

SimulationRecord run_simulation(FishnetTopology const& topology,
                                std::span<double const> strengths,
                                SimulationConfig const& config)
{
    auto const n_links = topology.link_count();
    if (strengths.size() != n_links)
    {
        throw DomainError("run_simulation: one strength per link required");
    }
    if (!(config.kt_ratio > 0))
    {
        throw ConfigError("softening slope ratio |Kt/K0| must be positive");
    }
    if (!(config.termination_fraction >= 0 && config.termination_fraction < 1))
    {
        throw ConfigError("termination fraction must lie in [0, 1)");
    }
    LinearSoftening const law(topology.k0(), -config.kt_ratio * topology.k0(), config.jumps);
    auto const total_jumps = config.jumps;

    std::vector<double> secant(static_cast<std::size_t>(total_jumps) + 1);
    std::vector<double> fraction(secant.size());
    for (int j = 0; j <= total_jumps; ++j)
    {
        secant[static_cast<std::size_t>(j)] = law.secant_stiffness(j);
        fraction[static_cast<std::size_t>(j)] = law.residual_fraction(j);
    }

    std::vector<int> jumps(n_links, 0);
    std::vector<double> stiffness(n_links, secant[0]);
    std::vector<double> residual(strengths.begin(), strengths.end());

    std::vector<double> sorted(strengths.begin(), strengths.end());
    std::sort(sorted.begin(), sorted.end());

    auto system = assemble_stiffness(topology, stiffness);
    auto rhs = std::move(system.rhs);
    auto grounded = std::move(system.grounded);
    IncrementalSolver solver(std::move(system.matrix), config.policy, config.refactor_interval);

    // Node displacements; free dofs are the contiguous block [rows, rows + dofs).
    auto const rows = topology.rows();
    auto const n_dofs = topology.dof_count();
    std::vector<double> u(topology.node_count(), 0.0);
    std::fill(u.end() - static_cast<std::ptrdiff_t>(rows), u.end(), 1.0);
    std::span<double> x(u.data() + rows, n_dofs);
    std::vector<double> fresh;

    auto const last_gap = topology.links_in_gap(topology.gaps() - 1);
    auto const last_offset = (topology.gaps() - 1) * topology.links_per_gap();
    double const section = static_cast<double>(topology.links_per_gap()) * topology.geometry().area;

    SimulationRecord record;
    std::vector<double> max_sigma_by_k;
    std::uint32_t distinct = 0;
    std::uint64_t const budget = static_cast<std::uint64_t>(n_links) * total_jumps;
    bool finished = false;

    auto finalize = [&] {
        record.counters = solver.counters();
        record.ratio_trace.resize(record.n_c + 1);
        for (std::size_t k = 0; k <= record.n_c && k < max_sigma_by_k.size(); ++k)
        {
            record.ratio_trace[k] = sorted[k] / max_sigma_by_k[k];
        }
    };

    while (!finished)
    {
        if (record.event_count >= budget)
        {
            record.stop = StopReason::budget;
            finalize();
            throw BudgetExhausted(std::move(record));
        }
        try
        {
            solver.solve(rhs, x);
        }
        catch (SingularSystem const&)
        {
            record.stop = StopReason::separation;
            break;
        }
        if (config.cross_check)
        {
            fresh = solve_linear(solver.matrix(), rhs);
            record.max_cross_check_error
                = std::max(record.max_cross_check_error, max_relative_difference(x, fresh));
        }

        auto const best = find_critical(topology, stiffness, residual, u);
        if (!best.found)
        {
            throw DegenerateLoad("no link is in tension under the end displacement");
        }

        double reaction = 0;
        for (std::size_t l = 0; l < last_gap.size(); ++l)
        {
            reaction += stiffness[last_offset + l] * (1.0 - u[last_gap[l].a]);
        }
        double const sigma_n = best.ratio * reaction / section;

        auto const link = best.link;
        bool const localized = jumps[link] > 0;
        auto const index = static_cast<std::uint32_t>(record.event_count);
        if (config.keep_events)
        {
            record.events.push_back({index, distinct, sigma_n, link, localized});
        }
        if (record.event_count == 0)
        {
            record.first_sigma_n = sigma_n;
        }
        if (sigma_n > record.sigma_max)
        {
            record.sigma_max = sigma_n;
            record.n_c = distinct;
            record.peak_event = index;
            record.peak_localized = localized;
        }
        if (max_sigma_by_k.size() <= distinct)
        {
            max_sigma_by_k.resize(distinct + 1, 0.0);
        }
        max_sigma_by_k[distinct] = std::max(max_sigma_by_k[distinct], sigma_n);
        ++record.event_count;
        if (!localized)
        {
            ++distinct;
        }

        // Apply the jump.
        int const j = ++jumps[link];
        double const k_old = stiffness[link];
        double const k_new = secant[static_cast<std::size_t>(j)];
        stiffness[link] = k_new;
        residual[link] = strengths[link] * fraction[static_cast<std::size_t>(j)];

        auto const& ln = topology.links()[link];
        auto const da = topology.dof(ln.a);
        auto const db = topology.dof(ln.b);
        double const delta = k_new - k_old;
        if (db < 0 && da >= 0)
        {
            rhs[static_cast<std::size_t>(da)] += delta;
        }

        bool reassembled = false;
        if (j == total_jumps)
        {
            auto const connectivity = analyze_connectivity(topology, stiffness);
            if (!connectivity.spans)
            {
                record.stop = StopReason::separation;
                finished = true;
            }
            else
            {
                bool grounding_changed = false;
                for (std::size_t d = 0; d < n_dofs; ++d)
                {
                    grounding_changed = grounding_changed
                                        || connectivity.floating[d + rows] != grounded[d];
                }
                if (grounding_changed)
                {
                    system = assemble_stiffness(topology, stiffness);
                    rhs = std::move(system.rhs);
                    grounded = std::move(system.grounded);
                    solver.reset(std::move(system.matrix));
                    reassembled = true;
                }
            }
        }
        if (!finished && !reassembled)
        {
            solver.modify_spring(da, db, delta);
        }

        if (!finished && sigma_n < config.termination_fraction * record.sigma_max)
        {
            record.stop = StopReason::load_drop;
            finished = true;
        }
    }
    finalize();
    return record;
}

std::vector<int> damage_at_event(SimulationRecord const& record,
                                 std::size_t link_count,
                                 std::size_t event_index)
{
    if (event_index >= record.events.size())
    {
        throw DomainError("damage_at_event: event index beyond the recorded log");
    }
    std::vector<int> jumps(link_count, 0);
    for (std::size_t e = 0; e <= event_index; ++e)
    {
        ++jumps[record.events[e].link];
    }
    return jumps;
}

StageEvents stage_events(SimulationRecord const& record)
{
    if (record.events.empty())
    {
        throw DomainError("stage_events: no events recorded");
    }
    StageEvents stages{};
    stages.peak = record.peak_event;
    stages.prepeak = record.peak_event / 2;
    stages.last = static_cast<std::uint32_t>(record.events.size() - 1);
    stages.postpeak = stages.last;
    for (auto e = record.peak_event; e < record.events.size(); ++e)
    {
        if (record.events[e].sigma_n <= 0.5 * record.sigma_max)
        {
            stages.postpeak = e;
            break;
        }
    }
    return stages;
}
}  // namespace fishnet
