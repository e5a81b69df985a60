#include <vector>

#include <benchmark/benchmark.h>

#include "fishnet/banded_ldlt.hpp"
#include "fishnet/counter_rng.hpp"
#include "fishnet/fishnet_mesh.hpp"
#include "fishnet/sla_solver.hpp"
#include "fishnet/strength_model.hpp"

namespace
{
fishnet::MeshGeometry square(benchmark::State const& state)
{
    fishnet::MeshGeometry g;
    g.rows = g.gaps = static_cast<int>(state.range(0));
    return g;
}

void BM_Factorize(benchmark::State& state)
{
    auto const topology = fishnet::build_topology(square(state));
    std::vector<double> k(topology.link_count(), 100.0);
    auto const system = fishnet::assemble_stiffness(topology, k);
    fishnet::BandedLdlt ldlt;
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(ldlt.factorize(system.matrix));
    }
}
BENCHMARK(BM_Factorize)->Arg(8)->Arg(16)->Arg(32);

// One spring softening followed by a solve: the per-event solver cost.
void BM_SoftenAndSolve(benchmark::State& state, fishnet::FactorizationPolicy policy)
{
    auto const topology = fishnet::build_topology(square(state));
    std::vector<double> k(topology.link_count(), 100.0);
    auto const system = fishnet::assemble_stiffness(topology, k);
    fishnet::IncrementalSolver solver(system.matrix, policy);
    std::vector<double> x(system.rhs.size());
    auto const links = topology.links();
    std::size_t next = 0;
    for (auto _ : state)
    {
        auto const& link = links[next];
        next = (next + 97) % links.size();
        solver.modify_spring(topology.dof(link.a), topology.dof(link.b), -1e-3);
        solver.solve(system.rhs, x);
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK_CAPTURE(BM_SoftenAndSolve, rank_one, fishnet::FactorizationPolicy::rank_one_reuse)
    ->Arg(8)->Arg(16)->Arg(32);
BENCHMARK_CAPTURE(BM_SoftenAndSolve, refactor, fishnet::FactorizationPolicy::always_refactor)
    ->Arg(8)->Arg(16)->Arg(32);

void BM_Replica(benchmark::State& state, fishnet::FactorizationPolicy policy)
{
    auto const topology = fishnet::build_topology(square(state));
    fishnet::SimulationConfig config;
    config.policy = policy;
    config.keep_events = false;
    std::uint64_t replica = 0;
    std::uint64_t events = 0;
    for (auto _ : state)
    {
        auto const s = fishnet::sample_strengths(topology.link_count(), fishnet::replica_seed(1, replica++));
        events += fishnet::run_simulation(topology, s, config).event_count;
    }
    state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK_CAPTURE(BM_Replica, rank_one, fishnet::FactorizationPolicy::rank_one_reuse)
    ->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Replica, refactor, fishnet::FactorizationPolicy::always_refactor)
    ->Arg(16)->Unit(benchmark::kMillisecond);
}  // namespace

BENCHMARK_MAIN();
