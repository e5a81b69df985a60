#include "fishnet/fishnet_mesh.hpp"

#include <cmath>
#include <deque>
#include <string>

#include <nlohmann/json.hpp>

#include "fishnet/errors.hpp"

namespace fishnet
{
FishnetTopology FishnetTopology::build(MeshGeometry const& geometry)
{
    if (geometry.rows < 2 || geometry.gaps < 2)
    {
        throw ConfigError("fishnet needs at least 2 rows and 2 gaps (got "
                          + std::to_string(geometry.rows) + " x "
                          + std::to_string(geometry.gaps) + ")");
    }
    if (!(geometry.link_length > 0) || !(geometry.area > 0) || !(geometry.modulus > 0))
    {
        throw ConfigError("link length, area and modulus must be positive");
    }
    FishnetTopology topo;
    topo.geometry_ = geometry;
    auto const rows = topo.rows();
    topo.links_.reserve(2 * rows * topo.gaps());
    for (std::size_t g = 0; g < topo.gaps(); ++g)
    {
        for (std::size_t i = 0; i < rows; ++i)
        {
            auto const gap = static_cast<std::uint32_t>(g);
            topo.links_.push_back({topo.node_id(i, g), topo.node_id(i, g + 1), gap});
            topo.links_.push_back({topo.node_id(i, g), topo.node_id((i + 1) % rows, g + 1), gap});
        }
    }
    return topo;
}

NodeRole FishnetTopology::role(std::uint32_t node) const noexcept
{
    auto const column = column_of(node);
    if (column == 0)
    {
        return NodeRole::fixed;
    }
    return column == gaps() ? NodeRole::prescribed : NodeRole::free;
}

std::ptrdiff_t FishnetTopology::dof(std::uint32_t node) const noexcept
{
    if (role(node) != NodeRole::free)
    {
        return -1;
    }
    return static_cast<std::ptrdiff_t>(node) - static_cast<std::ptrdiff_t>(rows());
}

FishnetTopology build_topology(MeshGeometry const& geometry)
{
    return FishnetTopology::build(geometry);
}

//---------------------------------------------------------------------------//

LinearSoftening::LinearSoftening(double k0, double kt, int total_jumps)
    : k0_(k0), kt_(kt), total_jumps_(total_jumps)
{
    if (!(k0 > 0))
    {
        throw ConfigError("initial link stiffness must be positive");
    }
    if (!(kt < 0))
    {
        throw ConfigError("softening slope Kt must be negative");
    }
    if (total_jumps < 1)
    {
        throw ConfigError("number of softening jumps must be at least 1");
    }
}

void LinearSoftening::check(int jumps) const
{
    if (jumps < 0 || jumps > total_jumps_)
    {
        throw StateError("jump count " + std::to_string(jumps) + " outside [0, "
                         + std::to_string(total_jumps_) + "]");
    }
}

double LinearSoftening::residual_fraction(int jumps) const
{
    check(jumps);
    return static_cast<double>(total_jumps_ - jumps) / total_jumps_;
}

double LinearSoftening::secant_stiffness(int jumps) const
{
    check(jumps);
    double const abs_kt = -kt_;
    return (total_jumps_ - jumps) * k0_ * abs_kt / (total_jumps_ * abs_kt + jumps * k0_);
}

double residual_strength(LinkState const& state)
{
    if (state.total_jumps < 1 || state.jumps < 0 || state.jumps > state.total_jumps)
    {
        throw StateError("link state: jump count outside [0, J]");
    }
    return state.strength * (state.total_jumps - state.jumps) / state.total_jumps;
}

double secant_stiffness(LinkState const& state)
{
    return LinearSoftening(state.k0, state.kt, state.total_jumps).secant_stiffness(state.jumps);
}

//---------------------------------------------------------------------------//

Connectivity analyze_connectivity(FishnetTopology const& topology,
                                  std::span<double const> link_stiffness)
{
    auto const nodes = topology.node_count();
    std::vector<std::vector<std::uint32_t>> adjacency(nodes);
    auto const links = topology.links();
    for (std::size_t l = 0; l < links.size(); ++l)
    {
        if (link_stiffness[l] > 0)
        {
            adjacency[links[l].a].push_back(links[l].b);
            adjacency[links[l].b].push_back(links[l].a);
        }
    }

    // Flood from each end: bit 1 = reaches fixed end, bit 2 = prescribed end.
    std::vector<std::uint8_t> reach(nodes, 0);
    auto flood = [&](std::size_t column, std::uint8_t bit) {
        std::deque<std::uint32_t> queue;
        for (std::size_t i = 0; i < topology.rows(); ++i)
        {
            auto const n = topology.node_id(i, column);
            reach[n] |= bit;
            queue.push_back(n);
        }
        while (!queue.empty())
        {
            auto const n = queue.front();
            queue.pop_front();
            for (auto const m : adjacency[n])
            {
                if (!(reach[m] & bit))
                {
                    reach[m] |= bit;
                    queue.push_back(m);
                }
            }
        }
    };
    flood(0, 1);
    flood(topology.gaps(), 2);

    Connectivity result;
    result.floating.assign(nodes, 0);
    for (std::size_t n = 0; n < nodes; ++n)
    {
        result.spans = result.spans || reach[n] == 3;
        result.floating[n] = reach[n] == 0 ? 1 : 0;
    }
    return result;
}

ReducedSystem assemble_stiffness(FishnetTopology const& topology,
                                 std::span<double const> link_stiffness)
{
    if (link_stiffness.size() != topology.link_count())
    {
        throw DomainError("assemble_stiffness: one stiffness per link required");
    }
    auto const connectivity = analyze_connectivity(topology, link_stiffness);
    if (!connectivity.spans)
    {
        throw SingularSystem("specimen separated: no load path spans the net");
    }

    ReducedSystem system{BandedSymmetric(topology.dof_count(), topology.bandwidth()),
                         std::vector<double>(topology.dof_count(), 0.0),
                         std::vector<std::uint8_t>(topology.dof_count(), 0)};
    auto const links = topology.links();
    for (std::size_t l = 0; l < links.size(); ++l)
    {
        double const k = link_stiffness[l];
        if (k == 0)
        {
            continue;
        }
        auto const da = topology.dof(links[l].a);
        auto const db = topology.dof(links[l].b);
        if (da >= 0)
        {
            system.matrix.add(static_cast<std::size_t>(da), static_cast<std::size_t>(da), k);
        }
        if (db >= 0)
        {
            system.matrix.add(static_cast<std::size_t>(db), static_cast<std::size_t>(db), k);
        }
        if (da >= 0 && db >= 0)
        {
            system.matrix.add(static_cast<std::size_t>(da), static_cast<std::size_t>(db), -k);
        }
        else if (da >= 0 && topology.role(links[l].b) == NodeRole::prescribed)
        {
            system.rhs[static_cast<std::size_t>(da)] += k;
        }
    }
    for (std::uint32_t n = 0; n < topology.node_count(); ++n)
    {
        auto const d = topology.dof(n);
        if (d >= 0 && connectivity.floating[n])
        {
            system.matrix.add(static_cast<std::size_t>(d), static_cast<std::size_t>(d), 1.0);
            system.grounded[static_cast<std::size_t>(d)] = 1;
        }
    }
    return system;
}

ReducedSystem assemble_stiffness(FishnetTopology const& topology,
                                 std::span<LinkState const> states)
{
    if (states.size() != topology.link_count())
    {
        throw DomainError("assemble_stiffness: one state per link required");
    }
    std::vector<double> stiffness(states.size());
    for (std::size_t l = 0; l < states.size(); ++l)
    {
        stiffness[l] = secant_stiffness(states[l]);
    }
    return assemble_stiffness(topology, stiffness);
}

std::vector<double> expand_displacements(FishnetTopology const& topology,
                                         std::span<double const> dofs,
                                         double end_displacement)
{
    std::vector<double> u(topology.node_count(), 0.0);
    for (std::uint32_t n = 0; n < topology.node_count(); ++n)
    {
        switch (topology.role(n))
        {
            case NodeRole::fixed: break;
            case NodeRole::prescribed: u[n] = end_displacement; break;
            case NodeRole::free: u[n] = dofs[static_cast<std::size_t>(topology.dof(n))]; break;
        }
    }
    return u;
}

std::vector<double> link_stresses(FishnetTopology const& topology,
                                  std::span<double const> link_stiffness,
                                  std::span<double const> node_displacements)
{
    auto const links = topology.links();
    double const area = topology.geometry().area;
    std::vector<double> stress(links.size());
    for (std::size_t l = 0; l < links.size(); ++l)
    {
        stress[l] = link_stiffness[l]
                    * (node_displacements[links[l].b] - node_displacements[links[l].a]) / area;
    }
    return stress;
}

double nominal_stress(FishnetTopology const& topology,
                      std::span<double const> link_stiffness,
                      std::span<double const> node_displacements)
{
    auto const last = topology.gaps() - 1;
    auto const links = topology.links_in_gap(last);
    auto const offset = last * topology.links_per_gap();
    double reaction = 0;
    for (std::size_t l = 0; l < links.size(); ++l)
    {
        reaction += link_stiffness[offset + l]
                    * (node_displacements[links[l].b] - node_displacements[links[l].a]);
    }
    return reaction / (static_cast<double>(topology.links_per_gap()) * topology.geometry().area);
}

//---------------------------------------------------------------------------//

nlohmann::json topology_to_json(FishnetTopology const& topology)
{
    auto const& g = topology.geometry();
    nlohmann::json nodes = nlohmann::json::array();
    for (std::uint32_t n = 0; n < topology.node_count(); ++n)
    {
        char const* role = "free";
        switch (topology.role(n))
        {
            case NodeRole::fixed: role = "fixed"; break;
            case NodeRole::prescribed: role = "prescribed"; break;
            case NodeRole::free: break;
        }
        nodes.push_back({{"id", n},
                         {"row", topology.row_of(n)},
                         {"column", topology.column_of(n)},
                         {"role", role}});
    }
    nlohmann::json links = nlohmann::json::array();
    auto const span = topology.links();
    for (std::size_t l = 0; l < span.size(); ++l)
    {
        links.push_back({{"id", l}, {"a", span[l].a}, {"b", span[l].b}, {"gap", span[l].gap}});
    }
    return {{"rows", g.rows},
            {"gaps", g.gaps},
            {"link_length", g.link_length},
            {"area", g.area},
            {"modulus", g.modulus},
            {"nodes", std::move(nodes)},
            {"links", std::move(links)}};
}

nlohmann::json damage_to_json(std::span<double const> strengths,
                              std::span<int const> jumps,
                              int total_jumps)
{
    nlohmann::json links = nlohmann::json::array();
    for (std::size_t l = 0; l < strengths.size(); ++l)
    {
        links.push_back({{"id", l},
                         {"s", strengths[l]},
                         {"j", jumps[l]},
                         {"dmg", static_cast<double>(jumps[l]) / total_jumps}});
    }
    return {{"total_jumps", total_jumps}, {"links", std::move(links)}};
}
}  // namespace fishnet
