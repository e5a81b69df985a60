#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fishnet/banded_ldlt.hpp"

namespace fishnet
{
//! Geometry and elastic constants of a fishnet (lengths in mm, moduli in MPa).
struct MeshGeometry
{
    int rows{16};
    int gaps{16};
    double link_length{0.01};
    double area{1.0};
    double modulus{1.0};
};

enum class NodeRole : std::uint8_t
{
    fixed,       //!< left column, u = 0
    free,        //!< interior, one axial dof
    prescribed,  //!< right column, u = end displacement
};

struct Link
{
    std::uint32_t a;  //!< node in column g
    std::uint32_t b;  //!< node in column g + 1
    std::uint32_t gap;
};

/*!
 * Collapsed (axial-only) fishnet.
 *
 * Nodes sit on a grid of \c rows rows and \c gaps + 1 columns. Node (i, c)
 * is joined to (i, c+1) and ((i+1) mod rows, c+1), so every gap holds
 * 2 rows links and every interior node has two links on each side. Node ids
 * are column-major (id = c * rows + i); link ids run gap by gap, and within
 * a gap by row with the straight link before the diagonal one.
 */
class FishnetTopology
{
  public:
    [[nodiscard]] static FishnetTopology build(MeshGeometry const& geometry);

    [[nodiscard]] MeshGeometry const& geometry() const noexcept { return geometry_; }
    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(geometry_.rows); }
    [[nodiscard]] std::size_t gaps() const noexcept { return static_cast<std::size_t>(geometry_.gaps); }
    [[nodiscard]] std::size_t node_count() const noexcept { return rows() * (gaps() + 1); }
    [[nodiscard]] std::size_t link_count() const noexcept { return links_.size(); }
    [[nodiscard]] std::size_t links_per_gap() const noexcept { return 2 * rows(); }

    [[nodiscard]] std::uint32_t node_id(std::size_t row, std::size_t column) const noexcept
    {
        return static_cast<std::uint32_t>(column * rows() + row);
    }
    [[nodiscard]] std::size_t column_of(std::uint32_t node) const noexcept { return node / rows(); }
    [[nodiscard]] std::size_t row_of(std::uint32_t node) const noexcept { return node % rows(); }
    [[nodiscard]] NodeRole role(std::uint32_t node) const noexcept;

    //! Free dof of a node, or -1 for boundary nodes.
    [[nodiscard]] std::ptrdiff_t dof(std::uint32_t node) const noexcept;
    [[nodiscard]] std::size_t dof_count() const noexcept { return rows() * (gaps() - 1); }
    //! Half-bandwidth of the reduced stiffness matrix in dof order.
    [[nodiscard]] std::size_t bandwidth() const noexcept { return rows() + 1; }

    [[nodiscard]] std::span<Link const> links() const noexcept { return links_; }
    [[nodiscard]] std::span<Link const> links_in_gap(std::size_t gap) const noexcept
    {
        return std::span<Link const>(links_).subspan(gap * links_per_gap(), links_per_gap());
    }

    //! Initial link stiffness K0 = E A / L.
    [[nodiscard]] double k0() const noexcept
    {
        return geometry_.modulus * geometry_.area / geometry_.link_length;
    }

  private:
    MeshGeometry geometry_{};
    std::vector<Link> links_;
};

//! Throws ConfigError when rows or gaps < 2 or a constant is non-positive.
[[nodiscard]] FishnetTopology build_topology(MeshGeometry const& geometry);

/*!
 * Linear softening discretized into J equal strength drops.
 *
 * After j jumps a link of strength s carries at most s (J - j) / J, and its
 * secant stiffness is chosen so that the peak of the current elastic branch
 * lies on the continuous softening line of slope Kt < 0:
 * K_r(j) = (J - j) K0 |Kt| / (J |Kt| + j K0).
 */
class LinearSoftening
{
  public:
    LinearSoftening(double k0, double kt, int total_jumps);

    [[nodiscard]] double k0() const noexcept { return k0_; }
    [[nodiscard]] double kt() const noexcept { return kt_; }
    [[nodiscard]] int total_jumps() const noexcept { return total_jumps_; }

    //! (J - j) / J
    [[nodiscard]] double residual_fraction(int jumps) const;
    [[nodiscard]] double secant_stiffness(int jumps) const;

  private:
    void check(int jumps) const;

    double k0_;
    double kt_;
    int total_jumps_;
};

struct LinkState
{
    double strength;  //!< MPa
    int jumps{0};
    int total_jumps{20};
    double k0{100.0};
    double kt{-10.0};
};

//! s (J - j) / J; throws StateError when j is outside [0, J].
[[nodiscard]] double residual_strength(LinkState const& state);
//! Secant stiffness K_r(j); throws ConfigError when Kt >= 0.
[[nodiscard]] double secant_stiffness(LinkState const& state);

struct Connectivity
{
    bool spans{false};               //!< some active path joins the two ends
    std::vector<std::uint8_t> floating;  //!< per node: reaches neither end
};

//! Active links are those with stiffness > 0.
[[nodiscard]] Connectivity analyze_connectivity(FishnetTopology const& topology,
                                                std::span<double const> link_stiffness);

/*!
 * Reduced system for a unit displacement of the prescribed end.
 *
 * Nodes cut off from both ends carry no load; each is grounded with a unit
 * diagonal so that the matrix stays positive definite.
 */
struct ReducedSystem
{
    BandedSymmetric matrix;
    std::vector<double> rhs;
    std::vector<std::uint8_t> grounded;  //!< per dof
};

//! Throws SingularSystem if no active path spans the specimen.
[[nodiscard]] ReducedSystem assemble_stiffness(FishnetTopology const& topology,
                                               std::span<double const> link_stiffness);
[[nodiscard]] ReducedSystem assemble_stiffness(FishnetTopology const& topology,
                                               std::span<LinkState const> states);

//! Nodal displacements for all nodes given the free-dof solution and end value.
[[nodiscard]] std::vector<double> expand_displacements(FishnetTopology const& topology,
                                                       std::span<double const> dofs,
                                                       double end_displacement);

//! Link stress (MPa) = K_r (u_b - u_a) / A.
[[nodiscard]] std::vector<double> link_stresses(FishnetTopology const& topology,
                                                std::span<double const> link_stiffness,
                                                std::span<double const> node_displacements);

//! Total end reaction divided by the gross section 2 R A.
[[nodiscard]] double nominal_stress(FishnetTopology const& topology,
                                    std::span<double const> link_stiffness,
                                    std::span<double const> node_displacements);

//! {rows, gaps, link_length, area, modulus, nodes[], links[]}
[[nodiscard]] nlohmann::json topology_to_json(FishnetTopology const& topology);
//! {links: [{id, s, j, dmg}], total_jumps}
[[nodiscard]] nlohmann::json damage_to_json(std::span<double const> strengths,
                                            std::span<int const> jumps,
                                            int total_jumps);
}  // namespace fishnet
