#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fishnet
{
/*!
 * Symmetric banded matrix, lower band stored row by row.
 *
 * Entry (i, j) with i - bandwidth <= j <= i lives at
 * data[i * (bandwidth + 1) + (j - i + bandwidth)], so the diagonal is the last
 * slot of each row. Slots left of column 0 are padding and stay zero.
 */
class BandedSymmetric
{
  public:
    BandedSymmetric() = default;
    BandedSymmetric(std::size_t size, std::size_t bandwidth);

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] std::size_t bandwidth() const noexcept { return bandwidth_; }

    //! Element access, either triangle; out-of-band reads return zero.
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept;
    //! Adds to (i, j) and, implicitly, (j, i). |i - j| must be within the band.
    void add(std::size_t i, std::size_t j, double value);

    [[nodiscard]] std::span<double const> row(std::size_t i) const noexcept
    {
        return {data_.data() + i * stride(), stride()};
    }

    //! y = A x
    void multiply(std::span<double const> x, std::span<double> y) const;

    [[nodiscard]] std::vector<double> to_dense() const;

  private:
    [[nodiscard]] std::size_t stride() const noexcept { return bandwidth_ + 1; }

    std::size_t size_{0};
    std::size_t bandwidth_{0};
    std::vector<double> data_;
};

/*!
 * LDL^T factorization of a symmetric positive definite banded matrix.
 *
 * Supports in-place rank-one modification A + alpha w w^T for vectors w with
 * two nonzeros inside the band (the stiffness change of a single spring).
 * A modification that drives a pivot non-positive leaves the factor invalid;
 * the caller must refactorize.
 */
class BandedLdlt
{
  public:
    //! Factorizes A; returns false on a non-positive pivot.
    [[nodiscard]] bool factorize(BandedSymmetric const& matrix);

    /*!
     * Applies A <- A + alpha w w^T with w = wa e_a + wb e_b. Pass
     * b == a with wb == 0 for a single-entry vector. Returns false (and
     * invalidates the factor) if a pivot falls to or below
     * \c pivot_floor times its previous value.
     */
    [[nodiscard]] bool rank_one_update(std::size_t a,
                                       double wa,
                                       std::size_t b,
                                       double wb,
                                       double alpha,
                                       double pivot_floor = 1e-13);

    //! Solves A x = rhs. Leading zeros of rhs are skipped in the forward sweep.
    void solve(std::span<double const> rhs, std::span<double> x) const;

    [[nodiscard]] bool valid() const noexcept { return valid_; }
    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] std::span<double const> pivots() const noexcept { return d_; }

  private:
    [[nodiscard]] std::size_t stride() const noexcept { return bandwidth_ + 1; }
    [[nodiscard]] double& lower(std::size_t i, std::size_t j) noexcept
    {
        return l_[i * stride() + (j + bandwidth_ - i)];
    }

    std::size_t size_{0};
    std::size_t bandwidth_{0};
    std::vector<double> l_;  // unit lower factor, same layout as BandedSymmetric
    std::vector<double> d_;
    mutable std::vector<double> work_;
    bool valid_{false};
};

//! When the factor of an evolving system is rebuilt.
enum class FactorizationPolicy : std::uint8_t
{
    rank_one_reuse,   //!< rank-one modify, refactorize periodically
    always_refactor,  //!< fresh factorization before every solve
};

struct SolverCounters
{
    std::uint64_t factorizations{0};
    std::uint64_t rank_one_updates{0};
    std::uint64_t failed_updates{0};
    std::uint64_t solves{0};
};

/*!
 * Owns an evolving SPD system and its factorization.
 *
 * Each spring-stiffness change is applied to the stored matrix and, under
 * rank_one_reuse, to the factor as a rank-one modification. The factor is
 * rebuilt from the stored matrix every \c refactor_interval modifications or
 * whenever a modification fails its pivot check.
 */
class IncrementalSolver
{
  public:
    IncrementalSolver(BandedSymmetric matrix,
                      FactorizationPolicy policy,
                      std::size_t refactor_interval = 64);

    //! Spring between dofs a and b (either may be absent) changes by delta.
    void modify_spring(std::ptrdiff_t a, std::ptrdiff_t b, double delta);
    //! Replaces the system matrix; next solve refactorizes.
    void reset(BandedSymmetric matrix);

    //! Throws SingularSystem if a fresh factorization fails.
    void solve(std::span<double const> rhs, std::span<double> x);

    [[nodiscard]] BandedSymmetric const& matrix() const noexcept { return matrix_; }
    [[nodiscard]] SolverCounters const& counters() const noexcept { return counters_; }

  private:
    void refactorize();

    BandedSymmetric matrix_;
    BandedLdlt factor_;
    FactorizationPolicy policy_;
    std::size_t refactor_interval_;
    std::size_t since_refactor_{0};
    bool dirty_{true};
    SolverCounters counters_{};
};

//! One-shot direct solve of an SPD banded system; throws SingularSystem.
[[nodiscard]] std::vector<double> solve_linear(BandedSymmetric const& matrix,
                                               std::span<double const> rhs);
}  // namespace fishnet
