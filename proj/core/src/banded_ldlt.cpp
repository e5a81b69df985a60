#include "fishnet/banded_ldlt.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <utility>

#include "fishnet/errors.hpp"

namespace fishnet
{
BandedSymmetric::BandedSymmetric(std::size_t size, std::size_t bandwidth)
    : size_(size)
    , bandwidth_(std::min(bandwidth, size == 0 ? std::size_t{0} : size - 1))
    , data_(size * (bandwidth_ + 1), 0.0)
{
}

double BandedSymmetric::operator()(std::size_t i, std::size_t j) const noexcept
{
    if (i < j)
    {
        std::swap(i, j);
    }
    if (i - j > bandwidth_)
    {
        return 0.0;
    }
    return data_[i * stride() + (j + bandwidth_ - i)];
}

void BandedSymmetric::add(std::size_t i, std::size_t j, double value)
{
    if (i < j)
    {
        std::swap(i, j);
    }
    if (i >= size_ || i - j > bandwidth_)
    {
        throw StateError("banded matrix: entry outside the band");
    }
    data_[i * stride() + (j + bandwidth_ - i)] += value;
}

void BandedSymmetric::multiply(std::span<double const> x, std::span<double> y) const
{
    assert(x.size() == size_ && y.size() == size_);
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < size_; ++i)
    {
        auto const r = row(i);
        std::size_t const first = i >= bandwidth_ ? i - bandwidth_ : 0;
        for (std::size_t j = first; j < i; ++j)
        {
            double const a = r[j + bandwidth_ - i];
            y[i] += a * x[j];
            y[j] += a * x[i];
        }
        y[i] += r[bandwidth_] * x[i];
    }
}

std::vector<double> BandedSymmetric::to_dense() const
{
    std::vector<double> dense(size_ * size_, 0.0);
    for (std::size_t i = 0; i < size_; ++i)
    {
        for (std::size_t j = 0; j < size_; ++j)
        {
            dense[i * size_ + j] = (*this)(i, j);
        }
    }
    return dense;
}

//---------------------------------------------------------------------------//

bool BandedLdlt::factorize(BandedSymmetric const& matrix)
{
    size_ = matrix.size();
    bandwidth_ = matrix.bandwidth();
    l_.assign(size_ * stride(), 0.0);
    d_.assign(size_, 0.0);
    work_.assign(size_, 0.0);
    valid_ = false;

    std::vector<double> scaled(bandwidth_ + 1, 0.0);
    for (std::size_t i = 0; i < size_; ++i)
    {
        auto const a = matrix.row(i);
        double* li = l_.data() + i * stride();
        std::size_t const first = i >= bandwidth_ ? i - bandwidth_ : 0;
        double diag = a[bandwidth_];
        for (std::size_t j = first; j < i; ++j)
        {
            // L(i,j) d_j = A(i,j) - sum_k L(i,k) d_k L(j,k)
            double const* lj = l_.data() + j * stride();
            double acc = a[j + bandwidth_ - i];
            std::size_t const kfirst = std::max(first, j >= bandwidth_ ? j - bandwidth_ : 0);
            for (std::size_t k = kfirst; k < j; ++k)
            {
                acc -= scaled[k - first] * lj[k + bandwidth_ - j];
            }
            scaled[j - first] = acc;  // L(i,j) d_j
            double const lij = acc / d_[j];
            li[j + bandwidth_ - i] = lij;
            diag -= lij * acc;
        }
        if (!(diag > 0) || !std::isfinite(diag))
        {
            return false;
        }
        d_[i] = diag;
        li[bandwidth_] = 1.0;
    }
    valid_ = true;
    return true;
}

bool BandedLdlt::rank_one_update(std::size_t a,
                                 double wa,
                                 std::size_t b,
                                 double wb,
                                 double alpha,
                                 double pivot_floor)
{
    assert(valid_);
    if (a > b)
    {
        std::swap(a, b);
        std::swap(wa, wb);
    }
    assert(b < size_ && b - a <= bandwidth_);

    std::fill(work_.begin() + static_cast<std::ptrdiff_t>(a), work_.end(), 0.0);
    work_[a] += wa;
    work_[b] += wb;

    // Gill, Golub, Murray & Saunders method C1 restricted to the band.
    double alpha_j = alpha;
    std::size_t last_nonzero = b;
    for (std::size_t j = a; j < size_; ++j)
    {
        if (j > last_nonzero)
        {
            break;
        }
        double const p = work_[j];
        if (p == 0.0)
        {
            continue;
        }
        double const d_old = d_[j];
        double const d_new = d_old + alpha_j * p * p;
        if (!(d_new > pivot_floor * d_old) || !std::isfinite(d_new))
        {
            valid_ = false;
            return false;
        }
        double const beta = p * alpha_j / d_new;
        alpha_j *= d_old / d_new;
        d_[j] = d_new;
        std::size_t const rlast = std::min(size_ - 1, j + bandwidth_);
        for (std::size_t r = j + 1; r <= rlast; ++r)
        {
            double& lrj = lower(r, j);
            work_[r] -= p * lrj;
            lrj += beta * work_[r];
        }
        last_nonzero = std::max(last_nonzero, rlast);
    }
    return true;
}

void BandedLdlt::solve(std::span<double const> rhs, std::span<double> x) const
{
    assert(valid_);
    assert(rhs.size() == size_ && x.size() == size_);
    std::size_t start = 0;
    while (start < size_ && rhs[start] == 0.0)
    {
        x[start] = 0.0;
        ++start;
    }
    // Forward: L y = rhs, row-oriented.
    for (std::size_t i = start; i < size_; ++i)
    {
        double const* li = l_.data() + i * stride();
        std::size_t const first = std::max(start, i >= bandwidth_ ? i - bandwidth_ : 0);
        double acc = rhs[i];
        for (std::size_t j = first; j < i; ++j)
        {
            acc -= li[j + bandwidth_ - i] * x[j];
        }
        x[i] = acc;
    }
    for (std::size_t i = 0; i < size_; ++i)
    {
        x[i] /= d_[i];
    }
    // Backward: L^T x = y, scattering each solved entry along its row.
    for (std::size_t i = size_; i-- > 0;)
    {
        double const xi = x[i];
        if (xi == 0.0)
        {
            continue;
        }
        double const* li = l_.data() + i * stride();
        std::size_t const first = i >= bandwidth_ ? i - bandwidth_ : 0;
        for (std::size_t j = first; j < i; ++j)
        {
            x[j] -= li[j + bandwidth_ - i] * xi;
        }
    }
}

//---------------------------------------------------------------------------//

IncrementalSolver::IncrementalSolver(BandedSymmetric matrix,
                                     FactorizationPolicy policy,
                                     std::size_t refactor_interval)
    : matrix_(std::move(matrix))
    , policy_(policy)
    , refactor_interval_(std::max<std::size_t>(refactor_interval, 1))
{
}

void IncrementalSolver::reset(BandedSymmetric matrix)
{
    matrix_ = std::move(matrix);
    dirty_ = true;
}

void IncrementalSolver::modify_spring(std::ptrdiff_t a, std::ptrdiff_t b, double delta)
{
    if (a < 0 && b < 0)
    {
        return;
    }
    if (a >= 0)
    {
        matrix_.add(static_cast<std::size_t>(a), static_cast<std::size_t>(a), delta);
    }
    if (b >= 0)
    {
        matrix_.add(static_cast<std::size_t>(b), static_cast<std::size_t>(b), delta);
    }
    if (a >= 0 && b >= 0)
    {
        matrix_.add(static_cast<std::size_t>(a), static_cast<std::size_t>(b), -delta);
    }
    if (policy_ == FactorizationPolicy::always_refactor || dirty_)
    {
        dirty_ = true;
        return;
    }
    if (++since_refactor_ >= refactor_interval_)
    {
        dirty_ = true;
        return;
    }
    bool ok = false;
    if (a >= 0 && b >= 0)
    {
        ok = factor_.rank_one_update(static_cast<std::size_t>(a), 1.0,
                                     static_cast<std::size_t>(b), -1.0, delta);
    }
    else
    {
        auto const only = static_cast<std::size_t>(a >= 0 ? a : b);
        ok = factor_.rank_one_update(only, 1.0, only, 0.0, delta);
    }
    ++counters_.rank_one_updates;
    if (!ok)
    {
        ++counters_.failed_updates;
        dirty_ = true;
    }
}

void IncrementalSolver::refactorize()
{
    ++counters_.factorizations;
    if (!factor_.factorize(matrix_))
    {
        throw SingularSystem("stiffness matrix is not positive definite");
    }
    dirty_ = false;
    since_refactor_ = 0;
}

void IncrementalSolver::solve(std::span<double const> rhs, std::span<double> x)
{
    if (dirty_ || policy_ == FactorizationPolicy::always_refactor)
    {
        refactorize();
    }
    ++counters_.solves;
    factor_.solve(rhs, x);
}

std::vector<double> solve_linear(BandedSymmetric const& matrix, std::span<double const> rhs)
{
    if (rhs.size() != matrix.size())
    {
        throw DomainError("solve_linear: rhs size does not match the system");
    }
    BandedLdlt factor;
    if (!factor.factorize(matrix))
    {
        throw SingularSystem("solve_linear: non-positive pivot");
    }
    std::vector<double> x(matrix.size());
    factor.solve(rhs, x);
    return x;
}
}  // namespace fishnet
