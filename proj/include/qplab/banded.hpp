#pragma once

// Banded LU factorisation with partial pivoting (the gbtrf/gbtrs scheme).
//
// Storage is row-major with a per-row window of width 2*kl + ku + 1 starting at
// column i - kl; the extra kl slots on the right hold the fill-in produced by
// row interchanges.

#include <algorithm>
#include <cmath>
#include <vector>

#include "qplab/errors.hpp"
#include "qplab/grid.hpp"

namespace qplab {

class BandedLU {
public:
    BandedLU() = default;

    explicit BandedLU(const SparseMatrix& a) { factorize(a); }

    void factorize(const SparseMatrix& a) {
        if (a.rows() != a.cols()) throw PreconditionError("banded solve needs a square operator");
        n_ = a.rows();
        kl_ = 0;
        ku_ = 0;
        double scale = 0.0;
        for (Index r = 0; r < a.outerSize(); ++r)
            for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
                if (it.value() == 0.0) continue;
                kl_ = std::max(kl_, it.row() - it.col());
                ku_ = std::max(ku_, it.col() - it.row());
                scale = std::max(scale, std::abs(it.value()));
            }
        width_ = 2 * kl_ + ku_ + 1;
        band_.assign(static_cast<std::size_t>(n_ * width_), 0.0);
        lower_.assign(static_cast<std::size_t>(n_ * std::max<Index>(kl_, 1)), 0.0);
        piv_.assign(static_cast<std::size_t>(n_), 0);
        for (Index r = 0; r < a.outerSize(); ++r)
            for (SparseMatrix::InnerIterator it(a, r); it; ++it) at(it.row(), it.col()) += it.value();

        const double tiny = 1e-300 + 1e-15 * scale;
        for (Index k = 0; k < n_; ++k) {
            const Index last = std::min(n_ - 1, k + kl_);
            Index p = k;
            double best = std::abs(at(k, k));
            for (Index i = k + 1; i <= last; ++i)
                if (std::abs(at(i, k)) > best) {
                    best = std::abs(at(i, k));
                    p = i;
                }
            if (!(best > tiny)) throw SolverError("singular pivot in banded factorisation", k);
            piv_[static_cast<std::size_t>(k)] = p;
            const Index jmax = std::min(n_ - 1, k + kl_ + ku_);
            if (p != k)
                for (Index j = k; j <= jmax; ++j) std::swap(at(k, j), at(p, j));
            const double pivot = at(k, k);
            for (Index i = k + 1; i <= last; ++i) {
                const double l = at(i, k) / pivot;
                multiplier(k, i) = l;
                at(i, k) = 0.0;
                if (l == 0.0) continue;
                for (Index j = k + 1; j <= jmax; ++j) at(i, j) -= l * at(k, j);
            }
        }
    }

    Eigen::VectorXd solve(Eigen::VectorXd b) const {
        if (b.size() != n_) throw PreconditionError("right-hand side has wrong length");
        for (Index k = 0; k < n_; ++k) {
            const Index p = piv_[static_cast<std::size_t>(k)];
            if (p != k) std::swap(b[k], b[p]);
            const Index last = std::min(n_ - 1, k + kl_);
            for (Index i = k + 1; i <= last; ++i) b[i] -= multiplier(k, i) * b[k];
        }
        for (Index i = n_ - 1; i >= 0; --i) {
            double s = b[i];
            const Index jmax = std::min(n_ - 1, i + kl_ + ku_);
            for (Index j = i + 1; j <= jmax; ++j) s -= at(i, j) * b[j];
            b[i] = s / at(i, i);
        }
        return b;
    }

    Index size() const noexcept { return n_; }
    Index lower_bandwidth() const noexcept { return kl_; }
    Index upper_bandwidth() const noexcept { return ku_; }

private:
    Index n_ = 0;
    Index kl_ = 0;
    Index ku_ = 0;
    Index width_ = 1;
    std::vector<double> band_;
    std::vector<double> lower_;
    std::vector<Index> piv_;

    double& at(Index i, Index j) { return band_[static_cast<std::size_t>(i * width_ + (j - i + kl_))]; }
    double at(Index i, Index j) const { return band_[static_cast<std::size_t>(i * width_ + (j - i + kl_))]; }
    double& multiplier(Index k, Index i) { return lower_[static_cast<std::size_t>(k * kl_ + (i - k - 1))]; }
    double multiplier(Index k, Index i) const { return lower_[static_cast<std::size_t>(k * kl_ + (i - k - 1))]; }
};

/// Direct banded solve of op * x = rhs.
inline GridFunction solve_banded(const LinearOperator& op, const GridFunction& rhs) {
    if (op.dofs() != rhs.dofs()) throw PreconditionError("operator and right-hand side sizes differ");
    BandedLU lu(op.matrix);
    return GridFunction(rhs.grid(), rhs.components(), lu.solve(rhs.values()));
}

}  // namespace qplab
