#pragma once

// Eigendecomposition of operators that are self-adjoint in the trapezoid L2
// pairing, and the Hilbert-scale proxy norms built on top of it.
//
// For W the diagonal quadrature weights, A is W-self-adjoint iff W A is
// symmetric. We diagonalise S = W^{1/2} A W^{-1/2} on the free (non-pinned)
// dofs and map the eigenvectors back with W^{-1/2}, so the returned basis is
// orthonormal in the discrete L2 pairing.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qplab/errors.hpp"
#include "qplab/grid.hpp"

namespace qplab {

inline constexpr Index kSpectralCap = 4096;

enum class SpectralOrder { second, fourth };

struct SpectralProxy {
    Grid grid;
    int components = 1;
    SpectralOrder order = SpectralOrder::second;
    Eigen::VectorXd eigenvalues;    // ascending
    Eigen::MatrixXd eigenvectors;   // dofs x modes, zero rows at pinned dofs
    Eigen::VectorXd dof_weights;    // quadrature weight of each dof

    Index modes() const noexcept { return eigenvalues.size(); }

    /// Coefficients <u, v_k>_W of a full-length dof vector.
    Eigen::VectorXd coefficients(const Eigen::VectorXd& u) const {
        return eigenvectors.transpose() * dof_weights.cwiseProduct(u);
    }

    /// f(A) u for a scalar function of the eigenvalues.
    Eigen::VectorXd apply(const std::function<double(double)>& f, const Eigen::VectorXd& u) const {
        Eigen::VectorXd c = coefficients(u);
        for (Index k = 0; k < c.size(); ++k) c[k] *= f(eigenvalues[k]);
        return eigenvectors * c;
    }
};

/// Largest entry of |W A - (W A)^T| relative to the largest entry of W A.
inline double weighted_asymmetry(const LinearOperator& op) {
    const Eigen::VectorXd w = op.grid.quadrature_weights();
    Eigen::VectorXd dw(op.dofs());
    for (Index d = 0; d < op.dofs(); ++d) dw[d] = w[d / op.components];
    SparseMatrix wa = dw.asDiagonal() * op.matrix;
    SparseMatrix diff = SparseMatrix(wa.transpose()) - wa;
    double big = 0.0;
    double asym = 0.0;
    for (Index r = 0; r < wa.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(wa, r); it; ++it) big = std::max(big, std::abs(it.value()));
    for (Index r = 0; r < diff.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(diff, r); it; ++it) asym = std::max(asym, std::abs(it.value()));
    return big > 0.0 ? asym / big : 0.0;
}

inline SpectralProxy eigendecompose(const LinearOperator& op, bool symmetric = true,
                                    SpectralOrder order = SpectralOrder::second) {
    if (!symmetric) throw UnsupportedOperation("only operators self-adjoint in the L2 pairing can be diagonalised");
    if (op.dofs() > kSpectralCap) throw UnsupportedOperation("eigendecomposition is capped at 4096 unknowns");
    if (const double a = weighted_asymmetry(op); a > 1e-8)
        throw DomainError("operator is not symmetric in the discrete L2 pairing (relative asymmetry " + std::to_string(a) + ")");

    const Eigen::VectorXd w = op.grid.quadrature_weights();
    std::vector<Index> free;
    for (Index d = 0; d < op.dofs(); ++d)
        if (!op.is_pinned(d)) free.push_back(d);
    const Index m = static_cast<Index>(free.size());

    Eigen::VectorXd dw(op.dofs());
    for (Index d = 0; d < op.dofs(); ++d) dw[d] = w[d / op.components];

    const Eigen::MatrixXd dense = Eigen::MatrixXd(op.matrix);
    Eigen::MatrixXd s(m, m);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b)
            s(a, b) = std::sqrt(dw[free[a]]) * dense(free[a], free[b]) / std::sqrt(dw[free[b]]);
    s = 0.5 * (s + s.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
    if (solver.info() != Eigen::Success) throw NonconvergenceError("symmetric eigensolver failed");

    SpectralProxy proxy;
    proxy.grid = op.grid;
    proxy.components = op.components;
    proxy.order = order;
    proxy.eigenvalues = solver.eigenvalues();
    proxy.eigenvectors = Eigen::MatrixXd::Zero(op.dofs(), m);
    for (Index a = 0; a < m; ++a) proxy.eigenvectors.row(free[a]) = solver.eigenvectors().row(a) / std::sqrt(dw[free[a]]);
    proxy.dof_weights = dw;
    return proxy;
}

/// ||(I + L_h)^theta u||_{L2}. A scalar proxy acts on each component of a
/// vector-valued field separately.
inline double proxy_norm(const GridFunction& u, double theta, const SpectralProxy& proxy) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("proxy exponent theta must lie in [0,1]");
    if (!(u.grid() == proxy.grid)) throw PreconditionError("field and proxy live on different grids");
    auto mode_sum = [&](const Eigen::VectorXd& v) {
        const Eigen::VectorXd c = proxy.coefficients(v);
        double acc = 0.0;
        for (Index k = 0; k < c.size(); ++k) acc += std::pow(1.0 + std::max(proxy.eigenvalues[k], 0.0), 2.0 * theta) * c[k] * c[k];
        return acc;
    };
    if (u.components() == proxy.components) return std::sqrt(mode_sum(u.values()));
    if (proxy.components != 1) throw PreconditionError("proxy component count does not match the field");
    double acc = 0.0;
    for (int c = 0; c < u.components(); ++c) acc += mode_sum(u.component(c));
    return std::sqrt(acc);
}

}  // namespace qplab
