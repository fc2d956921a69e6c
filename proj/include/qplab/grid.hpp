#pragma once

// Uniform grids on [0,1]^dim, nodal grid functions, finite-difference stencils
// and the sparse linear operators assembled from them.
//
// Ghost values are obtained by even reflection across the boundary node,
// u(-k) = u(k). For Neumann data this is the usual symmetric extension. For
// clamped data (u = 0 and d_nu u = 0 on the boundary) the boundary node is
// pinned to zero and the mirrored ghost u(-1) = u(1) is the second-order
// central discretisation of d_nu u = 0; the resulting 1D fourth difference at
// the first interior node is the classical clamped-plate stencil [7, -4, 1].

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qplab/errors.hpp"

namespace qplab {

using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class BoundaryCondition { neumann, clamped };

inline const char* to_string(BoundaryCondition bc) { return bc == BoundaryCondition::neumann ? "neumann" : "clamped"; }

inline BoundaryCondition parse_boundary_condition(const std::string& s) {
    if (s == "neumann") return BoundaryCondition::neumann;
    if (s == "clamped") return BoundaryCondition::clamped;
    throw PreconditionError("unknown boundary condition '" + s + "'");
}

class Grid {
public:
    Grid() = default;
    Grid(int dim, int nodes_per_axis) : dim_(dim), nodes_(nodes_per_axis) {
        if (dim != 1 && dim != 2) throw PreconditionError("grid dimension must be 1 or 2");
        if (nodes_per_axis < 8) throw PreconditionError("grid needs at least 8 nodes per axis");
        h_ = 1.0 / static_cast<double>(nodes_per_axis - 1);
    }

    int dim() const noexcept { return dim_; }
    int nodes_per_axis() const noexcept { return nodes_; }
    double spacing() const noexcept { return h_; }
    Index size() const noexcept { return dim_ == 1 ? nodes_ : static_cast<Index>(nodes_) * nodes_; }

    Index index(int i, int j = 0) const noexcept { return static_cast<Index>(j) * nodes_ + i; }
    int ix(Index node) const noexcept { return static_cast<int>(node % nodes_); }
    int iy(Index node) const noexcept { return dim_ == 1 ? 0 : static_cast<int>(node / nodes_); }
    double x(Index node) const noexcept { return ix(node) * h_; }
    double y(Index node) const noexcept { return iy(node) * h_; }

    bool on_boundary(Index node) const noexcept {
        const int i = ix(node);
        if (i == 0 || i == nodes_ - 1) return true;
        if (dim_ == 2) {
            const int j = iy(node);
            return j == 0 || j == nodes_ - 1;
        }
        return false;
    }

    /// Composite trapezoid weights; they define the discrete L2 pairing.
    Eigen::VectorXd quadrature_weights() const {
        Eigen::VectorXd w(size());
        for (Index k = 0; k < size(); ++k) {
            double wk = axis_weight(ix(k));
            if (dim_ == 2) wk *= axis_weight(iy(k));
            w[k] = wk;
        }
        return w;
    }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.dim_ == b.dim_ && a.nodes_ == b.nodes_;
    }

private:
    int dim_ = 1;
    int nodes_ = 8;
    double h_ = 1.0 / 7.0;

    double axis_weight(int i) const noexcept { return (i == 0 || i == nodes_ - 1) ? 0.5 * h_ : h_; }
};

/// Nodal field with a fixed number of value channels, stored node-major.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(Grid grid, int components)
        : grid_(grid), components_(components), values_(Eigen::VectorXd::Zero(grid.size() * components)) {
        if (components < 1) throw PreconditionError("grid function needs at least one component");
    }
    GridFunction(Grid grid, int components, Eigen::VectorXd values)
        : grid_(grid), components_(components), values_(std::move(values)) {
        if (values_.size() != grid_.size() * components_) throw PreconditionError("value array has wrong length");
    }

    template <class Fn>
    static GridFunction from_function(const Grid& grid, Fn&& fn) {
        GridFunction u(grid, 1);
        for (Index k = 0; k < grid.size(); ++k) u.values_[k] = fn(grid.x(k), grid.y(k));
        return u;
    }

    const Grid& grid() const noexcept { return grid_; }
    int components() const noexcept { return components_; }
    Index dofs() const noexcept { return values_.size(); }

    double& operator()(Index node, int c = 0) { return values_[node * components_ + c]; }
    double operator()(Index node, int c = 0) const { return values_[node * components_ + c]; }

    Eigen::VectorXd& values() noexcept { return values_; }
    const Eigen::VectorXd& values() const noexcept { return values_; }

    Eigen::VectorXd component(int c) const {
        Eigen::VectorXd out(grid_.size());
        for (Index k = 0; k < grid_.size(); ++k) out[k] = (*this)(k, c);
        return out;
    }
    void set_component(int c, const Eigen::VectorXd& v) {
        for (Index k = 0; k < grid_.size(); ++k) (*this)(k, c) = v[k];
    }

    bool all_finite() const { return values_.allFinite(); }

    GridFunction& operator+=(const GridFunction& o) {
        values_ += o.values_;
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        values_ -= o.values_;
        return *this;
    }
    GridFunction& operator*=(double s) {
        values_ *= s;
        return *this;
    }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

private:
    Grid grid_;
    int components_ = 1;
    Eigen::VectorXd values_;
};

// ---------------------------------------------------------------------------
// Norms in the trapezoid pairing. Multi-component values use the Euclidean norm.

inline double lq_norm(const GridFunction& u, double q) {
    const Eigen::VectorXd w = u.grid().quadrature_weights();
    double acc = 0.0;
    for (Index k = 0; k < u.grid().size(); ++k) {
        double e2 = 0.0;
        for (int c = 0; c < u.components(); ++c) e2 += u(k, c) * u(k, c);
        acc += w[k] * std::pow(std::sqrt(e2), q);
    }
    return std::pow(acc, 1.0 / q);
}

inline double l2_inner(const GridFunction& u, const GridFunction& v) {
    const Eigen::VectorXd w = u.grid().quadrature_weights();
    double acc = 0.0;
    for (Index k = 0; k < u.grid().size(); ++k)
        for (int c = 0; c < u.components(); ++c) acc += w[k] * u(k, c) * v(k, c);
    return acc;
}

inline double sup_norm(const GridFunction& u) { return u.values().size() ? u.values().cwiseAbs().maxCoeff() : 0.0; }

/// Integral of each component, summed.
inline double total_mass(const GridFunction& u) {
    const Eigen::VectorXd w = u.grid().quadrature_weights();
    double acc = 0.0;
    for (Index k = 0; k < u.grid().size(); ++k)
        for (int c = 0; c < u.components(); ++c) acc += w[k] * u(k, c);
    return acc;
}

// ---------------------------------------------------------------------------
// Stencils

/// Derivative orders per axis; |sigma| = x + y.
struct MultiIndex {
    int x = 0;
    int y = 0;
    int order() const noexcept { return x + y; }
    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// All multi-indices with 1 <= |sigma| <= max_order for the given dimension.
inline std::vector<MultiIndex> multi_indices_up_to(int dim, int max_order) {
    std::vector<MultiIndex> out;
    for (int k = 1; k <= max_order; ++k) {
        if (dim == 1) {
            out.push_back({k, 0});
        } else {
            for (int ax = k; ax >= 0; --ax) out.push_back({ax, k - ax});
        }
    }
    return out;
}

namespace detail {

using AxisStencil = std::vector<std::pair<int, double>>;

// Second-order central differences, unscaled by h.
inline const AxisStencil& axis_stencil(int order) {
    static const std::array<AxisStencil, 5> table = {
        AxisStencil{{0, 1.0}},
        AxisStencil{{-1, -0.5}, {1, 0.5}},
        AxisStencil{{-1, 1.0}, {0, -2.0}, {1, 1.0}},
        AxisStencil{{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
        AxisStencil{{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
    };
    return table.at(static_cast<std::size_t>(order));
}

inline int reflect(int i, int n) {
    while (i < 0 || i > n - 1) {
        if (i < 0) i = -i;
        if (i > n - 1) i = 2 * (n - 1) - i;
    }
    return i;
}

}  // namespace detail

/// Scalar node-to-node matrix of D^sigma with mirrored ghost nodes.
inline SparseMatrix derivative_matrix(const Grid& grid, MultiIndex s) {
    if (s.x < 0 || s.y < 0 || s.order() > 4 || s.x > 4 || s.y > 4)
        throw UnsupportedOperation("derivative order above 4 is not supported");
    if (grid.dim() == 1 && s.y != 0) throw UnsupportedOperation("y-derivative on a 1D grid");
    const int n = grid.nodes_per_axis();
    const double h = grid.spacing();
    const double scale = 1.0 / std::pow(h, s.order());
    const auto& sx = detail::axis_stencil(s.x);
    const auto& sy = detail::axis_stencil(s.y);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(grid.size()) * sx.size() * sy.size());
    for (Index k = 0; k < grid.size(); ++k) {
        const int i = grid.ix(k);
        const int j = grid.iy(k);
        for (const auto& [ox, cx] : sx) {
            const int ii = detail::reflect(i + ox, n);
            if (grid.dim() == 1) {
                trip.emplace_back(k, grid.index(ii), cx * scale);
                continue;
            }
            for (const auto& [oy, cy] : sy) {
                const int jj = detail::reflect(j + oy, n);
                trip.emplace_back(k, grid.index(ii, jj), cx * cy * scale);
            }
        }
    }
    SparseMatrix m(grid.size(), grid.size());
    m.setFromTriplets(trip.begin(), trip.end());
    m.prune(0.0);
    return m;
}

/// Every derivative matrix up to order four, assembled once and shared read-only.
class StencilCache {
public:
    explicit StencilCache(const Grid& grid) : grid_(grid) {
        for (int ox = 0; ox <= 4; ++ox)
            for (int oy = 0; oy <= (grid.dim() == 2 ? 4 - ox : 0); ++oy) mats_[slot({ox, oy})] = derivative_matrix(grid, {ox, oy});
    }

    const Grid& grid() const noexcept { return grid_; }

    const SparseMatrix& operator()(MultiIndex s) const {
        if (s.order() > 4 || s.x < 0 || s.y < 0 || (grid_.dim() == 1 && s.y != 0))
            throw UnsupportedOperation("derivative order above 4 is not supported");
        return mats_[slot(s)];
    }

    /// D^sigma applied to one scalar nodal vector.
    Eigen::VectorXd apply(MultiIndex s, const Eigen::VectorXd& v) const { return (*this)(s) * v; }

    SparseMatrix laplacian() const {
        SparseMatrix l = (*this)({2, 0});
        if (grid_.dim() == 2) l += (*this)({0, 2});
        return l;
    }
    SparseMatrix bilaplacian() const {
        SparseMatrix b = (*this)({4, 0});
        if (grid_.dim() == 2) {
            b += 2.0 * (*this)({2, 2});
            b += (*this)({0, 4});
        }
        return b;
    }

    static std::shared_ptr<const StencilCache> make(const Grid& grid) { return std::make_shared<const StencilCache>(grid); }

private:
    Grid grid_;
    std::array<SparseMatrix, 25> mats_;

    static std::size_t slot(MultiIndex s) { return static_cast<std::size_t>(s.x * 5 + s.y); }
};

/// D^sigma u, componentwise. The boundary condition selects the ghost rule;
/// both supported conditions use the mirrored ghost layer described above.
inline GridFunction derivative(const GridFunction& u, MultiIndex s, BoundaryCondition bc) {
    (void)bc;
    const SparseMatrix d = derivative_matrix(u.grid(), s);
    GridFunction out(u.grid(), u.components());
    for (int c = 0; c < u.components(); ++c) out.set_component(c, d * u.component(c));
    return out;
}

// ---------------------------------------------------------------------------

/// Sparse operator over all dofs (node-major, `components` per node). Pinned
/// dofs carry a homogeneous Dirichlet constraint: their rows and columns are zero.
struct LinearOperator {
    Grid grid;
    int components = 1;
    SparseMatrix matrix;
    std::vector<char> pinned;

    Index dofs() const noexcept { return matrix.rows(); }

    GridFunction apply(const GridFunction& u) const {
        return GridFunction(grid, components, Eigen::VectorXd(matrix * u.values()));
    }

    bool is_pinned(Index dof) const { return !pinned.empty() && pinned[static_cast<std::size_t>(dof)] != 0; }
};

/// Dofs fixed to zero for the given condition: every boundary node for clamped data.
inline std::vector<char> pinned_dofs(const Grid& grid, int components, BoundaryCondition bc) {
    std::vector<char> p(static_cast<std::size_t>(grid.size() * components), 0);
    if (bc == BoundaryCondition::clamped)
        for (Index k = 0; k < grid.size(); ++k)
            if (grid.on_boundary(k))
                for (int c = 0; c < components; ++c) p[static_cast<std::size_t>(k * components + c)] = 1;
    return p;
}

/// Zeroes the rows and columns of pinned dofs.
inline void apply_pins(SparseMatrix& m, const std::vector<char>& pinned) {
    if (pinned.empty()) return;
    for (Index r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it)
            if (pinned[static_cast<std::size_t>(it.row())] || pinned[static_cast<std::size_t>(it.col())]) it.valueRef() = 0.0;
    m.prune(0.0);
}

inline void zero_pinned(GridFunction& u, const std::vector<char>& pinned) {
    for (std::size_t k = 0; k < pinned.size(); ++k)
        if (pinned[k]) u.values()[static_cast<Index>(k)] = 0.0;
}

/// Reference operators of the two problem classes: -Delta_h (Neumann) and Delta_h^2 (clamped).
inline LinearOperator neumann_laplacian_operator(const Grid& grid) {
    StencilCache cache(grid);
    return {grid, 1, SparseMatrix(-cache.laplacian()), pinned_dofs(grid, 1, BoundaryCondition::neumann)};
}

inline LinearOperator clamped_bilaplacian_operator(const Grid& grid) {
    StencilCache cache(grid);
    LinearOperator op{grid, 1, cache.bilaplacian(), pinned_dofs(grid, 1, BoundaryCondition::clamped)};
    apply_pins(op.matrix, op.pinned);
    return op;
}

inline LinearOperator reference_operator(const Grid& grid, BoundaryCondition bc) {
    return bc == BoundaryCondition::neumann ? neumann_laplacian_operator(grid) : clamped_bilaplacian_operator(grid);
}

inline LinearOperator identity_operator(const Grid& grid, int components) {
    SparseMatrix m(grid.size() * components, grid.size() * components);
    m.setIdentity();
    return {grid, components, m, {}};
}

}  // namespace qplab
