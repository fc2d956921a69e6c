#pragma once

// Geometry of the graph of a height function h over [0,1]^n, n = 1, 2.
//
//   beta = 1/sqrt(1 + |grad h|^2),  nu = beta (-grad h, 1),  P_ij = delta_ij - beta^2 h_i h_j
//   H = P_ij beta h_ij
//   Delta_Gamma phi = P_kl (phi_kl - beta^2 h_kl h_m phi_m)
//   tr L^2 = -P_ij (d_i d_j nu | nu)
//
// Every field is evaluated nodewise from the shared stencils; nothing is staggered.

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "qplab/errors.hpp"
#include "qplab/grid.hpp"

namespace qplab {

struct GeometryFields {
    GridFunction beta;
    GridFunction normal;          // n + 1 components
    GridFunction mean_curvature;
    GridFunction trL2;
};

/// a_ijkl = P_kl P_ij at one gradient; indices run over 0..n-1.
struct LeadingCoefficient {
    int n = 1;
    std::array<double, 16> a{};

    double operator()(int i, int j, int k, int l) const { return a[static_cast<std::size_t>(((i * 2 + j) * 2 + k) * 2 + l)]; }

    /// Coefficient of D^sigma after summing over all (i,j,k,l) that produce sigma.
    double for_multi_index(MultiIndex s) const {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        const int xs = (i == 0) + (j == 0) + (k == 0) + (l == 0);
                        if (xs == s.x && 4 - xs == s.y) acc += (*this)(i, j, k, l);
                    }
        return acc;
    }
};

inline LeadingCoefficient leading_coefficient(const std::vector<double>& grad_h) {
    const int n = static_cast<int>(grad_h.size());
    if (n < 1 || n > 2) throw PreconditionError("gradient must have 1 or 2 components");
    double g2 = 0.0;
    for (double g : grad_h) {
        if (!std::isfinite(g)) throw PreconditionError("non-finite gradient");
        g2 += g * g;
    }
    const double b2 = 1.0 / (1.0 + g2);
    auto P = [&](int i, int j) { return (i == j ? 1.0 : 0.0) - b2 * grad_h[static_cast<std::size_t>(i)] * grad_h[static_cast<std::size_t>(j)]; };
    LeadingCoefficient c;
    c.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) c.a[static_cast<std::size_t>(((i * 2 + j) * 2 + k) * 2 + l)] = P(k, l) * P(i, j);
    return c;
}

class GraphGeometry {
public:
    explicit GraphGeometry(const Grid& grid) : cache_(StencilCache::make(grid)) {}
    explicit GraphGeometry(std::shared_ptr<const StencilCache> cache) : cache_(std::move(cache)) {}

    const Grid& grid() const noexcept { return cache_->grid(); }
    const StencilCache& stencils() const noexcept { return *cache_; }

    GridFunction beta(const GridFunction& h) const {
        const Jet j = jet(h, 1);
        GridFunction b(grid(), 1);
        for (Index k = 0; k < grid().size(); ++k) b(k) = beta_at(j, k);
        return b;
    }

    GridFunction normal(const GridFunction& h) const {
        const Jet j = jet(h, 1);
        const int n = grid().dim();
        GridFunction nu(grid(), n + 1);
        for (Index k = 0; k < grid().size(); ++k) {
            const double b = beta_at(j, k);
            for (int m = 0; m < n; ++m) nu(k, m) = -b * j.d1[m][k];
            nu(k, n) = b;
        }
        return nu;
    }

    GridFunction mean_curvature(const GridFunction& h) const {
        const Jet j = jet(h, 2);
        GridFunction H(grid(), 1);
        for (Index k = 0; k < grid().size(); ++k) H(k) = curvature_at(j, k);
        return H;
    }

    GridFunction laplace_beltrami(const GridFunction& h, const GridFunction& phi) const {
        const Jet jh = jet(h, 2);
        const Jet jp = jet(phi, 2);
        const int n = grid().dim();
        GridFunction out(grid(), 1);
        for (Index k = 0; k < grid().size(); ++k) {
            const double b = beta_at(jh, k);
            double hm_phim = 0.0;
            for (int m = 0; m < n; ++m) hm_phim += jh.d1[m][k] * jp.d1[m][k];
            double acc = 0.0;
            for (int a = 0; a < n; ++a)
                for (int c = 0; c < n; ++c) acc += proj(jh, k, b, a, c) * (jp.d2[a][c][k] - b * b * jh.d2[a][c][k] * hm_phim);
            out(k) = acc;
        }
        return out;
    }

    /// -P_ij (d_i d_j nu | nu), with d_i d_j nu expanded through d beta and d^2 beta.
    GridFunction trace_L_squared(const GridFunction& h) const {
        const Jet j = jet(h, 3);
        GridFunction out(grid(), 1);
        for (Index k = 0; k < grid().size(); ++k) out(k) = trL2_at(j, k);
        return out;
    }

    GeometryFields fields(const GridFunction& h) const {
        return {beta(h), normal(h), mean_curvature(h), trace_L_squared(h)};
    }

    /// d_t h = -(1/beta) Delta_Gamma H.
    GridFunction surface_diffusion_rhs(const GridFunction& h) const {
        const GridFunction H = mean_curvature(h);
        const GridFunction lb = laplace_beltrami(h, H);
        const GridFunction b = beta(h);
        GridFunction out(grid(), 1);
        for (Index k = 0; k < grid().size(); ++k) out(k) = -lb(k) / b(k);
        return out;
    }

    /// d_t h = (1/beta) (-Delta_Gamma H + H (H^2/2 - tr L^2)), H^3 taken as the cube of the scalar H.
    GridFunction willmore_rhs(const GridFunction& h) const {
        const GridFunction H = mean_curvature(h);
        const GridFunction lb = laplace_beltrami(h, H);
        const GridFunction b = beta(h);
        const GridFunction t = trace_L_squared(h);
        GridFunction out(grid(), 1);
        for (Index k = 0; k < grid().size(); ++k) out(k) = (-lb(k) + H(k) * (0.5 * H(k) * H(k) - t(k))) / b(k);
        return out;
    }

    /// Frozen leading operator sum_{|sigma|=4} a_sigma(grad h(x)) D^sigma.
    SparseMatrix leading_operator(const GridFunction& h) const {
        const Jet j = jet(h, 1);
        const int n = grid().dim();
        SparseMatrix out(grid().size(), grid().size());
        for (int sx = 4; sx >= (n == 1 ? 4 : 0); --sx) {
            const MultiIndex s{sx, 4 - sx};
            Eigen::VectorXd coef(grid().size());
            for (Index k = 0; k < grid().size(); ++k) {
                std::vector<double> g(static_cast<std::size_t>(n));
                for (int m = 0; m < n; ++m) g[static_cast<std::size_t>(m)] = j.d1[m][k];
                coef[k] = leading_coefficient(g).for_multi_index(s);
            }
            out += SparseMatrix(coef.asDiagonal() * stencils()(s));
        }
        return out;
    }

private:
    std::shared_ptr<const StencilCache> cache_;

    // Nodal derivatives up to order three, indexed by axis.
    struct Jet {
        std::array<Eigen::VectorXd, 2> d1;
        std::array<std::array<Eigen::VectorXd, 2>, 2> d2;
        std::array<std::array<std::array<Eigen::VectorXd, 2>, 2>, 2> d3;
    };

    static MultiIndex mi(std::initializer_list<int> axes) {
        MultiIndex s;
        for (int a : axes) (a == 0 ? s.x : s.y) += 1;
        return s;
    }

    Jet jet(const GridFunction& h, int order) const {
        if (h.components() != 1) throw PreconditionError("height function must be scalar");
        if (!(h.grid() == grid())) throw PreconditionError("field lives on another grid");
        const int n = grid().dim();
        const Eigen::VectorXd& v = h.values();
        Jet j;
        for (int a = 0; a < n; ++a) {
            j.d1[a] = stencils().apply(mi({a}), v);
            if (order < 2) continue;
            for (int b = a; b < n; ++b) {
                j.d2[a][b] = stencils().apply(mi({a, b}), v);
                j.d2[b][a] = j.d2[a][b];
                if (order < 3) continue;
                for (int c = b; c < n; ++c) {
                    const Eigen::VectorXd d = stencils().apply(mi({a, b, c}), v);
                    for (const auto& [x, y, z] : {std::array{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}})
                        j.d3[x][y][z] = d;
                }
            }
        }
        return j;
    }

    double beta_at(const Jet& j, Index k) const {
        double g2 = 0.0;
        for (int m = 0; m < grid().dim(); ++m) g2 += j.d1[m][k] * j.d1[m][k];
        return 1.0 / std::sqrt(1.0 + g2);
    }

    static double proj(const Jet& j, Index k, double b, int a, int c) {
        return (a == c ? 1.0 : 0.0) - b * b * j.d1[a][k] * j.d1[c][k];
    }

    double curvature_at(const Jet& j, Index k) const {
        const double b = beta_at(j, k);
        double acc = 0.0;
        for (int a = 0; a < grid().dim(); ++a)
            for (int c = 0; c < grid().dim(); ++c) acc += proj(j, k, b, a, c) * b * j.d2[a][c][k];
        return acc;
    }

    double trL2_at(const Jet& j, Index k) const {
        const int n = grid().dim();
        const double b = beta_at(j, k);
        double g[2] = {0.0, 0.0};
        for (int m = 0; m < n; ++m) g[m] = j.d1[m][k];
        // (d_i grad h | grad h)
        double hg[2] = {0.0, 0.0};
        for (int i = 0; i < n; ++i)
            for (int m = 0; m < n; ++m) hg[i] += j.d2[i][m][k] * g[m];
        double db[2];
        for (int i = 0; i < n; ++i) db[i] = -b * b * b * hg[i];

        double nu[3];
        for (int m = 0; m < n; ++m) nu[m] = -b * g[m];
        nu[n] = b;

        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj) {
                double t3g = 0.0;
                double hh = 0.0;
                for (int m = 0; m < n; ++m) {
                    t3g += j.d3[i][jj][m][k] * g[m];
                    hh += j.d2[jj][m][k] * j.d2[i][m][k];
                }
                const double ddb = -3.0 * b * b * db[i] * hg[jj] - b * b * b * t3g - b * b * b * hh;
                double dot = ddb * nu[n];
                for (int m = 0; m < n; ++m) {
                    const double comp = -ddb * g[m] - db[jj] * j.d2[i][m][k] - db[i] * j.d2[jj][m][k] - b * j.d3[i][jj][m][k];
                    dot += comp * nu[m];
                }
                acc -= proj(j, k, b, i, jj) * dot;
            }
        return acc;
    }
};

// Free-function forms building a throwaway stencil cache.
inline GridFunction mean_curvature(const GridFunction& h) { return GraphGeometry(h.grid()).mean_curvature(h); }
inline GridFunction laplace_beltrami(const GridFunction& h, const GridFunction& phi) {
    return GraphGeometry(h.grid()).laplace_beltrami(h, phi);
}
inline GridFunction trace_L_squared(const GridFunction& h) { return GraphGeometry(h.grid()).trace_L_squared(h); }
inline GridFunction surface_diffusion_rhs(const GridFunction& h) { return GraphGeometry(h.grid()).surface_diffusion_rhs(h); }
inline GridFunction willmore_rhs(const GridFunction& h) { return GraphGeometry(h.grid()).willmore_rhs(h); }

}  // namespace qplab
