#pragma once

// Concrete problems: reaction-diffusion systems with Neumann data and the two
// graph flows with clamped data, plus a few linear and scalar test problems.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qplab/errors.hpp"
#include "qplab/evolution.hpp"
#include "qplab/graph_geometry.hpp"
#include "qplab/grid.hpp"

namespace qplab {

struct Monomial {
    double coeff = 0.0;
    std::vector<int> exponents;  // one per state component; missing entries are zero
};

/// Polynomial in the N state components.
struct Polynomial {
    std::vector<Monomial> terms;

    static Polynomial constant(double c) { return {{{c, {}}}}; }

    double operator()(const double* u, int n) const {
        double acc = 0.0;
        for (const auto& m : terms) {
            double v = m.coeff;
            for (std::size_t c = 0; c < m.exponents.size(); ++c) {
                if (static_cast<int>(c) >= n) throw PreconditionError("monomial refers to a missing component");
                for (int e = 0; e < m.exponents[c]; ++e) v *= u[c];
            }
            acc += v;
        }
        return acc;
    }
    double operator()(const std::vector<double>& u) const { return (*this)(u.data(), static_cast<int>(u.size())); }

    bool is_constant() const {
        return std::all_of(terms.begin(), terms.end(), [](const Monomial& m) {
            return std::all_of(m.exponents.begin(), m.exponents.end(), [](int e) { return e == 0; });
        });
    }
    bool is_zero() const {
        return std::all_of(terms.begin(), terms.end(), [](const Monomial& m) { return m.coeff == 0.0; });
    }
};

/// Coefficient of b(u)(d_j u_k, d_j u_l) in component i.
struct BilinearTerm {
    int i = 0, k = 0, l = 0;
    Polynomial coeff;
};

struct ReactionDiffusionSpec {
    int N = 1;
    std::vector<double> box_lo;
    std::vector<double> box_hi;
    double eta = 0.0;                          // margin to the box boundary
    std::vector<std::vector<Polynomial>> a;    // N x N
    std::vector<Polynomial> f;                 // N
    std::vector<BilinearTerm> b;

    void validate() const {
        if (N < 1 || N > 8) throw PreconditionError("reaction-diffusion systems support 1 to 8 components");
        if (static_cast<int>(box_lo.size()) != N || static_cast<int>(box_hi.size()) != N)
            throw PreconditionError("box bounds need one entry per component");
        for (int c = 0; c < N; ++c)
            if (!(box_lo[static_cast<std::size_t>(c)] + 2 * eta < box_hi[static_cast<std::size_t>(c)]))
                throw PreconditionError("box is empty after the margin");
        if (static_cast<int>(a.size()) != N) throw PreconditionError("a must be N x N");
        for (const auto& row : a)
            if (static_cast<int>(row.size()) != N) throw PreconditionError("a must be N x N");
        if (!f.empty() && static_cast<int>(f.size()) != N) throw PreconditionError("f needs N entries");
        for (const auto& t : b)
            if (t.i < 0 || t.i >= N || t.k < 0 || t.k >= N || t.l < 0 || t.l >= N)
                throw PreconditionError("bilinear term index out of range");
    }

    bool inside(const double* u) const {
        for (int c = 0; c < N; ++c)
            if (!(u[c] > box_lo[static_cast<std::size_t>(c)] + eta && u[c] < box_hi[static_cast<std::size_t>(c)] - eta))
                return false;
        return true;
    }

    Eigen::MatrixXd a_at(const double* u) const {
        Eigen::MatrixXd m(N, N);
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < N; ++c) m(r, c) = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)](u, N);
        return m;
    }
};

/// Scalar spec with a(u), f(u) and b(u) given as univariate coefficient lists (c0 + c1 u + ...).
inline ReactionDiffusionSpec scalar_rd_spec(const std::vector<double>& a, const std::vector<double>& f,
                                            const std::vector<double>& b, double lo = -1e6, double hi = 1e6) {
    auto poly = [](const std::vector<double>& c) {
        Polynomial p;
        for (std::size_t e = 0; e < c.size(); ++e)
            if (c[e] != 0.0) p.terms.push_back({c[e], {static_cast<int>(e)}});
        return p;
    };
    ReactionDiffusionSpec s;
    s.N = 1;
    s.box_lo = {lo};
    s.box_hi = {hi};
    s.a = {{poly(a)}};
    s.f = {poly(f)};
    if (!b.empty()) s.b = {{0, 0, 0, poly(b)}};
    return s;
}

struct SpectrumReport {
    double min_real_part = std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    std::size_t samples = 0;
    bool positive = false;
};

/// Eigenvalues of a(u) at each sample; nonpositive real parts reject the spec.
inline SpectrumReport spectrum_positivity_check(const ReactionDiffusionSpec& spec,
                                                const std::vector<std::vector<double>>& samples,
                                                bool throw_on_failure = true) {
    SpectrumReport r;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        if (static_cast<int>(samples[s].size()) != spec.N) throw PreconditionError("sample has wrong dimension");
        if (!spec.inside(samples[s].data())) throw DomainError("spectrum sample lies outside U");
        Eigen::EigenSolver<Eigen::MatrixXd> es(spec.a_at(samples[s].data()), false);
        for (Index k = 0; k < es.eigenvalues().size(); ++k)
            if (es.eigenvalues()[k].real() < r.min_real_part) {
                r.min_real_part = es.eigenvalues()[k].real();
                r.argmin = s;
            }
        ++r.samples;
    }
    r.positive = r.min_real_part > 0.0;
    if (!r.positive && throw_on_failure)
        throw DomainError("spectrum of a(u) not contained in (0,inf): min real part " + std::to_string(r.min_real_part) +
                          " at sample " + std::to_string(r.argmin));
    return r;
}

/// Tensor grid of `per_axis` points strictly inside the margin-shrunk box.
inline std::vector<std::vector<double>> box_samples(const ReactionDiffusionSpec& spec, int per_axis = 5) {
    std::vector<std::vector<double>> out{{}};
    for (int c = 0; c < spec.N; ++c) {
        const double lo = std::max(spec.box_lo[static_cast<std::size_t>(c)] + spec.eta, -1e3);
        const double hi = std::min(spec.box_hi[static_cast<std::size_t>(c)] - spec.eta, 1e3);
        std::vector<std::vector<double>> next;
        for (const auto& prefix : out)
            for (int k = 1; k <= per_axis; ++k) {
                auto v = prefix;
                v.push_back(lo + (hi - lo) * k / (per_axis + 1));
                next.push_back(std::move(v));
            }
        out = std::move(next);
    }
    return out;
}

/// u' - a(u) Delta u = f(u) + b(u)(grad u, grad u) with Neumann data.
inline AbstractProblem rd_problem(const ReactionDiffusionSpec& spec, const Grid& grid, int samples_per_axis = 5) {
    spec.validate();
    spectrum_positivity_check(spec, box_samples(spec, spec.N > 4 ? 2 : samples_per_axis));

    auto sp = std::make_shared<const ReactionDiffusionSpec>(spec);
    auto st = StencilCache::make(grid);
    const int N = spec.N;

    AbstractProblem prob;
    prob.name = "reaction_diffusion";
    prob.grid = grid;
    prob.components = N;
    prob.order = 2;
    prob.bc = BoundaryCondition::neumann;
    prob.state_independent_A = std::all_of(spec.a.begin(), spec.a.end(), [](const auto& row) {
        return std::all_of(row.begin(), row.end(), [](const Polynomial& p) { return p.is_constant(); });
    });

    auto check = [sp](const GridFunction& v) {
        for (Index k = 0; k < v.grid().size(); ++k)
            if (!sp->inside(&v.values()[k * sp->N]))
                throw DomainError("state leaves U at node " + std::to_string(k));
    };

    prob.state_constraint = [sp](const GridFunction& v) {
        if (!v.all_finite()) return false;
        for (Index k = 0; k < v.grid().size(); ++k)
            if (!sp->inside(&v.values()[k * sp->N])) return false;
        return true;
    };

    prob.assemble_A = [sp, st, check, N](const GridFunction& v) {
        check(v);
        const SparseMatrix lap = st->laplacian();
        std::vector<Eigen::Triplet<double>> trip;
        for (Index r = 0; r < lap.outerSize(); ++r) {
            const Eigen::MatrixXd a = sp->a_at(&v.values()[r * N]);
            for (SparseMatrix::InnerIterator it(lap, r); it; ++it)
                for (int i = 0; i < N; ++i)
                    for (int k = 0; k < N; ++k)
                        if (a(i, k) != 0.0) trip.emplace_back(r * N + i, it.col() * N + k, -a(i, k) * it.value());
        }
        SparseMatrix m(v.dofs(), v.dofs());
        m.setFromTriplets(trip.begin(), trip.end());
        return LinearOperator{v.grid(), N, std::move(m), {}};
    };

    const bool has_f = std::any_of(spec.f.begin(), spec.f.end(), [](const Polynomial& p) { return !p.is_zero(); });
    if (has_f)
        prob.F1 = [sp, check, N](const GridFunction& v) {
            check(v);
            GridFunction out(v.grid(), N);
            for (Index k = 0; k < v.grid().size(); ++k)
                for (int i = 0; i < N; ++i) out(k, i) = sp->f[static_cast<std::size_t>(i)](&v.values()[k * N], N);
            return out;
        };

    if (!spec.b.empty())
        prob.F2 = [sp, st, check, N](const GridFunction& v) {
            check(v);
            const int dim = v.grid().dim();
            std::vector<std::vector<Eigen::VectorXd>> grad(static_cast<std::size_t>(dim));
            for (int j = 0; j < dim; ++j)
                for (int c = 0; c < N; ++c)
                    grad[static_cast<std::size_t>(j)].push_back(st->apply(j == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1}, v.component(c)));
            GridFunction out(v.grid(), N);
            for (Index k = 0; k < v.grid().size(); ++k)
                for (const auto& t : sp->b) {
                    double g = 0.0;
                    for (int j = 0; j < dim; ++j)
                        g += grad[static_cast<std::size_t>(j)][static_cast<std::size_t>(t.k)][k] *
                             grad[static_cast<std::size_t>(j)][static_cast<std::size_t>(t.l)][k];
                    out(k, t.i) += t.coeff(&v.values()[k * N], N) * g;
                }
            return out;
        };
    return prob;
}

/// Flux-difference discretisation of div(a(u) grad u) with face averages of a
/// and mirrored ghosts; scalar only.
inline GridFunction rd_divergence_oracle(const ReactionDiffusionSpec& spec, const GridFunction& u) {
    if (spec.N != 1 || u.components() != 1) throw PreconditionError("divergence oracle is scalar only");
    const Grid& g = u.grid();
    const int n = g.nodes_per_axis();
    const double h2 = g.spacing() * g.spacing();
    auto a = [&](double v) { return spec.a[0][0](&v, 1); };
    GridFunction out(g, 1);
    for (Index k = 0; k < g.size(); ++k) {
        const int i = g.ix(k), j = g.iy(k);
        const double uc = u(k);
        double acc = 0.0;
        for (int axis = 0; axis < g.dim(); ++axis) {
            for (int s : {-1, 1}) {
                const int ii = axis == 0 ? detail::reflect(i + s, n) : i;
                const int jj = axis == 1 ? detail::reflect(j + s, n) : j;
                const double un = u(g.index(ii, jj));
                acc += 0.5 * (a(uc) + a(un)) * (un - uc);
            }
        }
        out(k) = acc / h2;
    }
    return out;
}

// ---------------------------------------------------------------------------

enum class FlowKind { surface_diffusion, willmore };

inline const char* to_string(FlowKind k) { return k == FlowKind::surface_diffusion ? "surface_diffusion" : "willmore"; }

inline FlowKind parse_flow_kind(const std::string& s) {
    if (s == "surface_diffusion") return FlowKind::surface_diffusion;
    if (s == "willmore") return FlowKind::willmore;
    throw PreconditionError("unknown flow kind '" + s + "'");
}

struct FlowSpec {
    FlowKind kind = FlowKind::surface_diffusion;
    Grid grid;
};

/// h' + A(h) h = F2(h) with A the frozen leading part and F2 = A(h) h + G(h),
/// G the composed geometric right-hand side; F1 = 0.
inline AbstractProblem flow_problem(const FlowSpec& spec) {
    auto geo = std::make_shared<const GraphGeometry>(spec.grid);
    const auto pins = pinned_dofs(spec.grid, 1, BoundaryCondition::clamped);
    AbstractProblem prob;
    prob.name = to_string(spec.kind);
    prob.grid = spec.grid;
    prob.components = 1;
    prob.order = 4;
    prob.bc = BoundaryCondition::clamped;
    prob.state_constraint = [](const GridFunction& h) { return h.all_finite(); };
    prob.assemble_A = [geo, pins](const GridFunction& h) {
        LinearOperator op{h.grid(), 1, geo->leading_operator(h), pins};
        apply_pins(op.matrix, op.pinned);
        return op;
    };
    const FlowKind kind = spec.kind;
    prob.F2 = [geo, pins, kind](const GridFunction& h) {
        LinearOperator op{h.grid(), 1, geo->leading_operator(h), pins};
        apply_pins(op.matrix, op.pinned);
        GridFunction out = op.apply(h) + (kind == FlowKind::surface_diffusion ? geo->surface_diffusion_rhs(h) : geo->willmore_rhs(h));
        zero_pinned(out, pins);
        return out;
    };
    return prob;
}

/// The composed right-hand side G(h) with the boundary rows zeroed.
inline GridFunction flow_rhs(const FlowSpec& spec, const GridFunction& h) {
    GraphGeometry geo(spec.grid);
    GridFunction g = spec.kind == FlowKind::surface_diffusion ? geo.surface_diffusion_rhs(h) : geo.willmore_rhs(h);
    zero_pinned(g, pinned_dofs(spec.grid, 1, BoundaryCondition::clamped));
    return g;
}

// ---------------------------------------------------------------------------

/// u' + L u = 0 with L the reference operator of the boundary condition.
inline AbstractProblem linear_problem(const Grid& grid, BoundaryCondition bc) {
    AbstractProblem prob;
    prob.name = bc == BoundaryCondition::neumann ? "heat" : "bilaplacian";
    prob.grid = grid;
    prob.order = bc == BoundaryCondition::neumann ? 2 : 4;
    prob.bc = bc;
    prob.state_independent_A = true;
    auto op = std::make_shared<const LinearOperator>(reference_operator(grid, bc));
    prob.assemble_A = [op](const GridFunction&) { return *op; };
    return prob;
}

/// u' = u^2 at every node, A = 0; blows up at t = 1/u0 for constant data.
inline AbstractProblem quadratic_ode_problem(const Grid& grid) {
    AbstractProblem prob;
    prob.name = "quadratic_ode";
    prob.grid = grid;
    prob.order = 2;
    prob.bc = BoundaryCondition::neumann;
    prob.state_independent_A = true;
    prob.assemble_A = [](const GridFunction& v) {
        return LinearOperator{v.grid(), v.components(), SparseMatrix(v.dofs(), v.dofs()), {}};
    };
    prob.F1 = [](const GridFunction& v) {
        GridFunction out = v;
        out.values() = v.values().cwiseProduct(v.values());
        return out;
    };
    return prob;
}

}  // namespace qplab
