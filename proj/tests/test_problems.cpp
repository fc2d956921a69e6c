#include <catch_amalgamated.hpp>

#include "qplab/evolution.hpp"
#include "qplab/problems.hpp"

using namespace qplab;
using Catch::Approx;

namespace {

GridFunction cosine(const Grid& g, double offset, double amp) {
    return GridFunction::from_function(g, [&](double x, double) { return offset + amp * std::cos(M_PI * x); });
}

double interior_sup(const GridFunction& u) {
    double m = 0.0;
    for (Index k = 0; k < u.grid().size(); ++k)
        if (!u.grid().on_boundary(k)) m = std::max(m, std::abs(u(k)));
    return m;
}

FixedPointConfig cfg(double window, int steps, double mu) {
    FixedPointConfig c;
    c.window = window;
    c.time_steps = steps;
    c.mu = mu;
    return c;
}

// a(u) = 1 + u^2 with the matching gradient term 2u |grad u|^2: the divergence form
const ReactionDiffusionSpec kDiv = scalar_rd_spec({1.0, 0.0, 1.0}, {0.0}, {0.0, 2.0}, -10, 10);

}  // namespace

TEST_CASE("polynomials") {
    Polynomial p{{{2.0, {1, 2}}, {-1.0, {}}}};
    const std::vector<double> u{3.0, 0.5};
    CHECK(p(u) == Approx(2.0 * 3.0 * 0.25 - 1.0));
    CHECK_FALSE(p.is_constant());
    CHECK(Polynomial::constant(4.0).is_constant());
    CHECK(Polynomial{{{0.0, {3}}}}.is_zero());
    CHECK_THROWS_AS(p(std::vector<double>{1.0}), PreconditionError);
}

TEST_CASE("spec validation") {
    auto s = scalar_rd_spec({1.0}, {0.0}, {});
    s.box_lo = {0.0, 0.0};
    CHECK_THROWS_AS(s.validate(), PreconditionError);
    auto t = scalar_rd_spec({1.0}, {0.0}, {}, 0.0, 1.0);
    t.eta = 0.6;
    CHECK_THROWS_AS(t.validate(), PreconditionError);
    auto b = scalar_rd_spec({1.0}, {0.0}, {0.0, 1.0});
    b.b[0].k = 3;
    CHECK_THROWS_AS(b.validate(), PreconditionError);
}

TEST_CASE("spectrum positivity") {
    CHECK(spectrum_positivity_check(scalar_rd_spec({1.0}, {}, {}, -1, 1), {{0.0}}).min_real_part == 1.0);
    const auto q = scalar_rd_spec({1.0, 0.0, 1.0}, {}, {}, -2, 2);
    const auto r = spectrum_positivity_check(q, box_samples(q));
    CHECK(r.samples == 5);
    CHECK(r.min_real_part == Approx(1.0));

    const auto degenerate = scalar_rd_spec({0.0, 1.0}, {}, {}, -1, 1);
    CHECK_THROWS_AS(spectrum_positivity_check(degenerate, box_samples(degenerate)), DomainError);
    CHECK_THROWS_AS(rd_problem(degenerate, Grid(1, 17)), DomainError);
    CHECK_FALSE(spectrum_positivity_check(degenerate, box_samples(degenerate), false).positive);
    CHECK_THROWS_AS(spectrum_positivity_check(q, {{5.0}}), DomainError);

    // nonsymmetric system with eigenvalues 1 and 2
    ReactionDiffusionSpec sys;
    sys.N = 2;
    sys.box_lo = {-1, -1};
    sys.box_hi = {1, 1};
    sys.a = {{Polynomial::constant(1.0), Polynomial::constant(5.0)}, {Polynomial::constant(0.0), Polynomial::constant(2.0)}};
    CHECK(spectrum_positivity_check(sys, box_samples(sys, 3)).min_real_part == Approx(1.0));
    CHECK(box_samples(sys, 3).size() == 9);
}

TEST_CASE("reaction-diffusion assembly") {
    SECTION("constant diffusion is the Neumann Laplacian") {
        const Grid g(2, 12);
        const AbstractProblem p = rd_problem(scalar_rd_spec({1.0}, {0.0}, {}), g);
        CHECK(p.state_independent_A);
        CHECK_FALSE(p.F1);
        CHECK_FALSE(p.F2);
        const SparseMatrix diff = p.assemble_A(GridFunction(g, 1)).matrix - neumann_laplacian_operator(g).matrix;
        CHECK(diff.norm() == 0.0);
    }
    SECTION("constant data are stationary") {
        const Grid g(1, 33);
        const AbstractProblem p = rd_problem(kDiv, g);
        CHECK_FALSE(p.state_independent_A);
        ContinuationOptions opt;
        opt.horizon = 0.05;
        const auto r = continue_solution(cosine(g, 0.7, 0.0), p, cfg(0.025, 8, 0.9), opt);
        for (const auto& s : r.trajectory.states) CHECK(sup_norm(s - cosine(g, 0.7, 0.0)) < 1e-12);
    }
    SECTION("mass is conserved for pure diffusion") {
        const Grid g(1, 33);
        ContinuationOptions opt;
        opt.horizon = 0.05;
        const GridFunction u0 = cosine(g, 0.3, 0.5);
        const auto r = continue_solution(u0, rd_problem(scalar_rd_spec({1.0}, {0.0}, {}), g), cfg(0.025, 8, 0.9), opt);
        CHECK(std::abs(total_mass(r.trajectory.states.back()) - total_mass(u0)) < 1e-13);
    }
    SECTION("system layout is node-major") {
        ReactionDiffusionSpec sys;
        sys.N = 2;
        sys.box_lo = {-1, -1};
        sys.box_hi = {1, 1};
        sys.a = {{Polynomial::constant(1.0), Polynomial::constant(0.5)}, {Polynomial::constant(0.0), Polynomial::constant(2.0)}};
        const Grid g(1, 9);
        const AbstractProblem p = rd_problem(sys, g);
        GridFunction u(g, 2);
        u.set_component(1, cosine(g, 0.0, 0.5).values());
        const GridFunction au = p.assemble_A(u).apply(u);
        const Eigen::VectorXd lap = -(StencilCache(g).laplacian() * u.component(1));
        for (Index k = 0; k < g.size(); ++k) {
            CHECK(au(k, 0) == Approx(0.5 * lap[k]).margin(1e-12));
            CHECK(au(k, 1) == Approx(2.0 * lap[k]).margin(1e-12));
        }
    }
}

TEST_CASE("nondivergence assembly against the flux oracle") {
    std::vector<double> errs;
    for (int n : {33, 65, 129}) {
        const Grid g(1, n);
        const AbstractProblem p = rd_problem(kDiv, g);
        const GridFunction u = cosine(g, 0.2, 0.6);
        const GridFunction nd = p.F2(u) - p.assemble_A(u).apply(u);
        const GridFunction oracle = rd_divergence_oracle(kDiv, u);
        errs.push_back(sup_norm(nd - oracle));
        // conservative: the oracle integrates to zero
        CHECK(std::abs(total_mass(oracle)) < 1e-10);

        // closed form (1 + u^2) u'' + 2 u u'^2
        const GridFunction exact = GridFunction::from_function(g, [](double x, double) {
            const double c = 0.2 + 0.6 * std::cos(M_PI * x), d = -0.6 * M_PI * std::sin(M_PI * x),
                         dd = -0.6 * M_PI * M_PI * std::cos(M_PI * x);
            return (1 + c * c) * dd + 2 * c * d * d;
        });
        CHECK(interior_sup(oracle - exact) < 40.0 / (n * n));
    }
    CHECK(std::log2(errs[0] / errs[1]) > 1.8);
    CHECK(std::log2(errs[1] / errs[2]) > 1.8);
    CHECK_THROWS_AS(rd_divergence_oracle(kDiv, GridFunction(Grid(1, 9), 2)), PreconditionError);
}

TEST_CASE("state constraint") {
    const Grid g(1, 17);
    const AbstractProblem p = rd_problem(scalar_rd_spec({1.0}, {0.0, -1.0}, {}, -1, 1), g);
    CHECK(p.admits(cosine(g, 0.0, 0.9)));
    CHECK_FALSE(p.admits(cosine(g, 0.5, 0.9)));
    CHECK_THROWS_AS(p.F1(cosine(g, 0.5, 0.9)), DomainError);
    CHECK_THROWS_AS(p.assemble_A(cosine(g, 0.5, 0.9)), DomainError);
}

TEST_CASE("graph flows") {
    const Grid g(1, 33);
    for (FlowKind k : {FlowKind::surface_diffusion, FlowKind::willmore}) {
        const AbstractProblem p = flow_problem({k, g});
        CHECK(p.order == 4);
        CHECK(p.bc == BoundaryCondition::clamped);
        const GridFunction z(g, 1);
        const SparseMatrix diff = p.assemble_A(z).matrix - clamped_bilaplacian_operator(g).matrix;
        CHECK(diff.norm() < 1e-6 * clamped_bilaplacian_operator(g).matrix.norm());
        CHECK(sup_norm(p.F2(z)) == 0.0);

        // F2 - A h reproduces the geometric right-hand side
        GridFunction h = GridFunction::from_function(g, [](double x, double) { return 0.1 * std::pow(std::sin(M_PI * x), 2); });
        zero_pinned(h, p.pinned());
        const GridFunction lhs = p.F2(h) - p.assemble_A(h).apply(h);
        CHECK(sup_norm(lhs - flow_rhs({k, g}, h)) <= 1e-9 * sup_norm(flow_rhs({k, g}, h)));

        // small data decay
        ContinuationOptions opt;
        opt.horizon = 4e-3;
        const auto r = continue_solution(1e-3 * h, p, cfg(1e-3, 16, 0.95), opt);
        CHECK(sup_norm(r.trajectory.states.back()) < 0.5 * sup_norm(1e-3 * h));
        CHECK(r.trajectory.states.back()(0) == 0.0);
    }
    CHECK(parse_flow_kind("willmore") == FlowKind::willmore);
    CHECK_THROWS_AS(parse_flow_kind("mcf"), PreconditionError);
}

TEST_CASE("quadratic ODE") {
    const Grid g(1, 8);
    const AbstractProblem p = quadratic_ode_problem(g);
    CHECK(sup_norm(p.F1(cosine(g, 3.0, 0.0)) - cosine(g, 9.0, 0.0)) == 0.0);
    CHECK(p.assemble_A(cosine(g, 1.0, 0.0)).matrix.nonZeros() == 0);
    // u(t) = 1/(1/u0 - t); at t = 0.2 with u0 = 1 this is 5/4
    FixedPointConfig c = cfg(0.2, 400, 1.0);
    c.max_halvings = 0;
    const auto w = fixed_point_solve(cosine(g, 1.0, 0.0), p, c);
    CHECK(w.final_state()(3) == Approx(1.25).epsilon(1e-2));
}
