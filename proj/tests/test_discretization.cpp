#include <catch_amalgamated.hpp>

#include <random>

#include "qplab/banded.hpp"
#include "qplab/grid.hpp"
#include "qplab/spectral.hpp"

using namespace qplab;
using Catch::Approx;

namespace {

GridFunction fn(const Grid& g, double (*f)(double, double)) { return GridFunction::from_function(g, f); }

double interior_max(const GridFunction& u, int margin) {
    const Grid& g = u.grid();
    double m = 0.0;
    for (Index k = 0; k < g.size(); ++k) {
        const int n = g.nodes_per_axis();
        const bool inner = g.ix(k) >= margin && g.ix(k) < n - margin &&
                           (g.dim() == 1 || (g.iy(k) >= margin && g.iy(k) < n - margin));
        if (inner) m = std::max(m, std::abs(u(k)));
    }
    return m;
}

}  // namespace

TEST_CASE("grid basics") {
    const Grid g(2, 9);
    CHECK(g.size() == 81);
    CHECK(g.spacing() == 0.125);
    CHECK(g.index(2, 3) == 29);
    CHECK(g.x(29) == 0.25);
    CHECK(g.y(29) == 0.375);
    CHECK(g.on_boundary(g.index(0, 2)));
    CHECK_FALSE(g.on_boundary(g.index(2, 2)));
    CHECK(g.quadrature_weights().sum() == Approx(1.0));
    CHECK_THROWS_AS(Grid(3, 16), PreconditionError);
    CHECK_THROWS_AS(Grid(1, 4), PreconditionError);
    CHECK(parse_boundary_condition("clamped") == BoundaryCondition::clamped);
    CHECK_THROWS_AS(parse_boundary_condition("robin"), PreconditionError);
}

TEST_CASE("stencils are exact on low-degree polynomials") {
    const Grid g(1, 21);
    const auto d2 = derivative(fn(g, [](double x, double) { return x * x; }), {2, 0}, BoundaryCondition::neumann);
    const auto d4 = derivative(fn(g, [](double x, double) { return x * x * x * x; }), {4, 0}, BoundaryCondition::neumann);
    for (Index k = 2; k < g.size() - 2; ++k) {
        CHECK(d2(k) == Approx(2.0).margin(1e-9));
        CHECK(d4(k) == Approx(24.0).margin(1e-6));
    }
    const Grid g2(2, 17);
    const auto dxy = derivative(fn(g2, [](double x, double y) { return x * x * y * y; }), {2, 2}, BoundaryCondition::neumann);
    CHECK(dxy(g2.index(8, 8)) == Approx(4.0).margin(1e-8));
}

TEST_CASE("odd derivatives of even data vanish at a Neumann wall") {
    const Grid g(1, 33);
    const auto u = fn(g, [](double x, double) { return std::cos(M_PI * x); });
    CHECK(std::abs(derivative(u, {1, 0}, BoundaryCondition::neumann)(0)) < 1e-14);
    CHECK(std::abs(derivative(u, {3, 0}, BoundaryCondition::neumann)(g.size() - 1)) < 1e-10);
}

TEST_CASE("unsupported derivative orders") {
    const Grid g(1, 16), g2(2, 16);
    CHECK_THROWS_AS(derivative_matrix(g, {5, 0}), UnsupportedOperation);
    CHECK_THROWS_AS(derivative_matrix(g2, {3, 2}), UnsupportedOperation);
    CHECK_THROWS_AS(derivative_matrix(g, {0, 1}), UnsupportedOperation);
    StencilCache c(g);
    CHECK_THROWS_AS(c({2, 3}), UnsupportedOperation);
}

TEST_CASE("second-order accuracy under refinement") {
    auto err = [](int n, MultiIndex s) {
        const Grid g(1, n);
        const auto u = fn(g, [](double x, double) { return std::cos(2 * M_PI * x) + std::cos(M_PI * x); });
        const auto d = derivative(u, s, BoundaryCondition::neumann);
        const auto ex = GridFunction::from_function(g, [&](double x, double) {
            const double a = 2 * M_PI, b = M_PI;
            const int k = s.x;
            // derivatives of cos cycle with period 4
            auto dc = [&](double w) {
                switch (k % 4) {
                    case 0: return std::pow(w, k) * std::cos(w * x);
                    case 1: return -std::pow(w, k) * std::sin(w * x);
                    case 2: return -std::pow(w, k) * std::cos(w * x);
                    default: return std::pow(w, k) * std::sin(w * x);
                }
            };
            return dc(a) + dc(b);
        });
        return sup_norm(d - ex);
    };
    for (int k = 1; k <= 4; ++k) {
        const MultiIndex s{k, 0};
        const double e32 = err(32, s), e64 = err(64, s), e128 = err(128, s);
        INFO("order " << k << ": " << e32 << " " << e64 << " " << e128);
        CHECK(std::log(e32 / e64) / std::log(63.0 / 31.0) >= 1.9);
        CHECK(std::log(e64 / e128) / std::log(127.0 / 63.0) >= 1.9);
    }
}

TEST_CASE("composed first differences match the second difference to O(h^2)") {
    double prev = 0.0;
    for (int n : {33, 65, 129}) {
        const Grid g(1, n);
        const auto u = fn(g, [](double x, double) { return std::sin(3 * x) + x * x * x; });
        const auto d11 = derivative(derivative(u, {1, 0}, BoundaryCondition::neumann), {1, 0}, BoundaryCondition::neumann);
        const auto d2 = derivative(u, {2, 0}, BoundaryCondition::neumann);
        const double e = interior_max(d11 - d2, 2);
        if (prev > 0.0) CHECK(prev / e > 3.6);
        prev = e;
    }
}

TEST_CASE("clamped first-row stencil is 7, -4, 1") {
    const Grid g(1, 16);
    const auto op = clamped_bilaplacian_operator(g);
    const double h4 = std::pow(g.spacing(), 4);
    CHECK(op.matrix.coeff(1, 1) * h4 == Approx(7.0));
    CHECK(op.matrix.coeff(1, 2) * h4 == Approx(-4.0));
    CHECK(op.matrix.coeff(1, 3) * h4 == Approx(1.0));
    CHECK(op.matrix.coeff(0, 0) == 0.0);
    CHECK(op.matrix.coeff(1, 0) == 0.0);
}

TEST_CASE("reference operators are symmetric in the trapezoid pairing") {
    for (int dim : {1, 2}) {
        const Grid g(dim, dim == 1 ? 40 : 12);
        CHECK(weighted_asymmetry(neumann_laplacian_operator(g)) < 1e-10);
        CHECK(weighted_asymmetry(clamped_bilaplacian_operator(g)) < 1e-10);
    }
}

TEST_CASE("banded solver") {
    const Grid g(1, 32);
    SECTION("identity") {
        const auto rhs = fn(g, [](double x, double) { return std::exp(x); });
        CHECK(sup_norm(solve_banded(identity_operator(g, 1), rhs) - rhs) == 0.0);
    }
    SECTION("implicit Euler on an eigenvector") {
        const auto op = neumann_laplacian_operator(g);
        const auto proxy = eigendecompose(op);
        const double dt = 1e-3;
        LinearOperator m = op;
        SparseMatrix id(g.size(), g.size());
        id.setIdentity();
        m.matrix = id + dt * op.matrix;
        for (int mode : {1, 5, 20}) {
            const GridFunction v(g, 1, proxy.eigenvectors.col(mode));
            const auto x = solve_banded(m, v);
            CHECK(sup_norm(x - (1.0 / (1.0 + dt * proxy.eigenvalues[mode])) * v) < 1e-10);
        }
    }
    SECTION("random banded SPD system against a dense solve") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-1, 1);
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(32, 32);
        for (int i = 0; i < 32; ++i)
            for (int j = std::max(0, i - 2); j <= i; ++j) b(i, j) = u(rng);
        Eigen::MatrixXd a = b * b.transpose() + 32.0 * Eigen::MatrixXd::Identity(32, 32);
        const Eigen::VectorXd rhs = Eigen::VectorXd::NullaryExpr(32, [&] { return u(rng); });
        const Eigen::VectorXd dense = a.llt().solve(rhs);
        const LinearOperator op{g, 1, a.sparseView(), {}};
        CHECK((solve_banded(op, GridFunction(g, 1, rhs)).values() - dense).cwiseAbs().maxCoeff() < 1e-8);
    }
    SECTION("nonsymmetric system needs pivoting") {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(32, 32);
        for (int i = 0; i < 32; ++i) {
            a(i, i) = 1e-3 * (i + 1);
            if (i > 0) a(i, i - 1) = 2.0;
            if (i < 31) a(i, i + 1) = 1.0;
        }
        const Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(32, -1, 1);
        const LinearOperator op{g, 1, a.sparseView(), {}};
        const Eigen::VectorXd x = solve_banded(op, GridFunction(g, 1, rhs)).values();
        CHECK((a * x - rhs).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("singular pivot is reported") {
        const auto op = clamped_bilaplacian_operator(g);  // pinned rows are zero
        try {
            solve_banded(op, GridFunction(g, 1));
            FAIL("expected SolverError");
        } catch (const SolverError& e) {
            CHECK(e.pivot() == 0);
        }
    }
}

TEST_CASE("eigendecomposition") {
    SECTION("Neumann Laplacian spectrum") {
        const Grid g(1, 33);
        const auto p = eigendecompose(neumann_laplacian_operator(g));
        const double h = g.spacing();
        for (int k = 0; k < 33; ++k) CHECK(p.eigenvalues[k] == Approx(2.0 / (h * h) * (1.0 - std::cos(k * M_PI * h))).margin(1e-8));
        // lowest modes are cos(k pi x) up to sign and normalisation
        for (int k = 1; k <= 3; ++k) {
            GridFunction ck = GridFunction::from_function(g, [&](double x, double) { return std::cos(k * M_PI * x); });
            GridFunction v(g, 1, p.eigenvectors.col(k));
            const double cosang = std::abs(l2_inner(ck, v)) / std::sqrt(l2_inner(ck, ck) * l2_inner(v, v));
            CHECK(cosang == Approx(1.0).epsilon(1e-12));
        }
    }
    SECTION("zero operator") {
        const Grid g(1, 12);
        const LinearOperator z{g, 1, SparseMatrix(12, 12), {}};
        CHECK(eigendecompose(z).eigenvalues.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("clamped bilaplacian is positive and matches the quadratic form") {
        const Grid g(1, 40);
        const auto op = clamped_bilaplacian_operator(g);
        const auto p = eigendecompose(op);
        CHECK(p.modes() == 38);
        CHECK(p.eigenvalues[0] > 0.0);
        CHECK(p.eigenvalues[0] == Approx(500.56).epsilon(0.02));
        const GridFunction v(g, 1, p.eigenvectors.col(0));
        CHECK(l2_inner(v, op.apply(v)) / l2_inner(v, v) == Approx(p.eigenvalues[0]).epsilon(1e-10));
    }
    SECTION("asymmetric operators are rejected") {
        const Grid g(1, 12);
        SparseMatrix m(12, 12);
        m.insert(0, 1) = 1.0;
        CHECK_THROWS_AS(eigendecompose({g, 1, m, {}}), DomainError);
        CHECK_THROWS_AS(eigendecompose(neumann_laplacian_operator(g), false), UnsupportedOperation);
    }
    SECTION("size cap") {
        const Grid g(2, 65);
        CHECK_THROWS_AS(eigendecompose(neumann_laplacian_operator(g)), UnsupportedOperation);
    }
}

TEST_CASE("proxy norm") {
    const Grid g(1, 24);
    const auto p = eigendecompose(neumann_laplacian_operator(g));
    const GridFunction one = fn(g, [](double, double) { return 1.0; });
    CHECK(proxy_norm(one, 0.0, p) == Approx(lq_norm(one, 2.0)));
    CHECK(proxy_norm(one, 1.0, p) == Approx(1.0));
    const GridFunction v3(g, 1, p.eigenvectors.col(3));
    CHECK(proxy_norm(v3, 1.0, p) == Approx((1.0 + p.eigenvalues[3]) * lq_norm(v3, 2.0)));
    const GridFunction mix(g, 1, 2.0 * p.eigenvectors.col(2) - 0.5 * p.eigenvectors.col(7));
    const double th = 0.3;
    const double expect = std::sqrt(4.0 * std::pow(1 + p.eigenvalues[2], 2 * th) + 0.25 * std::pow(1 + p.eigenvalues[7], 2 * th));
    CHECK(proxy_norm(mix, th, p) == Approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(proxy_norm(mix, 1.5, p), DomainError);
    CHECK_THROWS_AS(proxy_norm(mix, -0.1, p), DomainError);
}
