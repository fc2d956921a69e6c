#pragma once

// Ellipticity of the frozen fourth-order symbol and the Lopatinskii-Shapiro
// check for clamped data on a half space.
//
// Freezing tangential frequencies turns the boundary problem into
//   b^2 h - 2 b h'' + h'''' + lambda h = 0,  h(0) = h'(0) = 0
// whose characteristic polynomial z^4 - 2 b z^2 + (b^2 + lambda) factors as
// (z^2 - b)^2 = -lambda.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "qplab/errors.hpp"
#include "qplab/grid.hpp"

namespace qplab {

using Complex = std::complex<double>;

/// (|xi|^2 - beta^2 (grad v . xi)^2)^2 with beta^2 = 1/(1 + |grad v|^2).
inline double principal_symbol(const std::vector<double>& grad_v, const std::vector<double>& xi) {
    if (grad_v.size() != xi.size()) throw PreconditionError("gradient and frequency dimensions differ");
    double g2 = 0.0, x2 = 0.0, gx = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        g2 += grad_v[i] * grad_v[i];
        x2 += xi[i] * xi[i];
        gx += grad_v[i] * xi[i];
    }
    const double s = x2 - gx * gx / (1.0 + g2);
    return s * s;
}

/// (1 - |g|/sqrt(1 + |g|^2))^2, the lower bound on unit frequencies.
inline double ellipticity_lower_bound(double grad_norm) {
    const double r = 1.0 - grad_norm / std::sqrt(1.0 + grad_norm * grad_norm);
    return r * r;
}

/// beta^4 = (1 + |g|^2)^{-2}; the exact minimum over unit frequencies.
inline double ellipticity_beta4(double grad_norm) {
    const double b2 = 1.0 / (1.0 + grad_norm * grad_norm);
    return b2 * b2;
}

struct EllipticityReport {
    double min_ratio = std::numeric_limits<double>::infinity();
    std::size_t argmin_sample = 0;
    std::vector<double> argmin_xi;
    double max_grad = 0.0;
    double analytic_bound = 0.0;   // ellipticity_lower_bound(max_grad)
    double beta4_bound = 0.0;   // ellipticity_beta4(max_grad)
    std::size_t samples = 0;
    bool elliptic = false;
};

/// Unit directions; in 1D only +1 and -1 exist.
inline std::vector<std::vector<double>> unit_directions(int dim, int m) {
    std::vector<std::vector<double>> out;
    if (dim == 1) return {{1.0}, {-1.0}};
    for (int k = 0; k < m; ++k) {
        const double a = std::numbers::pi * k / m;
        out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
}

inline EllipticityReport ellipticity_scan(const std::vector<std::vector<double>>& grads, int directions) {
    if (directions < 16) throw PreconditionError("ellipticity scan needs at least 16 directions");
    if (grads.empty()) throw PreconditionError("no gradient samples");
    const int dim = static_cast<int>(grads.front().size());
    const auto xis = unit_directions(dim, directions);
    EllipticityReport r;
    r.samples = grads.size();
    for (std::size_t s = 0; s < grads.size(); ++s) {
        double g2 = 0.0;
        for (double g : grads[s]) g2 += g * g;
        r.max_grad = std::max(r.max_grad, std::sqrt(g2));
        for (const auto& xi : xis) {
            const double v = principal_symbol(grads[s], xi);
            if (v < r.min_ratio) {
                r.min_ratio = v;
                r.argmin_sample = s;
                r.argmin_xi = xi;
            }
        }
    }
    r.analytic_bound = ellipticity_lower_bound(r.max_grad);
    r.beta4_bound = ellipticity_beta4(r.max_grad);
    r.elliptic = r.min_ratio > 0.0;
    if (!r.elliptic) throw DomainError("principal symbol is not positive on the sampled set");
    return r;
}

/// Nodal gradients of a scalar field as scan samples.
inline std::vector<std::vector<double>> gradient_samples(const GridFunction& v) {
    if (v.components() != 1) throw PreconditionError("gradient samples need a scalar field");
    const Grid& g = v.grid();
    std::vector<Eigen::VectorXd> d;
    d.push_back(derivative_matrix(g, {1, 0}) * v.values());
    if (g.dim() == 2) d.push_back(derivative_matrix(g, {0, 1}) * v.values());
    std::vector<std::vector<double>> out(static_cast<std::size_t>(g.size()));
    for (Index k = 0; k < g.size(); ++k)
        for (const auto& c : d) out[static_cast<std::size_t>(k)].push_back(c[k]);
    return out;
}

inline EllipticityReport ellipticity_scan(const GridFunction& v, int directions) {
    return ellipticity_scan(gradient_samples(v), directions);
}

// ---------------------------------------------------------------------------

struct LSReport {
    double b = 0.0;
    Complex lambda;
    std::array<Complex, 2> roots_neg;
    std::array<Complex, 2> roots_rejected;
    bool confluent = false;
    bool boundary_case = false;   // a root on the imaginary axis
    int negative_roots = 0;       // among all four roots
    double residual = 0.0;        // max relative quartic residual over the selected roots
};

inline double quartic_residual(double b, Complex lambda, Complex z) {
    const Complex z2 = z * z;
    const Complex v = z2 * z2 - 2.0 * b * z2 + (b * b + lambda);
    const double scale = std::norm(z2) + 2.0 * b * std::abs(z2) + b * b + std::abs(lambda);
    return std::abs(v) / scale;
}

inline LSReport ls_roots(double b, Complex lambda) {
    if (!(b > 0.0)) throw PreconditionError("b must be positive");
    if (lambda.real() < 0.0) throw PreconditionError("lambda must lie in the closed right half plane");
    LSReport r;
    r.b = b;
    r.lambda = lambda;
    r.confluent = lambda == Complex(0.0, 0.0);
    const Complex w = std::sqrt(-lambda);
    // Principal square roots have nonnegative real part; the decaying root is minus that.
    const Complex z1 = -std::sqrt(b + w);
    const Complex z2 = -std::sqrt(b - w);
    r.roots_neg = {z1, z2};
    r.roots_rejected = {-z1, -z2};
    const double tiny = 64.0 * std::numeric_limits<double>::epsilon() * std::sqrt(b + std::abs(lambda));
    r.boundary_case = std::abs(z1.real()) <= tiny || std::abs(z2.real()) <= tiny;
    for (const Complex& z : {z1, z2, -z1, -z2}) r.negative_roots += z.real() < 0.0;
    r.residual = std::max(quartic_residual(b, lambda, z1), quartic_residual(b, lambda, z2));
    return r;
}

/// |det [[1, 1], [z1, z2]]| for distinct roots, 1 for the confluent basis {e^{zx}, x e^{zx}}.
inline double ls_determinant(const LSReport& r) {
    if (r.confluent) return 1.0;
    // z1 - z2 = (z1^2 - z2^2)/(z1 + z2) avoids cancellation when the roots nearly coincide.
    const Complex w = std::sqrt(-r.lambda);
    return std::abs(2.0 * w / (r.roots_neg[0] + r.roots_neg[1]));
}

struct LSScanReport {
    double min_det_normalized = std::numeric_limits<double>::infinity();
    double argmin_b = 0.0;
    Complex argmin_lambda;
    double max_residual = 0.0;
    std::size_t points = 0;
    bool two_negative_roots_everywhere = true;
    std::size_t boundary_cases = 0;
};

inline std::vector<double> log_space(double lo, double hi, int count) {
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw PreconditionError("invalid log-spaced range");
    std::vector<double> out;
    for (int k = 0; k < count; ++k) {
        const double s = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        out.push_back(std::exp(std::log(lo) + s * (std::log(hi) - std::log(lo))));
    }
    return out;
}

/// Moduli x phases in [-pi/2, pi/2], plus lambda = 0.
inline std::vector<Complex> lambda_grid(double mod_lo, double mod_hi, int moduli, int phases) {
    std::vector<Complex> out{Complex(0.0, 0.0)};
    for (double m : log_space(mod_lo, mod_hi, moduli))
        for (int k = 0; k < phases; ++k) {
            const double a = phases == 1 ? 0.0 : -0.5 * std::numbers::pi + std::numbers::pi * k / (phases - 1);
            out.push_back(std::polar(m, a));
        }
    // polar() at +-pi/2 leaves a -1e-16 real part; clamp to the imaginary axis.
    for (auto& l : out)
        if (l.real() < 0.0) l = Complex(0.0, l.imag());
    return out;
}

inline std::vector<Complex> default_lambda_grid() { return lambda_grid(1e-3, 1e6, 12, 9); }

inline LSScanReport ls_scan(const std::vector<double>& bs, const std::vector<Complex>& lambdas) {
    if (bs.empty()) throw PreconditionError("empty b grid");
    if (lambdas.empty()) throw PreconditionError("empty lambda grid");
    LSScanReport r;
    for (double b : bs)
        for (const Complex& l : lambdas) {
            const LSReport rep = ls_roots(b, l);
            const double nd = ls_determinant(rep) / (std::abs(rep.roots_neg[0]) + std::abs(rep.roots_neg[1]));
            ++r.points;
            r.max_residual = std::max(r.max_residual, rep.residual);
            r.boundary_cases += rep.boundary_case;
            // Confluent points count the double root twice.
            if (!rep.confluent && rep.negative_roots != 2) r.two_negative_roots_everywhere = false;
            if (nd < r.min_det_normalized) {
                r.min_det_normalized = nd;
                r.argmin_b = b;
                r.argmin_lambda = l;
            }
        }
    return r;
}

}  // namespace qplab
