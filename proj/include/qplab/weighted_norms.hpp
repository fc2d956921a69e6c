#pragma once

// Time-weighted L_p norms of discrete trajectories.
//
//   ||u||_{L_{p,mu}(a,b;X)} = ( int_a^b (t^{1-mu} |u(t)|_X)^p dt )^{1/p}
//
// Quadrature is the composite trapezoid rule on the trajectory's own time
// nodes; states between nodes are linear in t. The weight vanishes at t = 0
// when mu < 1 and equals one when mu = 1.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "qplab/errors.hpp"
#include "qplab/grid.hpp"
#include "qplab/spectral.hpp"

namespace qplab {

struct WeightedTrajectory {
    std::vector<double> times;
    std::vector<GridFunction> states;
    std::vector<GridFunction> derivs;
    double mu = 1.0;
    double p = 2.0;

    std::size_t size() const noexcept { return times.size(); }
    double start() const { return times.front(); }
    double end() const { return times.back(); }
    bool has_derivs() const noexcept { return !derivs.empty(); }

    void validate() const {
        if (times.empty()) throw PreconditionError("empty trajectory");
        if (states.size() != times.size()) throw PreconditionError("states and times differ in length");
        if (!derivs.empty() && derivs.size() != times.size()) throw PreconditionError("derivs and times differ in length");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw PreconditionError("trajectory times must increase strictly");
        for (const auto& s : states)
            if (!(s.grid() == states.front().grid())) throw PreconditionError("trajectory states live on different grids");
    }

    /// State at time t by linear interpolation between neighbouring samples.
    GridFunction state_at(double t) const { return interpolate(states, t); }
    GridFunction deriv_at(double t) const { return interpolate(derivs, t); }

private:
    GridFunction interpolate(const std::vector<GridFunction>& f, double t) const {
        if (t < times.front() || t > times.back()) throw RangeError("time outside trajectory");
        auto it = std::lower_bound(times.begin(), times.end(), t);
        const auto i = static_cast<std::size_t>(it - times.begin());
        if (*it == t) return f[i];
        const double s = (t - times[i - 1]) / (times[i] - times[i - 1]);
        return (1.0 - s) * f[i - 1] + s * f[i];
    }
};

/// Backward differences (forward at the first sample); used when a solver does not provide u'.
inline std::vector<GridFunction> finite_difference_derivs(const std::vector<double>& times,
                                                          const std::vector<GridFunction>& states) {
    std::vector<GridFunction> d;
    d.reserve(states.size());
    if (states.size() < 2) {
        for (const auto& s : states) d.emplace_back(s.grid(), s.components());
        return d;
    }
    for (std::size_t k = 0; k < states.size(); ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1;
        const std::size_t b = k == 0 ? 1 : k;
        d.push_back((1.0 / (times[b] - times[a])) * (states[b] - states[a]));
    }
    return d;
}

/// (1 + (1-mu)p)^{-1/p} T^{1/p + 1 - mu}: the L_{p,mu}(0,T) norm of the constant 1.
inline double sigma_of_T(double T, double mu, double p) {
    return std::pow(1.0 + (1.0 - mu) * p, -1.0 / p) * std::pow(T, 1.0 / p + 1.0 - mu);
}

// ---------------------------------------------------------------------------

/// Spatial norm selector.
struct SpatialNorm {
    enum class Kind { lq, x1, x_theta };
    Kind kind = Kind::lq;
    double q = 2.0;
    int order = 2;                   // x1: highest derivative order included
    double theta = 0.0;              // x_theta
    const SpectralProxy* proxy = nullptr;
    std::shared_ptr<const StencilCache> stencils;

    static SpatialNorm lq(double q) { return {Kind::lq, q, 2, 0.0, nullptr, nullptr}; }

    /// |u|_q + sum over 1 <= |sigma| <= order of |D^sigma u|_q.
    static SpatialNorm x1(double q, int order, const Grid& grid) {
        return {Kind::x1, q, order, 0.0, nullptr, StencilCache::make(grid)};
    }
    static SpatialNorm x_theta(double theta, const SpectralProxy& proxy) {
        return {Kind::x_theta, 2.0, 2, theta, &proxy, nullptr};
    }

    double operator()(const GridFunction& u) const {
        switch (kind) {
            case Kind::lq:
                return lq_norm(u, q);
            case Kind::x_theta:
                return proxy_norm(u, theta, *proxy);
            case Kind::x1: {
                if (!stencils || !(stencils->grid() == u.grid())) throw PreconditionError("X1 norm built for another grid");
                double acc = lq_norm(u, q);
                for (const MultiIndex& s : multi_indices_up_to(u.grid().dim(), order)) {
                    GridFunction d(u.grid(), u.components());
                    for (int c = 0; c < u.components(); ++c) d.set_component(c, stencils->apply(s, u.component(c)));
                    acc += lq_norm(d, q);
                }
                return acc;
            }
        }
        return 0.0;
    }
};

enum class Field { state, derivative };

namespace detail {

/// Trapezoid sum of g(t) = (t^{1-mu} n(t))^p over [a, b] where n is evaluated
/// at every trajectory node inside the interval and at interpolated endpoints.
template <class NormAt>
double weighted_integral(const WeightedTrajectory& traj, double a, double b, double mu, double p, NormAt&& norm_at) {
    std::vector<double> ts;
    ts.push_back(a);
    for (double t : traj.times)
        if (t > a && t < b) ts.push_back(t);
    ts.push_back(b);
    std::vector<double> g(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) g[i] = std::pow(std::pow(ts[i], 1.0 - mu) * norm_at(ts[i]), p);
    double acc = 0.0;
    for (std::size_t i = 1; i < ts.size(); ++i) acc += 0.5 * (ts[i] - ts[i - 1]) * (g[i] + g[i - 1]);
    return acc;
}

inline void check_interval(const WeightedTrajectory& traj, double a, double b) {
    traj.validate();
    if (a > b) throw RangeError("interval endpoints reversed");
    if (a < traj.start() || b > traj.end()) throw RangeError("interval not covered by trajectory");
}

}  // namespace detail

inline double weighted_Lp_norm(const WeightedTrajectory& traj, const SpatialNorm& norm, double a, double b,
                               Field field = Field::state) {
    detail::check_interval(traj, a, b);
    if (field == Field::derivative && !traj.has_derivs()) throw PreconditionError("trajectory carries no derivatives");
    if (a == b) return 0.0;
    auto norm_at = [&](double t) { return norm(field == Field::state ? traj.state_at(t) : traj.deriv_at(t)); };
    return std::pow(detail::weighted_integral(traj, a, b, traj.mu, traj.p, norm_at), 1.0 / traj.p);
}

struct E1Norm {
    double state = 0.0;   // ||u||_{E_{0,mu}}
    double deriv = 0.0;   // ||u'||_{E_{0,mu}}
    double x1 = 0.0;      // ||u||_{L_{p,mu}(X_1)}
    double total() const noexcept { return state + deriv + x1; }
};

/// ||u||_{E_{0,mu}} + ||u'||_{E_{0,mu}} + ||u||_{L_{p,mu}(X_1)} with X_0 = L_q.
inline E1Norm E1mu_parts(const WeightedTrajectory& traj, double a, double b, double q, int order) {
    if (!traj.has_derivs()) throw PreconditionError("E1 norm needs trajectory derivatives");
    detail::check_interval(traj, a, b);
    E1Norm n;
    n.state = weighted_Lp_norm(traj, SpatialNorm::lq(q), a, b, Field::state);
    n.deriv = weighted_Lp_norm(traj, SpatialNorm::lq(q), a, b, Field::derivative);
    n.x1 = weighted_Lp_norm(traj, SpatialNorm::x1(q, order, traj.states.front().grid()), a, b, Field::state);
    return n;
}

inline double E1mu_norm(const WeightedTrajectory& traj, double a, double b, double q, int order) {
    return E1mu_parts(traj, a, b, q, order).total();
}

// ---------------------------------------------------------------------------

struct InterpolationReport {
    double lhs = 0.0;           // |w|_{X_beta}
    double rhs_product = 0.0;   // |w|_{X_{gamma,mu}}^{1-alpha} |w|_{X_1}^alpha
    double alpha = 0.0;
    double holds_with_c = 0.0;  // smallest admissible constant for this w
};

/// alpha from alpha (1 - mu + 1/p) = beta - mu + 1/p.
inline double interpolation_alpha(double beta, double mu, double p) {
    return (beta - mu + 1.0 / p) / (1.0 - mu + 1.0 / p);
}

inline InterpolationReport verify_interpolation_inequality(const GridFunction& u, double beta, double mu, double p,
                                                           const SpectralProxy& proxy) {
    const double g = mu - 1.0 / p;
    if (!(beta > g && beta < 1.0)) throw DomainError("beta must lie in (mu - 1/p, 1)");
    InterpolationReport r;
    r.alpha = interpolation_alpha(beta, mu, p);
    r.lhs = proxy_norm(u, beta, proxy);
    r.rhs_product = std::pow(proxy_norm(u, g, proxy), 1.0 - r.alpha) * std::pow(proxy_norm(u, 1.0, proxy), r.alpha);
    r.holds_with_c = r.rhs_product > 0.0 ? r.lhs / r.rhs_product : (r.lhs > 0.0 ? INFINITY : 0.0);
    return r;
}

// ---------------------------------------------------------------------------

struct SmoothingReport {
    double weighted = 0.0;          // ||v||_{E_{1,mu}(delta/2, delta)}
    double unweighted_tail = 0.0;   // (delta/2)^{1-mu} ||v||_{E_1(delta/2, delta)}
    bool inequality_holds = false;
};

/// Compares both sides of (delta/2)^{1-mu} ||v||_{E_1} <= ||v||_{E_{1,mu}} on [delta/2, delta].
inline SmoothingReport smoothing_check(const WeightedTrajectory& traj, double delta, double interval_end, double q,
                                       int order) {
    traj.validate();
    const double a = 0.5 * delta;
    if (!(a > 0.0) || !(delta <= interval_end) || interval_end > traj.end())
        throw RangeError("smoothing window must satisfy 0 < delta/2 < delta <= T");
    const auto inside = std::count_if(traj.times.begin(), traj.times.end(), [&](double t) { return t >= a && t <= delta; });
    if (inside < 2) throw RangeError("time grid does not resolve [delta/2, delta]");

    SmoothingReport r;
    r.weighted = E1mu_norm(traj, a, delta, q, order);
    WeightedTrajectory flat = traj;
    flat.mu = 1.0;
    r.unweighted_tail = std::pow(a, 1.0 - traj.mu) * E1mu_norm(flat, a, delta, q, order);
    r.inequality_holds = r.unweighted_tail <= r.weighted * (1.0 + 1e-12);
    return r;
}

}  // namespace qplab
