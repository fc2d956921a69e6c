#pragma once

// Frozen-coefficient Picard iteration for u' + A(u) u = F1(u) + F2(u) on short
// windows, glued into a continuation up to a horizon or a blow-up.
//
// On a window [0, T] with initial datum u1 the operator is frozen at A0 = A(u1)
// and each iterate solves
//   u' + A0 u = F1(v) + F2(v) + (A0 - A(v)) v,   u(0) = u1
// on the graded grid t_k = T (k/K)^g, g = max(1, 1/(mu - 1/p)).

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qplab/banded.hpp"
#include "qplab/errors.hpp"
#include "qplab/grid.hpp"
#include "qplab/spectral.hpp"
#include "qplab/weighted_norms.hpp"

namespace qplab {

struct AbstractProblem {
    std::string name;
    Grid grid;
    int components = 1;
    int order = 2;  // 2m, also the highest derivative in the X1 norm
    BoundaryCondition bc = BoundaryCondition::neumann;
    std::function<LinearOperator(const GridFunction&)> assemble_A;
    std::function<GridFunction(const GridFunction&)> F1;
    std::function<GridFunction(const GridFunction&)> F2;
    std::function<bool(const GridFunction&)> state_constraint;  // true inside U
    bool state_independent_A = false;

    std::vector<char> pinned() const { return pinned_dofs(grid, components, bc); }

    bool admits(const GridFunction& u) const {
        return u.all_finite() && (!state_constraint || state_constraint(u));
    }
};

enum class Integrator { automatic, implicit_euler, exponential };

inline const char* to_string(Integrator i) {
    switch (i) {
        case Integrator::automatic: return "automatic";
        case Integrator::implicit_euler: return "implicit_euler";
        case Integrator::exponential: return "exponential";
    }
    return "?";
}

inline Integrator parse_integrator(const std::string& s) {
    if (s == "automatic") return Integrator::automatic;
    if (s == "implicit_euler") return Integrator::implicit_euler;
    if (s == "exponential") return Integrator::exponential;
    throw PreconditionError("unknown integrator '" + s + "'");
}

struct FixedPointConfig {
    double window = 0.1;
    double radius = 1.0;
    double contraction_target = 0.5;
    int max_iter = 50;
    double tol = 1e-10;
    int time_steps = 64;
    double mu = 1.0;
    double p = 2.0;
    double q = 2.0;
    int max_halvings = 20;
    Integrator integrator = Integrator::automatic;

    double grading() const { return std::max(1.0, 1.0 / (mu - 1.0 / p)); }

    void validate() const {
        if (!(window > 0.0)) throw PreconditionError("window length must be positive");
        if (!(tol > 0.0)) throw PreconditionError("tolerance must be positive");
        if (!(radius > 0.0 && radius <= 1.0)) throw PreconditionError("radius must lie in (0,1]");
        if (time_steps < 1 || max_iter < 1) throw PreconditionError("time_steps and max_iter must be positive");
        if (!(mu > 1.0 / p && mu <= 1.0)) throw PreconditionError("mu must lie in (1/p, 1]");
    }
};

inline std::vector<double> graded_times(double T, int steps, double grading) {
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) t[static_cast<std::size_t>(k)] = T * std::pow(static_cast<double>(k) / steps, grading);
    t.back() = T;
    return t;
}

// ---------------------------------------------------------------------------

/// Time stepper for u' + A0 u = g on a fixed grid. The exponential variant
/// (exponential Euler with right-endpoint forcing) is exact for g = 0 and needs
/// A0 self-adjoint in the trapezoid pairing; otherwise implicit Euler is used.
class FrozenStepper {
public:
    FrozenStepper(LinearOperator a0, std::vector<double> times, Integrator mode,
                  std::shared_ptr<const SpectralProxy> proxy = nullptr)
        : a0_(std::move(a0)), times_(std::move(times)) {
        bool expo = mode == Integrator::exponential;
        if (mode == Integrator::automatic)
            expo = proxy != nullptr || (a0_.dofs() <= kSpectralCap && weighted_asymmetry(a0_) <= 1e-8);
        if (expo) {
            proxy_ = proxy ? std::move(proxy) : std::make_shared<const SpectralProxy>(eigendecompose(a0_));
            return;
        }
        SparseMatrix id(a0_.dofs(), a0_.dofs());
        id.setIdentity();
        lu_.reserve(times_.size() - 1);
        for (std::size_t k = 1; k < times_.size(); ++k) {
            const double dt = times_[k] - times_[k - 1];
            lu_.emplace_back(SparseMatrix(id + dt * a0_.matrix));
        }
    }

    bool exponential() const noexcept { return proxy_ != nullptr; }
    const LinearOperator& op() const noexcept { return a0_; }
    const std::vector<double>& times() const noexcept { return times_; }
    std::shared_ptr<const SpectralProxy> proxy() const { return proxy_; }

    /// u_k from u_{k-1} and the forcing sampled at t_k.
    Eigen::VectorXd step(std::size_t k, const Eigen::VectorXd& prev, const Eigen::VectorXd& g) const {
        const double dt = times_[k] - times_[k - 1];
        if (!proxy_) return lu_[k - 1].solve(prev + dt * g);
        const Eigen::VectorXd cu = proxy_->coefficients(prev);
        const Eigen::VectorXd cg = proxy_->coefficients(g);
        Eigen::VectorXd c(cu.size());
        for (Index m = 0; m < c.size(); ++m) {
            const double z = dt * proxy_->eigenvalues[m];
            const double phi1 = std::abs(z) < 1e-12 ? 1.0 : -std::expm1(-z) / z;
            c[m] = std::exp(-z) * cu[m] + dt * phi1 * cg[m];
        }
        return proxy_->eigenvectors * c;
    }

private:
    LinearOperator a0_;
    std::vector<double> times_;
    std::shared_ptr<const SpectralProxy> proxy_;
    std::vector<BandedLU> lu_;
};

namespace detail {

inline GridFunction checked(const GridFunction& f, const char* what) {
    if (!f.all_finite()) throw DomainError(std::string(what) + " produced non-finite values");
    return f;
}

inline GridFunction zero_like(const AbstractProblem& prob) { return GridFunction(prob.grid, prob.components); }

/// Runs the stepper for a forcing sequence g_0..g_K and records u' = g - A0 u.
inline WeightedTrajectory integrate(const FrozenStepper& st, const GridFunction& u1,
                                    const std::vector<GridFunction>& forcing, const FixedPointConfig& cfg) {
    WeightedTrajectory tr;
    tr.times = st.times();
    tr.mu = cfg.mu;
    tr.p = cfg.p;
    tr.states.reserve(tr.times.size());
    tr.derivs.reserve(tr.times.size());
    Eigen::VectorXd u = u1.values();
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        if (k > 0) u = st.step(k, u, forcing[k].values());
        if (!u.allFinite()) throw DomainError("time step produced non-finite values");
        tr.states.emplace_back(u1.grid(), u1.components(), u);
        tr.derivs.emplace_back(u1.grid(), u1.components(), Eigen::VectorXd(forcing[k].values() - st.op().matrix * u));
    }
    return tr;
}

inline WeightedTrajectory difference(const WeightedTrajectory& a, const WeightedTrajectory& b) {
    WeightedTrajectory d = a;
    for (std::size_t k = 0; k < d.size(); ++k) {
        d.states[k] -= b.states[k];
        d.derivs[k] -= b.derivs[k];
    }
    return d;
}

}  // namespace detail

/// Frozen linear problem w' + A(u0) w = 0, w(0) = u0.
inline WeightedTrajectory reference_solution(const GridFunction& u0, const AbstractProblem& prob, const FrozenStepper& st,
                                             const FixedPointConfig& cfg) {
    if (!prob.admits(u0)) throw DomainError("initial datum violates the state constraint");
    const std::vector<GridFunction> zero(st.times().size(), detail::zero_like(prob));
    return detail::integrate(st, u0, zero, cfg);
}

inline WeightedTrajectory reference_solution(const GridFunction& u0, const AbstractProblem& prob,
                                             const FixedPointConfig& cfg) {
    if (!prob.admits(u0)) throw DomainError("initial datum violates the state constraint");
    const FrozenStepper st(prob.assemble_A(u0), graded_times(cfg.window, cfg.time_steps, cfg.grading()), cfg.integrator);
    return reference_solution(u0, prob, st, cfg);
}

/// Forcing F1(v) + F2(v) + (A0 - A(v)) v at one time node, zero on pinned dofs.
inline GridFunction picard_forcing(const GridFunction& v, const LinearOperator& a0, const AbstractProblem& prob) {
    if (!prob.admits(v)) throw DomainError("iterate left the admissible state set");
    GridFunction g(v.grid(), v.components());
    if (!prob.state_independent_A) g = a0.apply(v) - prob.assemble_A(v).apply(v);
    if (prob.F1) g += detail::checked(prob.F1(v), "F1");
    if (prob.F2) g += detail::checked(prob.F2(v), "F2");
    zero_pinned(g, prob.pinned());
    return g;
}

inline WeightedTrajectory picard_map(const WeightedTrajectory& v, const GridFunction& u1, const AbstractProblem& prob,
                                     const FrozenStepper& st, const FixedPointConfig& cfg) {
    if (v.times != st.times()) throw PreconditionError("iterate and stepper use different time grids");
    std::vector<GridFunction> g;
    g.reserve(v.size());
    for (const auto& s : v.states) g.push_back(picard_forcing(s, st.op(), prob));
    return detail::integrate(st, u1, g, cfg);
}

/// Convenience form that freezes at u0 and builds the stepper on v's grid.
inline WeightedTrajectory picard_map(const WeightedTrajectory& v, const GridFunction& u1, const GridFunction& u0,
                                     const AbstractProblem& prob, const FixedPointConfig& cfg) {
    const FrozenStepper st(prob.assemble_A(u0), v.times, cfg.integrator);
    return picard_map(v, u1, prob, st, cfg);
}

// ---------------------------------------------------------------------------

struct SolverWindowState {
    double length = 0.0;
    WeightedTrajectory trajectory;  // window-local times
    int iterations = 0;
    std::vector<double> residuals;
    std::vector<double> contraction_factors;
    double max_contraction = 0.0;
    int halvings = 0;
    double distance_to_reference = 0.0;
    double e1mu_norm = 0.0;
    bool exponential = false;
    std::vector<std::string> stall_reasons;

    const GridFunction& final_state() const { return trajectory.states.back(); }
};

/// Picard iteration from the reference solution; on stall the window is halved.
inline SolverWindowState fixed_point_solve(const GridFunction& u1, const AbstractProblem& prob, const FixedPointConfig& cfg,
                                           std::shared_ptr<const SpectralProxy> cached_proxy = nullptr) {
    cfg.validate();
    if (!prob.admits(u1)) throw DomainError("initial datum violates the state constraint");
    const LinearOperator a0 = prob.assemble_A(u1);
    SolverWindowState out;
    double T = cfg.window;

    for (int halving = 0; halving <= cfg.max_halvings; ++halving, T *= 0.5) {
        out.halvings = halving;
        out.residuals.clear();
        out.contraction_factors.clear();
        std::string why;
        try {
            const FrozenStepper st(a0, graded_times(T, cfg.time_steps, cfg.grading()), cfg.integrator, cached_proxy);
            const WeightedTrajectory ref = reference_solution(u1, prob, st, cfg);
            WeightedTrajectory v = ref;
            bool converged = false;
            for (int it = 1; it <= cfg.max_iter; ++it) {
                WeightedTrajectory next = picard_map(v, u1, prob, st, cfg);
                const double res = E1mu_norm(detail::difference(next, v), 0.0, T, cfg.q, prob.order);
                const double scale = std::max(1.0, E1mu_norm(next, 0.0, T, cfg.q, prob.order));
                if (!std::isfinite(res)) throw DomainError("non-finite fixed-point residual");
                const double floor = 100.0 * cfg.tol * scale;
                if (!out.residuals.empty() && out.residuals.back() > floor) {
                    const double f = res / out.residuals.back();
                    out.contraction_factors.push_back(f);
                    if (f >= 1.0 && res > floor) {
                        why = "contraction factor " + std::to_string(f) + " >= 1";
                        break;
                    }
                }
                out.residuals.push_back(res);
                v = std::move(next);
                out.iterations = it;
                if (res <= cfg.tol * scale) {
                    converged = true;
                    break;
                }
            }
            if (converged) {
                out.length = T;
                out.max_contraction = out.contraction_factors.empty()
                                          ? 0.0
                                          : *std::max_element(out.contraction_factors.begin(), out.contraction_factors.end());
                out.distance_to_reference = E1mu_norm(detail::difference(v, ref), 0.0, T, cfg.q, prob.order);
                out.e1mu_norm = E1mu_norm(v, 0.0, T, cfg.q, prob.order);
                out.exponential = st.exponential();
                out.trajectory = std::move(v);
                return out;
            }
            if (why.empty()) why = "max_iter reached";
        } catch (const DomainError& e) {
            why = e.what();
        } catch (const SolverError& e) {
            why = e.what();
        }
        out.stall_reasons.push_back("T=" + std::to_string(T) + ": " + why);
    }
    std::string msg = "fixed-point iteration did not converge after " + std::to_string(cfg.max_halvings) + " halvings";
    if (!out.stall_reasons.empty()) msg += " (last: " + out.stall_reasons.back() + ")";
    throw NonconvergenceError(msg);
}

// ---------------------------------------------------------------------------

struct WindowRecord {
    double start = 0.0;
    double length = 0.0;
    int iterations = 0;
    double max_contraction = 0.0;
    double final_residual = 0.0;
    int halvings = 0;
    double e1mu_norm = 0.0;
};

struct ContinuationState {
    std::vector<WindowRecord> windows;
    double t_plus_estimate = std::numeric_limits<double>::infinity();
    bool blow_up = false;
    std::string reason;
    double end_time = 0.0;
    double next_window = 0.0;
};

struct ResumePoint {
    double time = 0.0;
    GridFunction state;
    double next_window = 0.0;
    int window_index = 0;
};

struct ContinuationOptions {
    double horizon = 1.0;
    double blowup_threshold = 1e8;  // sup norm
    double min_window = 1e-12;
    int max_windows = 100000;
    std::optional<ResumePoint> resume;
    // Called after every accepted window: (record, end state, window index, next window length).
    std::function<void(const WindowRecord&, const GridFunction&, int, double)> on_window;
};

struct ContinuationResult {
    ContinuationState state;
    WeightedTrajectory trajectory;  // global times
};

inline ContinuationResult continue_solution(const GridFunction& u0, const AbstractProblem& prob, const FixedPointConfig& cfg,
                                            const ContinuationOptions& opt) {
    cfg.validate();
    ContinuationResult res;
    double t = 0.0;
    GridFunction u = u0;
    double next = cfg.window;
    int index = 0;
    if (opt.resume) {
        t = opt.resume->time;
        u = opt.resume->state;
        next = opt.resume->next_window;
        index = opt.resume->window_index;
    }
    if (!prob.admits(u)) throw DomainError("initial datum violates the state constraint");

    res.trajectory.mu = cfg.mu;
    res.trajectory.p = cfg.p;
    res.trajectory.times.push_back(t);
    res.trajectory.states.push_back(u);

    std::shared_ptr<const SpectralProxy> proxy;
    const bool use_cached_proxy = prob.state_independent_A && cfg.integrator != Integrator::implicit_euler;
    if (use_cached_proxy) {
        const LinearOperator a = prob.assemble_A(u);
        if (cfg.integrator == Integrator::exponential || (a.dofs() <= kSpectralCap && weighted_asymmetry(a) <= 1e-8))
            proxy = std::make_shared<const SpectralProxy>(eigendecompose(a));
    }

    bool first_deriv = true;
    while (t < opt.horizon * (1.0 - 1e-14) && index < opt.max_windows) {
        FixedPointConfig wc = cfg;
        wc.window = std::min(next, opt.horizon - t);
        if (wc.window < opt.min_window) {
            res.state.blow_up = true;
            res.state.reason = "window collapse";
            res.state.t_plus_estimate = t;
            break;
        }
        SolverWindowState w;
        try {
            w = fixed_point_solve(u, prob, wc, proxy);
        } catch (const NonconvergenceError&) {
            res.state.blow_up = true;
            res.state.reason = "window collapse";
            res.state.t_plus_estimate = t;
            break;
        }
        WindowRecord rec{t, w.length, w.iterations, w.max_contraction, w.residuals.empty() ? 0.0 : w.residuals.back(),
                         w.halvings, w.e1mu_norm};
        res.state.windows.push_back(rec);

        const auto& tr = w.trajectory;
        if (first_deriv) {
            res.trajectory.derivs.push_back(tr.derivs.front());
            first_deriv = false;
        }
        bool crossed = false;
        for (std::size_t k = 1; k < tr.size(); ++k) {
            res.trajectory.times.push_back(t + tr.times[k]);
            res.trajectory.states.push_back(tr.states[k]);
            res.trajectory.derivs.push_back(tr.derivs[k]);
            if (sup_norm(tr.states[k]) > opt.blowup_threshold) {
                crossed = true;
                res.state.t_plus_estimate = t + tr.times[k];
                break;
            }
        }
        const double prev_window = w.length;
        t += w.length;
        // Summed window lengths can land a few ulps short of the horizon.
        if (!crossed && t != opt.horizon && std::abs(opt.horizon - t) <= 1e-12 * opt.horizon) {
            t = opt.horizon;
            res.trajectory.times.back() = t;
        }
        u = w.final_state();
        ++index;
        next = w.halvings == 0 ? std::min(cfg.window, 2.0 * prev_window) : prev_window;
        if (crossed) {
            res.state.blow_up = true;
            res.state.reason = "norm threshold";
            t = res.trajectory.times.back();
            break;
        }
        if (opt.on_window) opt.on_window(rec, u, index, next);
    }
    res.state.end_time = t;
    res.state.next_window = next;
    if (res.trajectory.derivs.size() != res.trajectory.times.size()) res.trajectory.derivs.clear();
    return res;
}

// ---------------------------------------------------------------------------

/// A + kappa I and F1 + kappa id on the free dofs; solutions are unchanged.
inline AbstractProblem kappa_shift(const AbstractProblem& prob, double kappa) {
    if (!(kappa >= 0.0)) throw PreconditionError("kappa must be nonnegative");
    if (kappa == 0.0) return prob;
    AbstractProblem out = prob;
    out.name = prob.name + "+kappa";
    const auto pins = prob.pinned();
    auto base_A = prob.assemble_A;
    out.assemble_A = [base_A, kappa, pins](const GridFunction& v) {
        LinearOperator a = base_A(v);
        SparseMatrix id(a.dofs(), a.dofs());
        std::vector<Eigen::Triplet<double>> trip;
        for (Index d = 0; d < a.dofs(); ++d)
            if (!pins[static_cast<std::size_t>(d)]) trip.emplace_back(d, d, kappa);
        id.setFromTriplets(trip.begin(), trip.end());
        a.matrix += id;
        return a;
    };
    auto base_F1 = prob.F1;
    out.F1 = [base_F1, kappa, pins](const GridFunction& v) {
        GridFunction f = base_F1 ? base_F1(v) : GridFunction(v.grid(), v.components());
        GridFunction s = kappa * v;
        zero_pinned(s, pins);
        return f + s;
    };
    return out;
}

// ---------------------------------------------------------------------------

struct LipschitzReport {
    double L_A = 0.0;
    double L_F1 = 0.0;
    double c_dependence = 0.0;
    int pairs = 0;
    int skipped = 0;
};

/// Smooth random perturbation with sup norm one, compatible with the boundary condition.
inline GridFunction random_smooth_field(const AbstractProblem& prob, std::mt19937_64& rng, int modes = 4) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    GridFunction w(prob.grid, prob.components);
    const bool clamped = prob.bc == BoundaryCondition::clamped;
    for (int c = 0; c < prob.components; ++c) {
        std::vector<double> a(static_cast<std::size_t>(modes * modes));
        for (auto& x : a) x = coef(rng);
        for (Index k = 0; k < prob.grid.size(); ++k) {
            const double x = prob.grid.x(k), y = prob.grid.y(k);
            double acc = 0.0;
            for (int i = 0; i < modes; ++i)
                for (int j = 0; j < (prob.grid.dim() == 2 ? modes : 1); ++j) {
                    double bx = clamped ? std::sin(M_PI * x) * std::sin((i + 1) * M_PI * x) : std::cos(i * M_PI * x);
                    double by = prob.grid.dim() == 1 ? 1.0
                                : clamped           ? std::sin(M_PI * y) * std::sin((j + 1) * M_PI * y)
                                                    : std::cos(j * M_PI * y);
                    acc += a[static_cast<std::size_t>(i * modes + j)] * bx * by;
                }
            w(k, c) = acc;
        }
    }
    zero_pinned(w, prob.pinned());
    const double s = sup_norm(w);
    return s > 0.0 ? (1.0 / s) * w : w;
}

/// Empirical Lipschitz ratios around u_center. State differences are measured in
/// the sup norm, operator and F1 differences in L_q, data differences for the
/// solution map in the X_gamma proxy norm.
inline LipschitzReport lipschitz_probe(const AbstractProblem& prob, const GridFunction& u_center, int n_samples,
                                       double radius, const FixedPointConfig& cfg, std::uint64_t seed = 0) {
    std::mt19937_64 rng(seed);
    struct Pair {
        GridFunction a, b;
    };
    std::vector<Pair> pairs;
    for (int s = 0; s < n_samples; ++s)
        pairs.push_back({u_center + radius * random_smooth_field(prob, rng), u_center + radius * random_smooth_field(prob, rng)});

    std::shared_ptr<const SpectralProxy> proxy;
    if (prob.grid.size() <= kSpectralCap) proxy = std::make_shared<const SpectralProxy>(eigendecompose(reference_operator(prob.grid, prob.bc)));
    const double gamma = cfg.mu - 1.0 / cfg.p;

    struct Sample {
        bool skipped = true;
        double la = 0.0, lf = 0.0, c = 0.0;
    };
    auto eval = [&](const Pair& pr) {
        Sample out;
        const GridFunction diff = pr.a - pr.b;
        const double dsup = sup_norm(diff);
        if (dsup == 0.0 || !prob.admits(pr.a) || !prob.admits(pr.b)) return out;
        try {
            out.la = lq_norm(prob.assemble_A(pr.a).apply(u_center) - prob.assemble_A(pr.b).apply(u_center), cfg.q) / dsup;
            if (prob.F1) out.lf = lq_norm(prob.F1(pr.a) - prob.F1(pr.b), cfg.q) / dsup;
            if (proxy) {
                FixedPointConfig c1 = cfg;
                SolverWindowState sa = fixed_point_solve(pr.a, prob, c1);
                SolverWindowState sb = fixed_point_solve(pr.b, prob, c1);
                if (sa.length != sb.length) {
                    c1.window = std::min(sa.length, sb.length);
                    c1.max_halvings = 0;
                    sa = fixed_point_solve(pr.a, prob, c1);
                    sb = fixed_point_solve(pr.b, prob, c1);
                }
                const double dd = proxy_norm(diff, gamma, *proxy);
                out.c = E1mu_norm(detail::difference(sa.trajectory, sb.trajectory), 0.0, sa.length, cfg.q, prob.order) / dd;
            }
            out.skipped = false;
        } catch (const DomainError&) {
        }
        return out;
    };

    std::vector<std::future<Sample>> jobs;
    for (const auto& pr : pairs) jobs.push_back(std::async(std::launch::async, eval, std::cref(pr)));
    LipschitzReport r;
    for (auto& j : jobs) {
        const Sample s = j.get();
        if (s.skipped) {
            ++r.skipped;
            continue;
        }
        ++r.pairs;
        r.L_A = std::max(r.L_A, s.la);
        r.L_F1 = std::max(r.L_F1, s.lf);
        r.c_dependence = std::max(r.c_dependence, s.c);
    }
    return r;
}

// ---------------------------------------------------------------------------

struct OmegaLimitReport {
    std::vector<GridFunction> cluster_points;     // one representative per cluster
    std::vector<std::vector<std::size_t>> clusters;  // indices into the sampling times
    double diameter = 0.0;                        // max pairwise X_gamma distance of all samples
    double tail_diameter = 0.0;                   // same over the second half of the samples
    bool converged = false;
};

inline OmegaLimitReport omega_limit(const WeightedTrajectory& traj, const std::vector<double>& times,
                                    const SpectralProxy& proxy, double gamma, double threshold = 1e-4) {
    traj.validate();
    if (times.empty()) throw PreconditionError("no sampling times");
    for (double t : times)
        if (t < traj.start() || t > traj.end()) throw RangeError("sampling time outside trajectory");
    std::vector<GridFunction> pts;
    for (double t : times) pts.push_back(traj.state_at(t));
    const std::size_t n = pts.size();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = proxy_norm(pts[i] - pts[j], gamma, proxy);

    OmegaLimitReport r;
    for (std::size_t i = 0; i < n; ++i) {
        bool placed = false;
        for (auto& c : r.clusters)
            if (d[c.front()][i] <= threshold) {
                c.push_back(i);
                placed = true;
                break;
            }
        if (!placed) r.clusters.push_back({i});
    }
    for (const auto& c : r.clusters) r.cluster_points.push_back(pts[c.front()]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            r.diameter = std::max(r.diameter, d[i][j]);
            if (i >= n / 2 && j >= n / 2) r.tail_diameter = std::max(r.tail_diameter, d[i][j]);
        }
    r.converged = r.clusters.size() == 1 && r.tail_diameter <= r.diameter;
    return r;
}

}  // namespace qplab
