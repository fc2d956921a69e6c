#pragma once

// Config-driven runs, sweeps and the standalone diagnostics behind the
// command-line tool. Everything here is deterministic for a fixed config and
// seed: no clocks, no unordered containers, doubles printed round-trip.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qplab/admissibility.hpp"
#include "qplab/checkpoint.hpp"
#include "qplab/errors.hpp"
#include "qplab/evolution.hpp"
#include "qplab/graph_geometry.hpp"
#include "qplab/problems.hpp"
#include "qplab/rational.hpp"
#include "qplab/spectral.hpp"
#include "qplab/symbol_analysis.hpp"
#include "qplab/weighted_norms.hpp"

namespace qplab::harness {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode : int { exit_ok = 0, exit_admissibility = 2, exit_nonconvergence = 3, exit_io = 4 };

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

// ---------------------------------------------------------------------------
// Exponents

inline Rational rational_of(const json& v) {
    if (v.is_string()) return Rational::parse(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_number()) return Rational::from_double(v.get<double>());
    throw PreconditionError("exponent must be a number or a rational string");
}

inline double real_of(const json& v) {
    if (v.is_string()) return Rational::parse(v.get<std::string>()).to_double();
    return v.get<double>();
}

template <class T>
T scalar_of(const json& v) {
    if constexpr (std::is_same_v<T, Rational>)
        return rational_of(v);
    else
        return real_of(v);
}

template <class T>
json number_json(const T& v) {
    if constexpr (std::is_same_v<T, Rational>) return json{{"value", v.to_double()}, {"exact", v.str()}};
    else return json{{"value", v}};
}

template <class T>
json admissibility_report_as(const json& ex, int n, Order order) {
    const ExponentConfig<T> cfg(scalar_of<T>(ex.at("p")), scalar_of<T>(ex.at("q")), n, scalar_of<T>(ex.at("mu")), order);
    const T eps = ex.contains("epsilon") ? scalar_of<T>(ex.at("epsilon")) : ratio<T>(1, 1000);
    const auto dim = check_dimensional(cfg);
    const auto win = beta_window(cfg, eps);

    json r;
    r["exact"] = std::is_same_v<T, Rational>;
    r["p"] = to_real(cfg.p);
    r["q"] = to_real(cfg.q);
    r["n"] = n;
    r["mu"] = to_real(cfg.mu);
    r["order"] = to_string(order);
    r["epsilon"] = to_real(eps);
    r["admissible"] = dim.admissible;
    r["mu0"] = number_json(dim.mu0);
    r["dimension_lhs"] = number_json(dim.dimension_lhs);
    r["dimension_bound"] = to_real(dim.dimension_bound);
    r["compatibility_needed"] = dim.compatibility_needed;
    r["violated"] = dim.violated;
    r["beta_window"] = {{"lower", number_json(win.lower)},      {"upper", number_json(win.upper)},
                        {"empty", win.empty},                   {"lower_constraint", win.lower_constraint},
                        {"upper_constraint", win.upper_constraint}, {"binding", win.binding}};

    std::optional<T> beta;
    if (ex.contains("beta")) beta = scalar_of<T>(ex.at("beta"));
    else if (!win.empty) beta = (win.lower + win.upper) / from_int<T>(2);
    if (!beta) return r;
    r["beta"] = number_json(*beta);
    r["beta_in_window"] = win.contains(*beta);
    if (!(*beta > cfg.gamma())) {
        r["pairs_error"] = "beta must exceed mu - 1/p";
        return r;
    }

    std::vector<std::pair<T, T>> pairs;
    if (ex.contains("pairs")) {
        for (const auto& pr : ex.at("pairs")) pairs.emplace_back(scalar_of<T>(pr.at(0)), scalar_of<T>(pr.at(1)));
    } else {
        pairs = order == Order::second ? second_order_pairs(cfg, *beta) : fourth_order_pairs(cfg, *beta, eps);
    }
    const auto se = make_structure(cfg, *beta, pairs, eps);
    const auto f2 = check_F2_exponents(cfg, se);
    r["pairs"] = json::array();
    for (std::size_t j = 0; j < pairs.size(); ++j)
        r["pairs"].push_back({{"rho", to_real(pairs[j].first)},
                              {"beta_j", to_real(pairs[j].second)},
                              {"ratio", number_json(f2.ratios[j])},
                              {"pass", static_cast<bool>(f2.per_pair[j])},
                              {"valid", static_cast<bool>(f2.pair_valid[j])}});
    r["all_pass"] = f2.all_pass;
    if (order == Order::fourth) {
        r["kappa"] = number_json(se.kappa_exp);
        r["theta"] = number_json(se.theta);
    }
    return r;
}

/// Exact evaluation first; falls back to doubles when a rational overflows.
inline json admissibility_report(const json& ex, int n, Order order) {
    try {
        return admissibility_report_as<Rational>(ex, n, order);
    } catch (const std::overflow_error&) {
        return admissibility_report_as<double>(ex, n, order);
    }
}

// ---------------------------------------------------------------------------
// Problem construction

inline Polynomial polynomial_of(const json& j, int N) {
    Polynomial p;
    if (j.is_number()) return Polynomial::constant(j.get<double>());
    if (!j.is_array()) throw PreconditionError("polynomial must be a number or a list");
    if (!j.empty() && j.front().is_number()) {
        // Univariate shorthand c0 + c1 u + c2 u^2 + ... for scalar problems.
        if (N != 1) throw PreconditionError("coefficient-list polynomials are scalar only");
        for (std::size_t e = 0; e < j.size(); ++e)
            if (j[e].get<double>() != 0.0) p.terms.push_back({j[e].get<double>(), {static_cast<int>(e)}});
        return p;
    }
    for (const auto& m : j) p.terms.push_back({m.at("c").get<double>(), m.value("e", std::vector<int>{})});
    return p;
}

inline ReactionDiffusionSpec rd_spec_of(const json& pj) {
    ReactionDiffusionSpec s;
    s.N = get_or(pj, "components", 1);
    const json box = pj.value("box", json::object());
    s.box_lo = box.value("lo", std::vector<double>(static_cast<std::size_t>(s.N), -1e6));
    s.box_hi = box.value("hi", std::vector<double>(static_cast<std::size_t>(s.N), 1e6));
    s.eta = get_or(pj, "eta", 0.0);
    const json a = pj.at("a");
    if (s.N == 1 && !(a.is_array() && !a.empty() && a.front().is_array() && !a.front().empty() && a.front().front().is_array()))
        s.a = {{polynomial_of(a, 1)}};
    else
        for (const auto& row : a) {
            std::vector<Polynomial> r;
            for (const auto& e : row) r.push_back(polynomial_of(e, s.N));
            s.a.push_back(std::move(r));
        }
    if (pj.contains("f")) {
        const json f = pj.at("f");
        if (s.N == 1 && !(f.is_array() && !f.empty() && f.front().is_array()))
            s.f = {polynomial_of(f, 1)};
        else
            for (const auto& e : f) s.f.push_back(polynomial_of(e, s.N));
    }
    if (pj.contains("b")) {
        const json b = pj.at("b");
        if (s.N == 1 && (b.is_number() || (b.is_array() && (b.empty() || b.front().is_number()))))
            s.b.push_back({0, 0, 0, polynomial_of(b, 1)});
        else
            for (const auto& t : b)
                s.b.push_back({t.at("i").get<int>(), t.at("k").get<int>(), t.at("l").get<int>(), polynomial_of(t.at("poly"), s.N)});
    }
    return s;
}

/// First clamped-beam mode on [0,1], normalised to unit maximum.
inline double beam_mode(double x) {
    constexpr double k = 4.730040744862704;
    const double s = (std::cosh(k) - std::cos(k)) / (std::sinh(k) - std::sin(k));
    const double peak = 1.5881462620646056;  // value at x = 1/2
    return (std::cosh(k * x) - std::cos(k * x) - s * (std::sinh(k * x) - std::sin(k * x))) / peak;
}
inline constexpr double kBeamEigenvalue = 500.5639017013546;  // 4.730040744862704^4

inline GridFunction initial_component(const json& ij, const AbstractProblem& prob, std::mt19937_64& rng) {
    const std::string type = ij.value("type", "cosine");
    const double A = ij.value("amplitude", 1.0);
    const double c = ij.value("offset", 0.0);
    const Grid& g = prob.grid;
    if (type == "cosine") {
        const int kx = ij.value("mode", 1), ky = ij.value("mode_y", 0);
        return GridFunction::from_function(g, [&](double x, double y) {
            return c + A * std::cos(kx * M_PI * x) * (g.dim() == 2 ? std::cos(ky * M_PI * y) : 1.0);
        });
    }
    if (type == "sin2") {
        return GridFunction::from_function(g, [&](double x, double y) {
            return c + A * std::pow(std::sin(M_PI * x), 2) * (g.dim() == 2 ? std::pow(std::sin(M_PI * y), 2) : 1.0);
        });
    }
    if (type == "beam") {
        if (g.dim() != 1) throw PreconditionError("beam initial data is one-dimensional");
        return GridFunction::from_function(g, [&](double x, double) { return c + A * beam_mode(x); });
    }
    if (type == "constant") {
        return GridFunction::from_function(g, [&](double, double) { return ij.value("value", c); });
    }
    if (type == "random") {
        AbstractProblem scalar = prob;
        scalar.components = 1;
        GridFunction w = random_smooth_field(scalar, rng, ij.value("modes", 4));
        GridFunction out = A * w;
        out.values().array() += c;
        return out;
    }
    throw PreconditionError("unknown initial data type '" + type + "'");
}

inline GridFunction initial_data(const json& pj, const AbstractProblem& prob, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const json ij = pj.value("initial", json{{"type", "cosine"}});
    GridFunction u(prob.grid, prob.components);
    for (int c = 0; c < prob.components; ++c) {
        const json& cj = ij.is_array() ? ij.at(static_cast<std::size_t>(c)) : ij;
        u.set_component(c, initial_component(cj, prob, rng).values());
    }
    zero_pinned(u, prob.pinned());
    return u;
}

struct Setup {
    std::string kind;
    AbstractProblem prob;
    Order order = Order::second;
    GridFunction u0;
    std::optional<ReactionDiffusionSpec> rd;
    std::optional<FlowSpec> flow;
};

inline Setup build_setup(const json& cfg, std::uint64_t seed) {
    const json pj = cfg.at("problem");
    Setup s;
    s.kind = pj.at("kind").get<std::string>();
    const Grid grid(get_or(pj, "dim", 1), get_or(pj, "nodes", 64));
    if (s.kind == "heat") {
        s.prob = linear_problem(grid, BoundaryCondition::neumann);
    } else if (s.kind == "bilaplacian") {
        s.prob = linear_problem(grid, BoundaryCondition::clamped);
        s.order = Order::fourth;
    } else if (s.kind == "reaction_diffusion") {
        s.rd = rd_spec_of(pj);
        s.prob = rd_problem(*s.rd, grid);
    } else if (s.kind == "surface_diffusion" || s.kind == "willmore") {
        s.flow = FlowSpec{parse_flow_kind(s.kind), grid};
        s.prob = flow_problem(*s.flow);
        s.order = Order::fourth;
    } else if (s.kind == "quadratic_ode") {
        s.prob = quadratic_ode_problem(grid);
    } else {
        throw PreconditionError("unknown problem kind '" + s.kind + "'");
    }
    const double kappa = cfg.value("solver", json::object()).value("kappa", 0.0);
    if (kappa > 0.0) s.prob = kappa_shift(s.prob, kappa);
    s.u0 = initial_data(pj, s.prob, seed);
    return s;
}

inline FixedPointConfig solver_config(const json& cfg) {
    const json sj = cfg.value("solver", json::object());
    const json ex = cfg.value("exponents", json::object());
    FixedPointConfig fp;
    fp.window = sj.value("window", fp.window);
    fp.time_steps = sj.value("time_steps", fp.time_steps);
    fp.tol = sj.value("tol", fp.tol);
    fp.max_iter = sj.value("max_iter", fp.max_iter);
    fp.max_halvings = sj.value("max_halvings", fp.max_halvings);
    fp.radius = sj.value("radius", fp.radius);
    fp.contraction_target = sj.value("contraction_target", fp.contraction_target);
    fp.integrator = parse_integrator(sj.value("integrator", std::string("automatic")));
    if (ex.contains("p")) fp.p = real_of(ex.at("p"));
    if (ex.contains("q")) fp.q = real_of(ex.at("q"));
    if (ex.contains("mu")) fp.mu = real_of(ex.at("mu"));
    return fp;
}

// ---------------------------------------------------------------------------
// Diagnostics shared by run and the standalone subcommands

inline double dirichlet_energy(const GridFunction& u) {
    double e = 0.0;
    for (int axis = 0; axis < u.grid().dim(); ++axis) {
        const GridFunction d = derivative(u, axis == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1}, BoundaryCondition::neumann);
        e += 0.5 * l2_inner(d, d);
    }
    return e;
}

inline json symbol_report(const GridFunction& h, int directions, const std::vector<double>& bs,
                          const std::vector<Complex>& lambdas) {
    json r;
    const auto el = ellipticity_scan(h, directions);
    r["ellipticity"] = {{"min_ratio", el.min_ratio},
                        {"max_grad", el.max_grad},
                        {"analytic_bound", el.analytic_bound},
                        {"beta4_bound", el.beta4_bound},
                        {"margin", el.min_ratio - el.analytic_bound},
                        {"samples", el.samples}};
    const auto ls = ls_scan(bs, lambdas);
    r["lopatinskii_shapiro"] = {{"min_det_normalized", ls.min_det_normalized},
                                {"argmin_b", ls.argmin_b},
                                {"argmin_lambda", {ls.argmin_lambda.real(), ls.argmin_lambda.imag()}},
                                {"max_residual", ls.max_residual},
                                {"points", ls.points},
                                {"two_negative_roots_everywhere", ls.two_negative_roots_everywhere},
                                {"boundary_cases", ls.boundary_cases}};
    return r;
}

struct NormRow {
    double a, b, e0, e1;
};

inline std::vector<NormRow> interval_norms(const WeightedTrajectory& tr, const std::vector<std::pair<double, double>>& iv,
                                           double q, int order) {
    std::vector<NormRow> out;
    for (const auto& [a, b] : iv) {
        NormRow r{a, b, weighted_Lp_norm(tr, SpatialNorm::lq(q), a, b), std::nan("")};
        if (tr.has_derivs()) r.e1 = E1mu_norm(tr, a, b, q, order);
        out.push_back(r);
    }
    return out;
}

inline std::string norms_csv(const std::vector<NormRow>& rows) {
    std::string s = "a,b,E0mu,E1mu\n";
    for (const auto& r : rows)
        s += format_double(r.a) + "," + format_double(r.b) + "," + format_double(r.e0) + "," +
             (std::isnan(r.e1) ? std::string() : format_double(r.e1)) + "\n";
    return s;
}

inline json smoothing_json(const WeightedTrajectory& tr, double delta, double q, int order) {
    try {
        const auto s = smoothing_check(tr, delta, tr.end(), q, order);
        return {{"delta", delta}, {"weighted", s.weighted}, {"unweighted_tail", s.unweighted_tail}, {"inequality_holds", s.inequality_holds}};
    } catch (const std::exception& e) {
        return {{"delta", delta}, {"error", e.what()}};
    }
}

inline json omega_json(const WeightedTrajectory& tr, const std::vector<double>& times, BoundaryCondition bc, double threshold) {
    const Grid& g = tr.states.front().grid();
    if (g.size() > kSpectralCap) return {{"error", "grid exceeds the spectral cap; omega-limit skipped"}};
    const SpectralProxy proxy = eigendecompose(reference_operator(g, bc));
    const double gamma = tr.mu - 1.0 / tr.p;
    const auto rep = omega_limit(tr, times, proxy, gamma, threshold);
    // Distance of the last cluster point to the expected equilibrium: the spatial mean or zero.
    GridFunction target(g, tr.states.front().components());
    if (bc == BoundaryCondition::neumann) {
        const GridFunction& u0 = tr.states.front();
        const double vol = g.quadrature_weights().sum();
        for (int c = 0; c < u0.components(); ++c) {
            const double m = g.quadrature_weights().dot(u0.component(c)) / vol;
            target.set_component(c, Eigen::VectorXd::Constant(g.size(), m));
        }
    }
    json clusters = json::array();
    for (const auto& c : rep.clusters) clusters.push_back(c);
    return {{"diameter", rep.diameter},
            {"tail_diameter", rep.tail_diameter},
            {"clusters", clusters},
            {"converged", rep.converged},
            {"threshold", threshold},
            {"equilibrium_distance", proxy_norm(rep.cluster_points.back() - target, gamma, proxy)}};
}

// ---------------------------------------------------------------------------

struct RunOptions {
    std::optional<std::uint64_t> seed;
    bool force = false;
    std::optional<std::string> out_dir;
    std::optional<std::string> resume;
};

struct RunResult {
    int exit_code = exit_ok;
    std::string message;
    json report;
    std::string out_dir;
};

inline std::string window_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "window_%04d.chk", index);
    return buf;
}

inline RunResult run(const json& cfg, const RunOptions& opt = {}) {
    RunResult res;
    try {
        const std::uint64_t seed = opt.seed ? *opt.seed : cfg.value("seed", std::uint64_t{0});
        const json out_cfg = cfg.value("output", json::object());
        const fs::path out = opt.out_dir ? fs::path(*opt.out_dir) : fs::path(out_cfg.value("dir", std::string("qplab_out")));
        res.out_dir = out.string();
        fs::create_directories(out);

        Setup s = build_setup(cfg, seed);
        const FixedPointConfig fp = solver_config(cfg);
        json& rep = res.report;
        rep["seed"] = seed;
        rep["problem"] = {{"kind", s.kind},
                          {"dim", s.prob.grid.dim()},
                          {"nodes", s.prob.grid.nodes_per_axis()},
                          {"components", s.prob.components},
                          {"bc", to_string(s.prob.bc)}};

        // 1. admissibility
        if (cfg.contains("exponents")) {
            json adm;
            try {
                adm = admissibility_report(cfg.at("exponents"), s.prob.grid.dim(), s.order);
            } catch (const PreconditionError& e) {
                adm = {{"admissible", false}, {"violated", e.what()}};
            }
            rep["admissibility"] = adm;
            if (!adm.value("admissible", false) && !opt.force) {
                res.exit_code = exit_admissibility;
                res.message = "inadmissible exponents: " + adm.value("violated", std::string());
                write_json(out / "report.json", rep);
                return res;
            }
        }

        const json dj = cfg.value("diagnostics", json::object());
        const bool is_flow = s.flow.has_value();

        // 2. symbol scan
        if (dj.value("symbol_scan", is_flow) && s.prob.components == 1) {
            rep["symbol"] = symbol_report(s.u0, dj.value("directions", 32), log_space(1e-6, 1e6, 13), default_lambda_grid());
        }
        if (s.rd) {
            const auto sp = spectrum_positivity_check(*s.rd, box_samples(*s.rd), false);
            rep["spectrum"] = {{"min_real_part", sp.min_real_part}, {"samples", sp.samples}, {"positive", sp.positive}};
        }

        // 3. continuation
        const json sj = cfg.value("solver", json::object());
        ContinuationOptions co;
        co.horizon = sj.value("horizon", 1.0);
        co.blowup_threshold = sj.value("blowup_threshold", 1e8);
        co.min_window = sj.value("min_window", 1e-12);
        if (opt.resume) {
            const Checkpoint cp = read_checkpoint(*opt.resume);
            if (!(cp.grid() == s.prob.grid) || cp.components() != s.prob.components)
                throw PreconditionError("checkpoint grid does not match the config");
            co.resume = ResumePoint{cp.trajectory.end(), cp.trajectory.states.back(), cp.next_window, cp.window_index};
            rep["resumed_from"] = {{"time", cp.trajectory.end()}, {"window_index", cp.window_index}};
        }
        const bool write_windows = out_cfg.value("checkpoints", true);
        if (write_windows) {
            fs::create_directories(out / "checkpoints");
            const BoundaryCondition bc = s.prob.bc;
            co.on_window = [&, bc](const WindowRecord& w, const GridFunction& u, int index, double next) {
                Checkpoint cp;
                cp.bc = bc;
                cp.trajectory.times = {w.start + w.length};
                cp.trajectory.states = {u};
                cp.trajectory.mu = fp.mu;
                cp.trajectory.p = fp.p;
                cp.next_window = next;
                cp.window_index = index;
                write_checkpoint((out / "checkpoints" / window_name(index)).string(), cp);
            };
        }
        const ContinuationResult cr = continue_solution(s.u0, s.prob, fp, co);
        const WeightedTrajectory& tr = cr.trajectory;

        json windows = json::array();
        double max_c = 0.0;
        int max_h = 0;
        for (const auto& w : cr.state.windows) {
            windows.push_back({{"start", w.start},
                               {"length", w.length},
                               {"iterations", w.iterations},
                               {"max_contraction", w.max_contraction},
                               {"final_residual", w.final_residual},
                               {"halvings", w.halvings},
                               {"E1mu", w.e1mu_norm}});
            max_c = std::max(max_c, w.max_contraction);
            max_h = std::max(max_h, w.halvings);
        }
        rep["continuation"] = {{"windows", windows},
                               {"blow_up", cr.state.blow_up},
                               {"reason", cr.state.reason},
                               {"t_plus_estimate", std::isfinite(cr.state.t_plus_estimate) ? json(cr.state.t_plus_estimate) : json("inf")},
                               {"end_time", cr.state.end_time},
                               {"next_window", cr.state.next_window}};
        rep["contraction"] = {{"max_factor", max_c}, {"max_halvings", max_h}, {"target", fp.contraction_target}};

        // 4. time series
        std::optional<std::function<GridFunction(double)>> oracle;
        const std::string oracle_kind = dj.value("oracle", std::string());
        if (!oracle_kind.empty()) {
            const json ij = cfg.at("problem").value("initial", json::object());
            const double A = ij.value("amplitude", 1.0), c0 = ij.value("offset", 0.0);
            const Grid g = s.prob.grid;
            if (oracle_kind == "heat_cosine") {
                const int k = ij.value("mode", 1);
                oracle = [=](double t) {
                    return GridFunction::from_function(g, [&](double x, double) { return c0 + A * std::exp(-k * k * M_PI * M_PI * t) * std::cos(k * M_PI * x); });
                };
            } else if (oracle_kind == "beam") {
                oracle = [=](double t) {
                    return GridFunction::from_function(g, [&](double x, double) { return c0 + A * std::exp(-kBeamEigenvalue * t) * beam_mode(x); });
                };
            } else {
                throw PreconditionError("unknown oracle '" + oracle_kind + "'");
            }
        }
        const int base_index = co.resume ? co.resume->window_index : 0;
        std::ostringstream csv;
        csv << "t,window,mass,l2,linf,energy" << (oracle ? ",oracle_error" : "") << "\n";
        double oracle_max = 0.0;
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const double t = tr.times[k];
            const int win = base_index + static_cast<int>(std::count_if(cr.state.windows.begin(), cr.state.windows.end(),
                                                                        [&](const WindowRecord& w) { return w.start < t; }));
            const GridFunction& u = tr.states[k];
            csv << format_double(t) << ',' << win << ',' << format_double(total_mass(u)) << ',' << format_double(lq_norm(u, 2.0))
                << ',' << format_double(sup_norm(u)) << ',' << format_double(dirichlet_energy(u));
            if (oracle) {
                const double e = sup_norm(u - (*oracle)(t));
                oracle_max = std::max(oracle_max, e);
                csv << ',' << format_double(e);
            }
            csv << '\n';
        }
        write_text(out / out_cfg.value("csv", std::string("timeseries.csv")), csv.str());
        if (oracle) rep["oracle"] = {{"kind", oracle_kind}, {"max_error", oracle_max}};

        const double m0 = total_mass(tr.states.front()), m1 = total_mass(tr.states.back());
        // zero-mean data would blow up a plain |dm|/|m0|
        const double mscale = std::max(std::abs(m0), lq_norm(tr.states.front(), 1.0));
        rep["conservation"] = {{"mass_start", m0},
                               {"mass_end", m1},
                               {"absolute_drift", std::abs(m1 - m0)},
                               {"relative_drift", mscale > 0.0 ? std::abs(m1 - m0) / mscale : std::abs(m1 - m0)}};

        // 5. norms, smoothing, omega-limit, Lipschitz probe
        std::vector<std::pair<double, double>> iv;
        for (const auto& p : dj.value("norm_intervals", json::array())) iv.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        if (iv.empty()) iv.emplace_back(tr.start(), tr.end());
        json norms = json::array();
        try {
            for (const auto& r : interval_norms(tr, iv, fp.q, s.prob.order))
                norms.push_back({{"interval", {r.a, r.b}}, {"E0mu", r.e0}, {"E1mu", std::isnan(r.e1) ? json(nullptr) : json(r.e1)}});
        } catch (const RangeError& e) {
            norms.push_back({{"error", e.what()}});
        }
        rep["norms"] = norms;
        if (dj.contains("delta")) rep["smoothing"] = smoothing_json(tr, dj.at("delta").get<double>(), fp.q, s.prob.order);
        if (dj.contains("omega_times")) {
            try {
                rep["omega_limit"] = omega_json(tr, dj.at("omega_times").get<std::vector<double>>(), s.prob.bc, dj.value("omega_threshold", 1e-4));
            } catch (const RangeError& e) {
                rep["omega_limit"] = {{"error", e.what()}};
            }
        }
        if (const int n = dj.value("lipschitz_samples", 0); n > 0) {
            const auto lp = lipschitz_probe(s.prob, s.u0, n, dj.value("lipschitz_radius", 0.01), fp, seed);
            rep["lipschitz"] = {{"L_A", lp.L_A}, {"L_F1", lp.L_F1}, {"c_dependence", lp.c_dependence}, {"pairs", lp.pairs}, {"skipped", lp.skipped}};
        }

        if (out_cfg.value("trajectory", true)) {
            Checkpoint cp;
            cp.bc = s.prob.bc;
            cp.trajectory = tr;
            cp.next_window = cr.state.next_window;
            cp.window_index = base_index + static_cast<int>(cr.state.windows.size());
            write_checkpoint((out / "trajectory.chk").string(), cp);
        }

        if (cr.state.blow_up && cr.state.reason == "window collapse") {
            res.exit_code = exit_nonconvergence;
            res.message = "fixed-point iteration failed at t = " + format_double(cr.state.end_time) + " after " +
                          std::to_string(cr.state.windows.size()) + " accepted windows";
        } else {
            res.message = "ok";
        }
        rep["exit_code"] = res.exit_code;
        write_json(out / "report.json", rep);
    } catch (const IoError& e) {
        res.exit_code = exit_io;
        res.message = e.what();
    } catch (const NonconvergenceError& e) {
        res.exit_code = exit_nonconvergence;
        res.message = e.what();
    } catch (const DomainError& e) {
        res.exit_code = exit_admissibility;
        res.message = std::string("initial data not admissible: ") + e.what();
    } catch (const fs::filesystem_error& e) {
        res.exit_code = exit_io;
        res.message = e.what();
    } catch (const json::exception& e) {
        res.exit_code = exit_io;
        res.message = std::string("invalid config: ") + e.what();
    } catch (const std::invalid_argument& e) {
        res.exit_code = exit_io;
        res.message = std::string("invalid config: ") + e.what();
    }
    return res;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepAxis {
    std::string path;  // dotted key, e.g. "solver.window"
    std::vector<json> values;
};

/// "solver.window=0.01,0.02" -> axis; values parse as JSON, falling back to strings.
inline SweepAxis parse_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw PreconditionError("axis must look like key.path=v1,v2,...");
    SweepAxis ax{spec.substr(0, eq), {}};
    std::stringstream ss(spec.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            ax.values.push_back(json::parse(item));
        } catch (const json::parse_error&) {
            ax.values.push_back(item);
        }
    }
    if (ax.values.empty()) throw PreconditionError("axis '" + ax.path + "' has no values");
    return ax;
}

inline void set_path(json& j, const std::string& path, const json& v) {
    json* cur = &j;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) cur = &(*cur)[parts[i]];
    (*cur)[parts.back()] = v;
}

struct SweepCell {
    std::vector<json> values;
    RunResult result;
};

inline double report_number(const json& rep, std::initializer_list<const char*> path) {
    const json* cur = &rep;
    for (const char* k : path) {
        if (!cur->is_object() || !cur->contains(k)) return std::nan("");
        cur = &cur->at(k);
    }
    return cur->is_number() ? cur->get<double>() : std::nan("");
}

inline std::string csv_number(double v) { return std::isnan(v) ? std::string() : format_double(v); }

/// Cartesian product of the axes, one isolated run directory per cell.
inline std::vector<SweepCell> sweep(const json& tmpl, const std::vector<SweepAxis>& axes, const std::string& out_dir,
                                    const RunOptions& base = {}) {
    std::vector<std::vector<json>> combos{{}};
    for (const auto& ax : axes) {
        std::vector<std::vector<json>> next;
        for (const auto& c : combos)
            for (const auto& v : ax.values) {
                auto e = c;
                e.push_back(v);
                next.push_back(std::move(e));
            }
        combos = std::move(next);
    }
    fs::create_directories(out_dir);

    std::vector<std::future<RunResult>> jobs;
    for (std::size_t i = 0; i < combos.size(); ++i) {
        json cfg = tmpl;
        for (std::size_t a = 0; a < axes.size(); ++a) set_path(cfg, axes[a].path, combos[i][a]);
        RunOptions o = base;
        char name[32];
        std::snprintf(name, sizeof name, "cell_%03zu", i);
        o.out_dir = (fs::path(out_dir) / name).string();
        o.resume.reset();
        jobs.push_back(std::async(std::launch::async, [cfg, o] { return run(cfg, o); }));
    }
    std::vector<SweepCell> cells;
    for (std::size_t i = 0; i < jobs.size(); ++i) cells.push_back({combos[i], jobs[i].get()});

    // Observed order along a grid-refinement axis: neighbours that differ only in node count.
    const auto nodes_axis = std::find_if(axes.begin(), axes.end(), [](const SweepAxis& a) { return a.path == "problem.nodes"; });
    auto metric = [](const json& rep) {
        const double e = report_number(rep, {"oracle", "max_error"});
        return std::isnan(e) ? report_number(rep, {"conservation", "relative_drift"}) : e;
    };

    std::ostringstream csv;
    csv << "cell";
    for (const auto& ax : axes) csv << ',' << ax.path;
    csv << ",exit_code,max_contraction,min_symbol_ratio,mass_drift,oracle_error,observed_order\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const json& rep = cells[i].result.report;
        double order = std::nan("");
        if (nodes_axis != axes.end()) {
            const auto ai = static_cast<std::size_t>(nodes_axis - axes.begin());
            const int n_i = cells[i].values[ai].get<int>();
            int best = -1;
            for (std::size_t j = 0; j < cells.size(); ++j) {
                bool same = true;
                for (std::size_t a = 0; a < axes.size(); ++a)
                    if (a != ai && cells[j].values[a] != cells[i].values[a]) same = false;
                const int n_j = cells[j].values[ai].get<int>();
                if (same && n_j < n_i && (best < 0 || n_j > cells[static_cast<std::size_t>(best)].values[ai].get<int>()))
                    best = static_cast<int>(j);
            }
            if (best >= 0) {
                const int n_j = cells[static_cast<std::size_t>(best)].values[ai].get<int>();
                const double e_i = metric(rep), e_j = metric(cells[static_cast<std::size_t>(best)].result.report);
                if (e_i > 0.0 && e_j > 0.0)
                    order = std::log(e_j / e_i) / std::log(static_cast<double>(n_i - 1) / (n_j - 1));
            }
        }
        csv << i;
        for (const auto& v : cells[i].values) csv << ',' << (v.is_string() ? v.get<std::string>() : v.dump());
        csv << ',' << cells[i].result.exit_code << ',' << csv_number(report_number(rep, {"contraction", "max_factor"})) << ','
            << csv_number(report_number(rep, {"symbol", "ellipticity", "min_ratio"})) << ','
            << csv_number(report_number(rep, {"conservation", "relative_drift"})) << ','
            << csv_number(report_number(rep, {"oracle", "max_error"})) << ',' << csv_number(order) << '\n';
    }
    write_text(fs::path(out_dir) / "summary.csv", csv.str());
    return cells;
}

}  // namespace qplab::harness
