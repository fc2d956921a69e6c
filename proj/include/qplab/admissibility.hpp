#pragma once

// Exponent bookkeeping for the weighted maximal-regularity setting.
//
// Every routine is templated on the scalar type so the same inequalities can be
// evaluated exactly (qplab::Rational) or in floating point (double). Strict
// inequalities near their boundary must not flip through rounding, so callers
// that start from decimal input should prefer Rational and only fall back to
// double on overflow.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qplab/errors.hpp"
#include "qplab/rational.hpp"

namespace qplab {

enum class Order { second = 2, fourth = 4 };

inline const char* to_string(Order o) { return o == Order::second ? "second" : "fourth"; }

inline Order parse_order(const std::string& s) {
    if (s == "second" || s == "2") return Order::second;
    if (s == "fourth" || s == "4") return Order::fourth;
    throw PreconditionError("order must be 'second' or 'fourth', got '" + s + "'");
}

template <class T>
struct ExponentConfig {
    T p;
    T q;
    int n = 1;
    T mu;
    Order order = Order::second;

    ExponentConfig(T p_, T q_, int n_, T mu_, Order order_)
        : p(std::move(p_)), q(std::move(q_)), n(n_), mu(std::move(mu_)), order(order_) {
        const T one = from_int<T>(1);
        if (!(p > one)) throw PreconditionError("p must exceed 1");
        if (!(q > one)) throw PreconditionError("q must exceed 1");
        if (n < 1) throw PreconditionError("n must be a positive integer");
        if (!(mu > one / p) || mu > one) throw PreconditionError("mu must lie in (1/p, 1]");
    }

    /// mu - 1/p, the trace-space interpolation exponent.
    T gamma() const { return mu - from_int<T>(1) / p; }
};

template <class T>
struct StructureExponents {
    T beta;
    std::vector<std::pair<T, T>> pairs;  // (rho_j, beta_j)
    T epsilon;
    T kappa_exp;  // 1/2 + n/(6q), fourth order only
    T theta;      // (kappa + eps - gamma) / (beta - gamma), fourth order only
};

template <class T>
T kappa_exponent(const ExponentConfig<T>& cfg) {
    return ratio<T>(1, 2) + from_int<T>(cfg.n) / (from_int<T>(6) * cfg.q);
}

template <class T>
T reiteration_theta(const ExponentConfig<T>& cfg, const T& beta, const T& eps) {
    const T g = cfg.gamma();
    if (!(beta > g)) throw PreconditionError("beta must exceed mu - 1/p");
    return (kappa_exponent(cfg) + eps - g) / (beta - g);
}

/// Pairs used for the quadratic gradient term of reaction-diffusion systems:
/// (1, beta) and (2, mu - 1/p).
template <class T>
std::vector<std::pair<T, T>> second_order_pairs(const ExponentConfig<T>& cfg, const T& beta) {
    return {{from_int<T>(1), beta}, {from_int<T>(2), cfg.gamma()}};
}

/// The five pairs that control the lower-order part of the graph flows.
template <class T>
std::vector<std::pair<T, T>> fourth_order_pairs(const ExponentConfig<T>& cfg, const T& beta, const T& eps) {
    const T kappa = kappa_exponent(cfg);
    const T th = reiteration_theta(cfg, beta, eps);
    const T one = from_int<T>(1);
    const T g = cfg.gamma();
    return {{one, kappa + eps}, {th, beta}, {one + th, g}, {from_int<T>(2) * th, kappa + eps},
            {from_int<T>(3) * th, g}};
}

template <class T>
StructureExponents<T> make_structure(const ExponentConfig<T>& cfg, const T& beta,
                                     std::vector<std::pair<T, T>> pairs, const T& eps) {
    StructureExponents<T> se{beta, std::move(pairs), eps, from_int<T>(0), from_int<T>(0)};
    if (cfg.order == Order::fourth) {
        se.kappa_exp = kappa_exponent(cfg);
        if (beta > cfg.gamma()) se.theta = reiteration_theta(cfg, beta, eps);
    }
    return se;
}

// ---------------------------------------------------------------------------

template <class T>
struct DimensionalReport {
    bool admissible = false;
    bool dimension_ok = false;  // 2/p + n/q < 2  or  4/p + n/q < 3
    bool mu_above_mu0 = false;
    T dimension_lhs;
    T dimension_bound;
    T mu0;
    bool compatibility_needed = false;
    std::string violated;  // empty when admissible
};

template <class T>
T mu0_of(const ExponentConfig<T>& cfg) {
    const T one = from_int<T>(1);
    const T n = from_int<T>(cfg.n);
    if (cfg.order == Order::second) return one / cfg.p + n / (from_int<T>(2) * cfg.q);
    return one / cfg.p + n / (from_int<T>(4) * cfg.q) + ratio<T>(1, 4);
}

template <class T>
DimensionalReport<T> check_dimensional(const ExponentConfig<T>& cfg) {
    DimensionalReport<T> r;
    const T one = from_int<T>(1);
    const T n = from_int<T>(cfg.n);
    if (cfg.order == Order::second) {
        r.dimension_lhs = from_int<T>(2) / cfg.p + n / cfg.q;
        r.dimension_bound = from_int<T>(2);
        // A Neumann trace exists in the initial-data space only above this threshold.
        r.compatibility_needed = from_int<T>(2) * cfg.mu > one + from_int<T>(2) / cfg.p + one / cfg.q;
    } else {
        r.dimension_lhs = from_int<T>(4) / cfg.p + n / cfg.q;
        r.dimension_bound = from_int<T>(3);
        r.compatibility_needed = true;
    }
    r.mu0 = mu0_of(cfg);
    r.dimension_ok = r.dimension_lhs < r.dimension_bound;
    r.mu_above_mu0 = cfg.mu > r.mu0;
    r.admissible = r.dimension_ok && r.mu_above_mu0;
    if (!r.dimension_ok) {
        r.violated = cfg.order == Order::second ? "2/p + n/q < 2 fails: 2/p + n/q = " : "4/p + n/q < 3 fails: 4/p + n/q = ";
        r.violated += std::to_string(to_real(r.dimension_lhs));
    } else if (!r.mu_above_mu0) {
        r.violated = cfg.order == Order::second ? "mu > mu_0 = 1/p + n/2q fails: mu = "
                                                : "mu > mu_0 = 1/p + n/4q + 1/4 fails: mu = ";
        r.violated += std::to_string(to_real(cfg.mu)) + ", mu_0 = " + std::to_string(to_real(r.mu0));
    }
    return r;
}

// ---------------------------------------------------------------------------

template <class T>
struct F2Report {
    std::vector<bool> per_pair;
    std::vector<T> ratios;
    std::vector<bool> pair_valid;  // rho_j >= 0 and beta_j in [mu - 1/p, beta]
    bool all_pass = false;
};

/// ratio_j = (rho_j (beta - gamma) + beta_j - gamma) / (1 - gamma), gamma = mu - 1/p; pass iff ratio_j < 1.
template <class T>
F2Report<T> check_F2_exponents(const ExponentConfig<T>& cfg, const StructureExponents<T>& se) {
    F2Report<T> r;
    const T g = cfg.gamma();
    const T denom = from_int<T>(1) - g;
    const T zero = from_int<T>(0);
    r.all_pass = true;
    for (const auto& [rho, bj] : se.pairs) {
        const T q = (rho * (se.beta - g) + bj - g) / denom;
        const bool pass = q < from_int<T>(1);
        r.ratios.push_back(q);
        r.per_pair.push_back(pass);
        r.pair_valid.push_back(!(rho < zero) && !(bj < g) && !(bj > se.beta));
        r.all_pass = r.all_pass && pass;
    }
    return r;
}

/// (1 + rho)(beta - gamma) < 1 - gamma.
template <class T>
bool simple_restriction(const T& rho, const T& beta, const ExponentConfig<T>& cfg) {
    const T g = cfg.gamma();
    if (!(beta > g)) throw PreconditionError("simple_restriction requires beta > mu - 1/p");
    return (from_int<T>(1) + rho) * (beta - g) < from_int<T>(1) - g;
}

// ---------------------------------------------------------------------------

template <class T>
struct BetaWindow {
    T lower;
    T upper;
    bool empty = true;
    std::string lower_constraint;
    std::string upper_constraint;
    std::string binding;  // populated when empty

    bool contains(const T& beta) const { return !empty && lower < beta && beta < upper; }
};

/// Open interval of admissible beta. epsilon only enters the fourth-order cap.
template <class T>
BetaWindow<T> beta_window(const ExponentConfig<T>& cfg, const T& epsilon) {
    const T one = from_int<T>(1);
    const T n = from_int<T>(cfg.n);
    const T g = cfg.gamma();
    BetaWindow<T> w;

    T embed;
    T cap;
    std::string embed_name;
    std::string cap_name;
    if (cfg.order == Order::second) {
        embed = ratio<T>(1, 2) + n / (from_int<T>(4) * cfg.q);
        embed_name = "beta > 1/2 + n/4q";
        cap = (one + g) / from_int<T>(2);
        cap_name = "beta < (1 + mu - 1/p)/2";
    } else {
        embed = ratio<T>(3, 4) + n / (from_int<T>(12) * cfg.q);
        embed_name = "beta > 3/4 + n/12q";
        cap = g + ratio<T>(1, 2) - n / (from_int<T>(6) * cfg.q) - epsilon;
        cap_name = "beta < mu - 1/p + 1/2 - n/6q - eps";
    }

    if (embed > g) {
        w.lower = embed;
        w.lower_constraint = embed_name;
    } else {
        w.lower = g;
        w.lower_constraint = "beta > mu - 1/p";
    }
    if (cap < one) {
        w.upper = cap;
        w.upper_constraint = cap_name;
    } else {
        w.upper = one;
        w.upper_constraint = "beta < 1";
    }
    w.empty = !(w.lower < w.upper);
    if (w.empty) w.binding = w.lower_constraint + " conflicts with " + w.upper_constraint;
    return w;
}

}  // namespace qplab
