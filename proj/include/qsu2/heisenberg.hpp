/**
 * @file heisenberg.hpp
 * @brief Scalar checks of the Heisenberg-Weyl realization of the (s, r) algebra.
 *
 * e^{mu p} acts as the exact shift f(x) -> f(x + mu); nothing is discretized,
 * so every identity here holds to rounding. Functions of p other than
 * exponentials are only applied to exponential test functions e^{kx}, on which
 * p acts as multiplication by k.
 */
#pragma once

#include "qsu2/qcore.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qsu2::heisenberg {

using Fn = std::function<double(double)>;

/// Distance kept from every coth singularity.
inline constexpr double kPoleExclusion = 0.1;

inline double guarded_coth(double arg) {
    if (std::abs(arg) < kPoleExclusion) {
        throw InvalidInput("evaluation point within " + sci(kPoleExclusion) + " of a coth pole (argument " +
                           sci(arg) + ")");
    }
    return 1.0 / std::tanh(arg);
}

struct TestFunction {
    std::string name;
    Fn f;
    std::optional<double> exponent;  ///< k when f = c * e^{kx}

    static TestFunction exponential(double k, double amplitude = 1.0) {
        return {"exp(" + std::to_string(k) + "x)", [k, amplitude](double x) { return amplitude * std::exp(k * x); }, k};
    }
    static TestFunction constant_one() { return {"1", [](double) { return 1.0; }, 0.0}; }
};

/// {1, x, x^2, e^{x/3}, sin x}.
inline std::vector<TestFunction> default_test_functions() {
    return {
        TestFunction::constant_one(),
        {"x", [](double x) { return x; }, std::nullopt},
        {"x^2", [](double x) { return x * x; }, std::nullopt},
        TestFunction::exponential(1.0 / 3.0),
        {"sin x", [](double x) { return std::sin(x); }, std::nullopt},
    };
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    if (n == 1) return {lo};
    for (int k = 0; k < n; ++k) out.push_back(lo + (hi - lo) * k / (n - 1));
    return out;
}

/// |a - b| / (1 + |a| + |b|).
inline double pointwise(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b)); }

// ---------------------------------------------------------------------------
// Classical level: {s, r} = tanh t (s^2 - r^2 + 1)

struct ClassicalSolution {
    double t;
    double nu;
    double phi;
    std::vector<std::pair<double, double>> grid;  ///< (p, x)
};

/// s = sinh(tp), r = cosh(tp) coth(nu x + phi) with nu = tanh t / t.
inline ClassicalSolution make_classical_solution(double t, double phi, std::vector<std::pair<double, double>> grid) {
    if (t == 0.0 || !std::isfinite(t)) throw InvalidInput("classical solution requires finite t != 0");
    return ClassicalSolution{t, std::tanh(t) / t, phi, std::move(grid)};
}

/// n x n grid over [lo, hi]^2.
inline std::vector<std::pair<double, double>> square_grid(double lo, double hi, int n) {
    std::vector<std::pair<double, double>> g;
    for (double p : linspace(lo, hi, n))
        for (double x : linspace(lo, hi, n)) g.emplace_back(p, x);
    return g;
}

/// max over the grid of |{s,r} - tanh t (s^2-r^2+1)| / (1 + |s^2-r^2+1|), exact derivatives.
inline double poisson_residual(const ClassicalSolution& sol) {
    const double t = sol.t;
    double worst = 0.0;
    for (auto [p, x] : sol.grid) {
        const double u = sol.nu * x + sol.phi;
        const double cth = guarded_coth(u);
        const double csch2 = cth * cth - 1.0;
        const double s = std::sinh(t * p);
        const double r = std::cosh(t * p) * cth;
        const double ds_dp = t * std::cosh(t * p);
        const double dr_dx = -std::cosh(t * p) * sol.nu * csch2;
        const double ds_dx = 0.0;
        const double dr_dp = t * std::sinh(t * p) * cth;
        const double bracket = ds_dp * dr_dx - ds_dx * dr_dp;
        const double source = s * s - r * r + 1.0;
        worst = std::max(worst, std::abs(bracket - std::tanh(t) * source) / (1.0 + std::abs(source)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Quantum level: r = (A(x) e^{tp} + e^{-tp} B(x)) / 2

struct QuantumRealization {
    double t;
    double F;
    Fn A;
    Fn B;
};

/// A(x) = coth(x + F), B(x) = A(x - t).
inline QuantumRealization coth_realization(double t, double F) {
    Fn A = [F](double x) { return guarded_coth(x + F); };
    Fn B = [F, t](double x) { return guarded_coth(x - t + F); };
    return QuantumRealization{t, F, A, B};
}

struct ShiftEquationResiduals {
    double a_equation = 0.0;  ///< A(x+t) - A(x) = tanh t (1 - A(x+t) A(x))
    double b_equation = 0.0;  ///< same for B
    double coupled = 0.0;     ///< A(x)-A(x-t)+B(x)-B(x-t) = tanh t (2 - A(x)B(x) - A(x-t)B(x-t))
    double selfconsistency = 0.0;  ///< max |(A(x) - B(x-t)) (B(x) - A(x-t))|

    double worst() const { return std::max({a_equation, b_equation, coupled, selfconsistency}); }
};

inline ShiftEquationResiduals shift_eq_residual(const QuantumRealization& qr, const std::vector<double>& xs) {
    const double t = qr.t;
    const double th = std::tanh(t);
    ShiftEquationResiduals res;
    for (double x : xs) {
        const double a0 = qr.A(x), a1 = qr.A(x + t), am = qr.A(x - t);
        const double b0 = qr.B(x), b1 = qr.B(x + t), bm = qr.B(x - t);
        res.a_equation = std::max(res.a_equation, pointwise(a1 - a0, th * (1.0 - a1 * a0)));
        res.b_equation = std::max(res.b_equation, pointwise(b1 - b0, th * (1.0 - b1 * b0)));
        res.coupled = std::max(res.coupled, pointwise(a0 - am + b0 - bm, th * (2.0 - a0 * b0 - am * bm)));
        res.selfconsistency = std::max(res.selfconsistency, std::abs((a0 - bm) * (b0 - am)));
    }
    return res;
}

/// Operator on functions of x.
using Op = std::function<Fn(const Fn&)>;

/// e^{mu p}: f -> f(. + mu).
inline Op shift(double mu) {
    return [mu](const Fn& f) -> Fn { return [f, mu](double x) { return f(x + mu); }; };
}

/// Which realization of r to apply.
enum class ROrdering {
    shift_form,     ///< (A(x) e^{tp} + e^{-tp} B(x)) / 2 with the realization's A, B
    cosh_then_coth, ///< cosh(tp) * coth(x + F)
    coth_then_cosh, ///< coth(x + F) * cosh(tp)
};

/// s f = (f(x+t) - f(x-t)) / 2.
inline Fn apply_s(double t, const Fn& f) {
    return [f, t](double x) { return 0.5 * (f(x + t) - f(x - t)); };
}

inline Fn apply_r(const QuantumRealization& qr, ROrdering ordering, const Fn& f) {
    const double t = qr.t;
    switch (ordering) {
        case ROrdering::shift_form: {
            // e^{-tp} B(x) f(x) = B(x-t) f(x-t)
            Fn A = qr.A, B = qr.B;
            return [A, B, f, t](double x) { return 0.5 * (A(x) * f(x + t) + B(x - t) * f(x - t)); };
        }
        case ROrdering::cosh_then_coth: {
            const double F = qr.F;
            return [F, f, t](double x) {
                return 0.5 * (guarded_coth(x + t + F) * f(x + t) + guarded_coth(x - t + F) * f(x - t));
            };
        }
        case ROrdering::coth_then_cosh: {
            const double F = qr.F;
            return [F, f, t](double x) { return guarded_coth(x + F) * 0.5 * (f(x + t) + f(x - t)); };
        }
    }
    throw InvalidInput("unknown r ordering");
}

/**
 * @brief Applies both sides of [s, r] = tanh t (s^2 - r^2 + 1) to each test
 *        function and returns the worst pointwise residual.
 */
inline double operator_commutator_residual(const QuantumRealization& qr, const std::vector<TestFunction>& testfns,
                                           const std::vector<double>& xs,
                                           ROrdering ordering = ROrdering::shift_form) {
    const double t = qr.t;
    const double th = std::tanh(t);
    double worst = 0.0;
    for (const auto& tf : testfns) {
        const Fn& f = tf.f;
        const Fn sf = apply_s(t, f);
        const Fn rf = apply_r(qr, ordering, f);
        const Fn srf = apply_s(t, rf);
        const Fn rsf = apply_r(qr, ordering, sf);
        const Fn ssf = apply_s(t, sf);
        const Fn rrf = apply_r(qr, ordering, rf);
        for (double x : xs) {
            const double lhs = srf(x) - rsf(x);
            const double rhs = th * (ssf(x) - rrf(x) + f(x));
            worst = std::max(worst, pointwise(lhs, rhs));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Ladder operators: sinh(tp) Theta = Theta sinh(t(p +- 2))

struct LadderAnsatz {
    double t;
    int direction = +1;          ///< +1: Theta+ = e^{+2x}, label shift +2; -1: Theta-
    Fn amplitude;                ///< F(p); empty means the constant 1
    Fn phase;                    ///< f(p); empty means the constant 0
    double exponent = 2.0;       ///< Theta carries e^{direction * exponent * x}; 2 is the ladder value
    double label_shift = 2.0;    ///< shift of p on the right-hand side

    bool constant_p_functions() const { return !amplitude && !phase; }
};

namespace detail {

/// A function of x with optional exponential exponent, propagated through shifts.
struct Tracked {
    Fn f;
    std::optional<double> exponent;
};

/// Theta g = F(p) e^{f(p)} e^{+-c x} g.
inline Tracked apply_theta(const LadderAnsatz& la, const Tracked& g) {
    const double c = la.direction * la.exponent;
    const Fn inner = g.f;
    Fn lifted = [inner, c](double x) { return std::exp(c * x) * inner(x); };
    std::optional<double> k;
    if (g.exponent) k = *g.exponent + c;
    if (la.constant_p_functions()) return {lifted, k};
    if (!k) throw InvalidInput("non-constant F(p), f(p) can only act on exponential test functions");
    const double factor = (la.amplitude ? la.amplitude(*k) : 1.0) * std::exp(la.phase ? la.phase(*k) : 0.0);
    return {[lifted, factor](double x) { return factor * lifted(x); }, k};
}

/// sinh(t(p + a)) g = (e^{ta} g(x+t) - e^{-ta} g(x-t)) / 2.
inline Tracked apply_shifted_sinh(double t, double a, const Tracked& g) {
    const Fn inner = g.f;
    return {[inner, t, a](double x) { return 0.5 * (std::exp(t * a) * inner(x + t) - std::exp(-t * a) * inner(x - t)); },
            g.exponent};
}

}  // namespace detail

inline double ladder_shift_residual(const LadderAnsatz& la, const std::vector<TestFunction>& testfns,
                                    const std::vector<double>& xs) {
    double worst = 0.0;
    const double shift_by = la.direction * la.label_shift;
    for (const auto& tf : testfns) {
        const detail::Tracked f{tf.f, tf.exponent};
        const detail::Tracked lhs = detail::apply_shifted_sinh(la.t, 0.0, detail::apply_theta(la, f));
        const detail::Tracked rhs = detail::apply_theta(la, detail::apply_shifted_sinh(la.t, shift_by, f));
        for (double x : xs) worst = std::max(worst, pointwise(lhs.f(x), rhs.f(x)));
    }
    return worst;
}

}  // namespace qsu2::heisenberg
