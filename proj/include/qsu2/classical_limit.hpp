/**
 * @file classical_limit.hpp
 * @brief Contraction t -> 0: s -> t s1, r -> 1 + t r1, R -> 1 + t H.
 */
#pragma once

#include "qsu2/qcore.hpp"
#include "qsu2/standard_rep.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace qsu2 {

/// Undeformed su(2) in the form s1 = J+ + J-, r1 = H + J+ - J-.
struct ClassicalTriple {
    RealMatrix s1;
    RealMatrix r1;
    RealMatrix H;
    double casimir;  ///< 2l(l+1)
};

/// rel_residual([s1, r1], -2 r1).
inline double classical_bracket_residual(const ClassicalTriple& c) {
    return rel_residual(commutator(c.s1, c.r1), -2.0 * c.r1);
}

/// rel_residual(r1 H, (r1^2 - s1^2)/2 - s1 + C).
inline double classical_h_residual(const ClassicalTriple& c) {
    const int d = static_cast<int>(c.H.rows());
    return rel_residual(c.r1 * c.H, 0.5 * (c.r1 * c.r1 - c.s1 * c.s1) - c.s1 + c.casimir * identity(d));
}

inline ClassicalTriple undeformed_su2(const Spin& spin) {
    const int d = spin.dim();
    const double l = spin.l();
    RealMatrix Jp = RealMatrix::Zero(d, d);
    RealMatrix H = RealMatrix::Zero(d, d);
    for (int j = 1; j <= d; ++j) H(j - 1, j - 1) = spin.weight(j);
    for (int j = 1; j < d; ++j) {
        double m = spin.magnetic(j + 1);
        Jp(j - 1, j) = std::sqrt((l - m) * (l + m + 1.0));
    }
    const RealMatrix Jm = Jp.transpose();
    ClassicalTriple c{Jp + Jm, H + Jp - Jm, H, 2.0 * l * (l + 1.0)};

    const double bracket = classical_bracket_residual(c);
    if (!(bracket <= 1e-13)) throw VerificationError("[s1, r1] = -2 r1 fails: " + sci(bracket));
    const double h_res = classical_h_residual(c);
    if (!(h_res <= 1e-12)) throw VerificationError("r1 H identity fails: " + sci(h_res));
    return c;
}

struct LimitResiduals {
    double t;
    double s;  ///< rel_residual(s/t, s1)
    double r;  ///< rel_residual((r - 1)/t, r1)
    double R;  ///< rel_residual((R - 1)/t, H)
};

inline LimitResiduals limit_residuals(const Spin& spin, double t) {
    if (!(t > 0.0 && t <= 0.1)) throw InvalidInput("limit_residuals requires 0 < t <= 0.1");
    const ClassicalTriple c = undeformed_su2(spin);
    const DerivedGenerators g = derive_generators(build_standard(spin, t));
    const RealMatrix one = identity(spin.dim());
    return LimitResiduals{t, rel_residual(g.s / t, c.s1), rel_residual((g.r - one) / t, c.r1),
                          rel_residual((g.R - one) / t, c.H)};
}

/// Residuals at or below this are treated as exact (two_l = 0 has no error at all).
constexpr double kExactResidual = 1e-14;

/// prev / cur; +inf when cur is exact, so an exact row never reads as stalled.
inline double halving_ratio(double prev, double cur) {
    if (cur <= kExactResidual) return std::numeric_limits<double>::infinity();
    return prev / cur;
}

struct ConvergenceRow {
    LimitResiduals residuals;
    double s_ratio = 0.0;  ///< residual(previous t) / residual(this t); 0 on the first row
    double r_ratio = 0.0;
    double R_ratio = 0.0;
};

/// Residuals at t0, t0/2, ..., t0/2^halvings with successive ratios.
inline std::vector<ConvergenceRow> convergence_table(const Spin& spin, double t0, int halvings) {
    if (halvings < 0) throw InvalidInput("halvings must be non-negative");
    std::vector<ConvergenceRow> rows;
    double t = t0;
    for (int k = 0; k <= halvings; ++k, t *= 0.5) {
        ConvergenceRow row{limit_residuals(spin, t)};
        if (!rows.empty()) {
            const auto& prev = rows.back().residuals;
            row.s_ratio = halving_ratio(prev.s, row.residuals.s);
            row.r_ratio = halving_ratio(prev.r, row.residuals.r);
            row.R_ratio = halving_ratio(prev.R, row.residuals.R);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qsu2
