/**
 * @file sr_algebra.hpp
 * @brief Relations of the two-generator algebra [s, r] = tanh t (s^2 - r^2 + 1).
 *
 * These are representation independent: they take any pair (s, r) of equal
 * dimension, whether it comes from the standard basis or the triangular
 * construction.
 */
#pragma once

#include "qsu2/qcore.hpp"

#include <algorithm>
#include <cmath>

namespace qsu2 {

/// s^2 - r^2 + 1.
inline RealMatrix casimir_source(const RealMatrix& s, const RealMatrix& r) {
    require_same_shape(s, r, "casimir_source");
    return s * s - r * r + identity(static_cast<int>(s.rows()));
}

/// Size of the products s^2, r^2. In s^2 - r^2 + 1 they cancel down to O(1)
/// on the diagonal, so rounding there is measured against this, not the result.
inline double square_scale(const RealMatrix& s, const RealMatrix& r) {
    return std::max(max_abs(s * s), max_abs(r * r));
}

/// rel_residual([s, r], tanh t (s^2 - r^2 + 1)), scaled by square_scale.
inline double defining_residual(const RealMatrix& s, const RealMatrix& r, double t) {
    return rel_residual(commutator(s, r), std::tanh(t) * casimir_source(s, r), std::tanh(std::abs(t)) * square_scale(s, r));
}

/// Residuals of the identities used to move s + r through R.
struct IdentityChain {
    double minus_plus = 0.0;  ///< (s-r)(s+r)+1 = e^t / cosh t (s^2-r^2+1)
    double plus_minus = 0.0;  ///< (s+r)(s-r)+1 = e^-t / cosh t (s^2-r^2+1)
    double transport = 0.0;   ///< (s^2-r^2+1)(s+r) = e^2t (s+r)(s^2-r^2+1)

    double worst() const { return std::max({minus_plus, plus_minus, transport}); }
};

inline IdentityChain identity_chain(const RealMatrix& s, const RealMatrix& r, double t) {
    const RealMatrix one = identity(static_cast<int>(s.rows()));
    const RealMatrix x = casimir_source(s, r);
    const RealMatrix sp = s + r;
    const RealMatrix sm = s - r;
    const double sq = square_scale(s, r);
    IdentityChain chain;
    chain.minus_plus = rel_residual(sm * sp + one, (std::exp(t) / std::cosh(t)) * x, sq);
    chain.plus_minus = rel_residual(sp * sm + one, (std::exp(-t) / std::cosh(t)) * x, sq);
    chain.transport = rel_residual(x * sp, std::exp(2.0 * t) * (sp * x), std::exp(2.0 * std::abs(t)) * sq * max_abs(sp));
    return chain;
}

}  // namespace qsu2
