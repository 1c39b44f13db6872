/**
 * @file casimir_r.hpp
 * @brief Recovering the group-like generator R from (s, r) and the Casimir.
 *
 * With K = cosh t (C sinh^2 t + (1 - r) cosh t + s sinh t), an invertible R must
 * solve the singular system R K = (s^2 - r^2 + 1) / 2. That forces det K = 0,
 * which restricts C to finitely many values. For the physical value the last
 * diagonal pivot of K vanishes and the solutions form an affine family with one
 * free constant per row; the constants are fixed by requiring
 * Tr R^k = sum_m e^{2tkm}, k = 1..d.
 */
#pragma once

#include "qsu2/qcore.hpp"
#include "qsu2/sr_algebra.hpp"
#include "qsu2/standard_rep.hpp"
#include "qsu2/triangular_rep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace qsu2 {

/// A diagonal pivot of K vanishes when |K_jj| <= kVanishingPivot * (1 + max|K|).
inline constexpr double kVanishingPivot = 1e-10;

/// Largest 2|t| 2l for the R pipeline. R has condition number e^{2|t| 2l}; beyond
/// e^28 (about 1e12) the singular pivot of K and the family's invertibility test
/// are below what binary64 resolves.
inline constexpr double kRConditionLoad = 28.0;

inline bool R_pipeline_admissible(const Spin& spin, double t) {
    return 2.0 * std::abs(t) * spin.two_l() <= kRConditionLoad;
}

/// A probe member with sigma_min / sigma_max above this is taken as invertible.
inline constexpr double kSingularFamilyRatio = 1e-14;

inline RealMatrix build_K(const SRPair& sr, double casimir) {
    const double t = sr.t;
    const double sh = std::sinh(t);
    const double ch = std::cosh(t);
    const int d = sr.spin.dim();
    const RealMatrix one = identity(d);
    return ch * (casimir * sh * sh * one + (one - sr.r) * ch + sr.s * sh);
}

/// (s^2 - r^2 + 1) / 2.
inline RealMatrix R_equation_rhs(const SRPair& sr) { return 0.5 * casimir_source(sr.s, sr.r); }

struct CasimirChoice {
    double value;
    int vanishing_index;               ///< 1-based, first row whose pivot vanishes
    std::vector<int> vanishing_indices;
    bool physical;
};

/**
 * @brief All C for which det K = 0.
 *
 * Pivot j of K is cosh t (C sinh^2 t + cosh t - cosh(t(2l+1-2j))), so
 * C_j sinh^2 t = cosh(t(2l+1-2j)) - cosh t. Indices with equal |2l+1-2j|
 * share a value and are merged. The physical value is the one with
 * |2l+1-2j| = 2l+1, reached only at j = d.
 */
inline std::vector<CasimirChoice> admissible_casimirs(const Spin& spin, double t) {
    check_guard_rail(spin, t);
    const double sh = std::sinh(t);
    std::vector<CasimirChoice> out;
    std::vector<int> keys;
    for (int j = 1; j <= spin.dim(); ++j) {
        const int key = std::abs(spin.two_l() + 1 - 2 * j);
        bool merged = false;
        for (std::size_t k = 0; k < keys.size(); ++k) {
            if (keys[k] == key) {
                out[k].vanishing_indices.push_back(j);
                merged = true;
            }
        }
        if (merged) continue;
        keys.push_back(key);
        const double value = (std::cosh(t * key) - std::cosh(t)) / (sh * sh);
        out.push_back(CasimirChoice{value, j, {j}, key == spin.two_l() + 1});
    }
    return out;
}

inline CasimirChoice physical_choice(const Spin& spin, double t) {
    for (const auto& c : admissible_casimirs(spin, t))
        if (c.physical) return c;
    throw VerificationError("no physical Casimir found");
}

/// Indices (1-based) of vanishing diagonal pivots.
inline std::vector<int> vanishing_pivots(const RealMatrix& K) {
    const double cutoff = kVanishingPivot * (1.0 + max_abs(K));
    std::vector<int> out;
    for (Eigen::Index j = 0; j < K.rows(); ++j)
        if (std::abs(K(j, j)) <= cutoff) out.push_back(static_cast<int>(j + 1));
    return out;
}

/// Affine solution set {R0 + sum_a w_a N_a}.
struct RFamily {
    RealMatrix R0;
    std::vector<RealMatrix> freedoms;
    std::vector<int> freedom_rows;   ///< 1-based row carrying each freedom
    std::vector<int> freedom_pivots; ///< 1-based singular pivot that introduced it

    int size() const { return static_cast<int>(freedoms.size()); }

    RealMatrix evaluate(const RealVector& w) const {
        if (w.size() != size()) throw InvalidInput("RFamily::evaluate: expected " + std::to_string(size()) + " weights");
        RealMatrix R = R0;
        for (int a = 0; a < size(); ++a) R += w(a) * freedoms[static_cast<std::size_t>(a)];
        return R;
    }

    /// Least-squares weights of the member closest to target (Frobenius norm).
    RealVector project(const RealMatrix& target) const {
        const Eigen::Index n = R0.size();
        RealMatrix A(n, size());
        for (int a = 0; a < size(); ++a)
            A.col(a) = freedoms[static_cast<std::size_t>(a)].reshaped();
        RealVector b = (target - R0).reshaped();
        return A.colPivHouseholderQr().solve(b);
    }
};

struct NoInvertibleSolution {
    std::string reason;
    int row = 0;        ///< 1-based row whose singular equation failed, 0 if not applicable
    int pivot = 0;      ///< 1-based singular pivot
    bool inconsistent = false;
};

using RSolveResult = std::variant<RFamily, NoInvertibleSolution>;

namespace detail {

/// Diagonal d with d A d^{-1} balanced in row and column 1-norms (Osborne iteration,
/// powers of two so the scaling itself is exact).
inline RealVector balancing_scale(const RealMatrix& A) {
    const Eigen::Index n = A.rows();
    RealVector d = RealVector::Ones(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            double row = 0.0, col = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                row += std::abs(A(i, j)) * d(i) / d(j);
                col += std::abs(A(j, i)) * d(j) / d(i);
            }
            if (row == 0.0 || col == 0.0) continue;
            const double f = std::exp2(std::round(0.5 * std::log2(col / row)));
            if (f != 1.0 && (row * f + col / f) < 0.95 * (row + col)) {
                d(i) *= f;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return d;
}

/// sigma_min / sigma_max.
inline double probe_singular_ratio(const RealMatrix& R) {
    const RealVector sv = Eigen::JacobiSVD<RealMatrix>(R).singularValues();
    return sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
}

/// Every member of the family has |det R| negligible, probed at fixed pseudo-random weights.
/// det is homogeneous in each row, so a probe row may be any rescaled member
/// u0 R0_i + sum_a u_a N_a,i; normalizing each piece keeps rows of very different
/// size from hiding one another.
inline bool family_is_singular(const RFamily& family) {
    const int d = static_cast<int>(family.R0.rows());
    std::mt19937_64 rng(0x5eed'0001);
    std::uniform_real_distribution<double> unit(0.5, 1.5);
    std::bernoulli_distribution flip(0.5);
    auto normalized = [](RealVector v) {
        const double n = v.norm();
        return n > 0.0 ? RealVector(v / n) : v;
    };
    for (int probe = 0; probe < 4; ++probe) {
        RealMatrix R(d, d);
        for (int i = 0; i < d; ++i) R.row(i) = normalized(family.R0.row(i).transpose()).transpose();
        for (int a = 0; a < family.size(); ++a) {
            const int row = family.freedom_rows[static_cast<std::size_t>(a)] - 1;
            const double u = (flip(rng) ? 1.0 : -1.0) * unit(rng);
            R.row(row) += u * normalized(family.freedoms[static_cast<std::size_t>(a)].row(row).transpose()).transpose();
        }
        // A diagonal similarity leaves the rank alone but can improve the scaling a lot.
        R = apply_gauge(R, balancing_scale(R));
        if (probe_singular_ratio(R) > kSingularFamilyRatio) return false;
    }
    return true;
}

/**
 * @brief Rewrites a consistent family as minimum-norm R0 rows plus orthonormal
 *        left null vectors of K.
 *
 * Back-substitution makes the last column the free constant, and its null
 * vector then grows like 1 / (product of pivots); R0 and w n end up huge and
 * cancel. K is well conditioned away from its null space, so the SVD form
 * loses nothing.
 */
inline void to_orthonormal_form(RFamily& family, const RealMatrix& K, const RealMatrix& rhs) {
    const int d = static_cast<int>(K.rows());
    std::vector<std::vector<int>> per_row(static_cast<std::size_t>(d));
    for (int a = 0; a < family.size(); ++a)
        per_row[static_cast<std::size_t>(family.freedom_rows[static_cast<std::size_t>(a)] - 1)].push_back(a);
    const std::size_t m = per_row.front().size();
    for (const auto& r : per_row)
        if (r.size() != m) throw VerificationError("solution family has an uneven number of constants per row");
    if (m == 0) return;

    Eigen::JacobiSVD<RealMatrix> svd(K, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Index k = d - static_cast<Eigen::Index>(m);
    const RealVector sigma = svd.singularValues();
    const RealMatrix pinv_t = svd.matrixU().leftCols(k) * sigma.head(k).cwiseInverse().asDiagonal() *
                              svd.matrixV().leftCols(k).transpose();  // (K^+)^T
    const RealMatrix nulls = svd.matrixU().rightCols(static_cast<Eigen::Index>(m));

    RealMatrix R0(d, d);
    for (int i = 0; i < d; ++i) R0.row(i) = (pinv_t * rhs.row(i).transpose()).transpose();
    const double res = rel_residual(R0 * K, rhs);
    if (!(res <= kVanishingPivot)) {
        throw VerificationError("minimum-norm particular solution misses R K = rhs by " + sci(res));
    }
    family.R0 = R0;
    for (int i = 0; i < d; ++i) {
        for (std::size_t q = 0; q < m; ++q) {
            RealMatrix N = RealMatrix::Zero(d, d);
            N.row(i) = nulls.col(static_cast<Eigen::Index>(q)).transpose();
            family.freedoms[static_cast<std::size_t>(per_row[static_cast<std::size_t>(i)][q])] = std::move(N);
        }
    }
}

}  // namespace detail

/**
 * @brief Solves R K = rhs for lower-triangular K with vanishing pivots.
 *
 * Each row of R solves the transposed triangular system from the last column
 * backwards. Every unknown is tracked as an affine function of the free
 * constants introduced at singular pivots; a singular pivot's own equation
 * either pins an earlier constant or must read 0 = 0.
 */
inline RSolveResult solve_R_family(const RealMatrix& K, const RealMatrix& rhs) {
    require_same_shape(K, rhs, "solve_R_family");
    const int d = static_cast<int>(K.rows());
    if (upper_leakage(K) > 1e-12) throw InvalidInput("solve_R_family: K must be lower triangular");
    const std::vector<int> singular = vanishing_pivots(K);
    if (singular.empty()) {
        throw InvalidInput("solve_R_family: K has no vanishing pivot, so det R = 0 for the unique solution");
    }
    const double scale = 1.0 + max_abs(K);

    RFamily family;
    family.R0 = RealMatrix::Zero(d, d);

    for (int row = 1; row <= d; ++row) {
        // coeff(c, 0) is the constant part of x_c, coeff(c, 1 + a) the weight of free constant a.
        RealMatrix coeff = RealMatrix::Zero(d, 1);
        std::vector<int> param_pivot;
        for (int c = d; c >= 1; --c) {
            RealVector expr = RealVector::Zero(coeff.cols());
            expr(0) = rhs(row - 1, c - 1);
            double magnitude = std::abs(rhs(row - 1, c - 1));
            for (int k = c + 1; k <= d; ++k) {
                expr -= K(k - 1, c - 1) * coeff.row(k - 1).transpose();
                magnitude += std::abs(K(k - 1, c - 1)) * coeff.row(k - 1).cwiseAbs().sum();
            }
            const bool is_singular = std::find(singular.begin(), singular.end(), c) != singular.end();
            if (!is_singular) {
                coeff.row(c - 1) = expr.transpose() / K(c - 1, c - 1);
                continue;
            }
            // 0 * x_c = expr: constrain earlier constants, or check consistency.
            const double cutoff = kVanishingPivot * (1.0 + magnitude) * scale;
            Eigen::Index best = -1;
            double best_mag = cutoff;
            for (Eigen::Index a = 1; a < expr.size(); ++a) {
                if (std::abs(expr(a)) > best_mag) {
                    best_mag = std::abs(expr(a));
                    best = a;
                }
            }
            if (best >= 0) {
                // expr = 0 solved for constant `best`, substituted everywhere.
                RealVector substitution = -expr / expr(best);
                substitution(best) = 0.0;
                for (int k = c + 1; k <= d; ++k) {
                    double w = coeff(k - 1, best);
                    coeff.row(k - 1) += w * substitution.transpose();
                    coeff(k - 1, best) = 0.0;
                }
            } else if (std::abs(expr(0)) > cutoff) {
                return NoInvertibleSolution{"singular pivot " + std::to_string(c) + " gives inconsistent equation in row " +
                                                std::to_string(row),
                                            row, c, true};
            }
            coeff.conservativeResize(Eigen::NoChange, coeff.cols() + 1);
            coeff.col(coeff.cols() - 1).setZero();
            coeff(c - 1, coeff.cols() - 1) = 1.0;
            param_pivot.push_back(c);
        }
        family.R0.row(row - 1) = coeff.col(0).transpose();
        for (Eigen::Index a = 1; a < coeff.cols(); ++a) {
            if (coeff.col(a).cwiseAbs().maxCoeff() == 0.0) continue;  // eliminated constant
            RealMatrix N = RealMatrix::Zero(d, d);
            N.row(row - 1) = coeff.col(a).transpose();
            family.freedoms.push_back(std::move(N));
            family.freedom_rows.push_back(row);
            family.freedom_pivots.push_back(param_pivot[static_cast<std::size_t>(a - 1)]);
        }
    }

    detail::to_orthonormal_form(family, K, rhs);
    if (detail::family_is_singular(family)) {
        return NoInvertibleSolution{"every member of the solution family has det R = 0", 0, singular.front(), false};
    }
    return family;
}

/// Power sums sum_j e^{k t mu_j}, k = 1..d: traces of R^k for spectrum {e^{2tm}}.
inline std::vector<double> R_power_sums(const Spin& spin, double t) {
    std::vector<double> out;
    for (int k = 1; k <= spin.dim(); ++k) {
        double p = 0.0;
        for (int j = 1; j <= spin.dim(); ++j) p += std::exp(k * t * spin.weight(j));
        out.push_back(p);
    }
    return out;
}

struct KDirection {
    double constant = 0.0;  ///< least-squares c in [K, s+r] = c (s^2-r^2+1); 0 when s^2-r^2+1 = 0
    double residual = 0.0;
};

/// Fits [K, s+r] against s^2 - r^2 + 1. The two products K(s+r), (s+r)K are far
/// larger than their difference, so the residual is scaled by them.
inline KDirection k_direction(const RealMatrix& K, const SRPair& sr) {
    const RealMatrix sp = sr.s + sr.r;
    const RealMatrix left = K * sp;
    const RealMatrix right = sp * K;
    const RealMatrix x = casimir_source(sr.s, sr.r);
    const double xx = x.squaredNorm();
    KDirection out;
    out.constant = xx > 0.0 ? ((left - right).array() * x.array()).sum() / xx : 0.0;
    out.residual = rel_residual(left - right, out.constant * x, std::max(max_abs(left), max_abs(right)));
    return out;
}

/// Residuals of every relation R has to satisfy, measured on a given (s, r) pair.
struct RReport {
    IntertwiningResiduals intertwining;  ///< with T+- = (s +- r -+ R) / (2 sinh t)
    double equation_residual = 0.0;      ///< rel_residual(R K, (s^2-r^2+1)/2) at the physical C
    double k_constant = 0.0;             ///< fitted c in [K, s+r] = c (s^2-r^2+1)
    double k_direction = 0.0;            ///< scaled residual of [K, s+r] = c (s^2-r^2+1)
    double spectrum = 0.0;               ///< scale-aware distance to {e^{2tm}}
    double spectrum_imag = 0.0;          ///< largest |Im lambda| relative to the spectrum scale
    double det = 0.0;
    double condition = 0.0;              ///< 1-norm condition number estimate

    double det_residual() const { return std::abs(det - 1.0); }
};

inline RReport verify_R(const RealMatrix& R, const SRPair& sr) {
    const int d = sr.spin.dim();
    require_same_shape(R, sr.s, "verify_R");
    const double t = sr.t;
    const double sh = std::sinh(t);
    RReport rep;

    const RealMatrix Tp = (sr.s + sr.r - R) / (2.0 * sh);
    const RealMatrix Tm = (sr.s - sr.r + R) / (2.0 * sh);
    rep.intertwining = intertwining_residuals(Tp, Tm, R, t);

    const RealMatrix K = build_K(sr, physical_casimir(sr.spin, t));
    rep.equation_residual = rel_residual(R * K, R_equation_rhs(sr));

    const KDirection kd = k_direction(K, sr);
    rep.k_constant = kd.constant;
    rep.k_direction = kd.residual;

    Eigen::EigenSolver<RealMatrix> es(R, false);
    std::vector<double> computed;
    double imag = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        computed.push_back(es.eigenvalues()(k).real());
        imag = std::max(imag, std::abs(es.eigenvalues()(k).imag()));
    }
    const std::vector<double> predicted = R_spectrum(sr.spin, t);
    rep.spectrum = spectrum_mismatch(computed, predicted);
    double scale = 1.0;
    for (double p : predicted) scale = std::max(scale, 1.0 + std::abs(p));
    rep.spectrum_imag = imag / scale;

    Eigen::FullPivLU<RealMatrix> lu(R);
    rep.det = lu.determinant();
    if (lu.isInvertible()) {
        auto norm1 = [](const RealMatrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); };
        rep.condition = norm1(R) * norm1(lu.inverse());
    } else {
        rep.condition = INFINITY;
    }
    (void)d;
    return rep;
}

/**
 * @brief Standard-basis reference for R expressed in the gauge of a triangular pair.
 *
 * frame maps pipeline coordinates to the J_z basis: exp(tH) = frame * R * frame^{-1}.
 */
struct OracleFrame {
    RealMatrix R;
    RealMatrix frame;
    RealMatrix frame_inv;
    AlphaParams standard_alphas;
    RealVector gauge;
};

inline OracleFrame oracle_in_gauge(const SRPair& sr) {
    const Spin& spin = sr.spin;
    const StandardRep rep = build_standard(spin, sr.t);
    const DerivedGenerators gen = derive_generators(rep);
    const BasisChange bc = s_eigenbasis(gen, spin);
    const RealMatrix r_std = bc.to_eigenbasis(gen.r);

    OracleFrame out;
    AlphaParams target;
    for (int i = 2; i <= spin.dim(); ++i) {
        out.standard_alphas.values.push_back(r_std(i - 1, i - 2));
        target.values.push_back(sr.r(i - 1, i - 2));
    }
    out.gauge = gauge_between(out.standard_alphas, target);
    out.R = apply_gauge(bc.to_eigenbasis(gen.R), out.gauge);
    out.frame = bc.U * out.gauge.cwiseInverse().asDiagonal();
    out.frame_inv = out.gauge.asDiagonal() * bc.Uinv;
    return out;
}

struct NewtonOptions {
    int max_iterations = 100;
    double tolerance = 1e-13;  ///< on the relative trace residual
};

struct FixedR {
    RealMatrix R;
    RealVector weights;
    int iterations = 0;
    double trace_residual = 0.0;  ///< max_k |Tr R^k - p_k| / p_k
    bool converged = false;
    RReport report;

    /// Names of violated relations at tolerance tol (empty when R is acceptable).
    std::vector<std::string> failures(double tol) const {
        std::vector<std::string> out;
        if (!converged) out.push_back("trace conditions did not converge (residual " + sci(trace_residual) + ")");
        if (report.intertwining.plus > tol) out.push_back("R T+ = e^{2t} T+ R");
        if (report.intertwining.minus > tol) out.push_back("R T- = e^{-2t} T- R");
        if (report.intertwining.q_commutator > tol) out.push_back("e^t T+T- - e^-t T-T+ = (R^2-1)/(2 sinh t)");
        if (report.spectrum > 10.0 * tol || report.spectrum_imag > 10.0 * tol) out.push_back("spectrum of R");
        if (report.det_residual() > tol) out.push_back("det R = 1");
        return out;
    }
};

namespace detail {

inline RealVector trace_residual(const RFamily& family, const RealVector& w, const std::vector<double>& power_sums) {
    const RealMatrix R = family.evaluate(w);
    const int n = static_cast<int>(power_sums.size());
    RealVector g(n);
    RealMatrix P = R;
    for (int k = 1; k <= n; ++k) {
        g(k - 1) = (P.trace() - power_sums[static_cast<std::size_t>(k - 1)]) / power_sums[static_cast<std::size_t>(k - 1)];
        P = P * R;
    }
    return g;
}

}  // namespace detail

/**
 * @brief Damped Newton iteration on Tr R(w)^k = p_k, k = 1..d, from seed w0.
 *
 * Rows of the system are scaled by 1/p_k. d Tr(R^k)/dw_a = k Tr(R^{k-1} N_a).
 * The power-sum Jacobian gets badly conditioned as d grows (it is a pole
 * placement problem), so for larger spins the seed has to be close already.
 */
inline FixedR fix_R_by_spectrum(const RFamily& family, const SRPair& sr, const RealVector& seed,
                                const NewtonOptions& opts = {}) {
    const std::vector<double> p = R_power_sums(sr.spin, sr.t);
    const int n = static_cast<int>(p.size());
    FixedR out;
    RealVector w = seed;
    RealVector g = detail::trace_residual(family, w, p);
    double gnorm = g.cwiseAbs().maxCoeff();

    int it = 0;
    for (; it < opts.max_iterations && gnorm > opts.tolerance; ++it) {
        const RealMatrix R = family.evaluate(w);
        RealMatrix J(n, family.size());
        RealMatrix Pk = identity(static_cast<int>(R.rows()));  // R^{k-1}
        for (int k = 1; k <= n; ++k) {
            for (int a = 0; a < family.size(); ++a) {
                J(k - 1, a) = k * (Pk * family.freedoms[static_cast<std::size_t>(a)]).trace() / p[static_cast<std::size_t>(k - 1)];
            }
            Pk = Pk * R;
        }
        const RealVector step = J.colPivHouseholderQr().solve(-g);
        double lambda = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 40; ++halving, lambda *= 0.5) {
            RealVector trial = w + lambda * step;
            RealVector gt = detail::trace_residual(family, trial, p);
            double tn = gt.cwiseAbs().maxCoeff();
            if (std::isfinite(tn) && tn < gnorm) {
                w = trial;
                g = gt;
                gnorm = tn;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }

    out.weights = w;
    out.R = family.evaluate(w);
    out.iterations = it;
    out.trace_residual = gnorm;
    out.converged = gnorm <= 1e-11;
    out.report = verify_R(out.R, sr);
    return out;
}

/// Seeds the Newton iteration with the projection of the standard-basis R onto the family.
inline FixedR fix_R_by_spectrum(const RFamily& family, const SRPair& sr, const NewtonOptions& opts = {}) {
    const OracleFrame oracle = oracle_in_gauge(sr);
    return fix_R_by_spectrum(family, sr, family.project(oracle.R), opts);
}

/// Everything produced while recovering R for one (spin, t, alpha).
///
/// The pipeline runs in the standard gauge (the alphas read off the
/// orthonormal s-eigenbasis). In other gauges R is badly scaled for larger
/// spins, with entries spanning up to ~1e15, so R K = rhs cannot even be
/// checked there in double precision. The requested gauge is reached at the
/// end by a diagonal similarity, which preserves each entry's relative accuracy.
struct RReconstruction {
    SRPair sr;                ///< working pair, standard gauge
    double casimir;
    RealMatrix K;
    RealMatrix rhs;
    RFamily family;
    FixedR fixed;             ///< R in the working gauge
    OracleFrame oracle;
    double oracle_agreement;  ///< rel_residual(R, standard-basis R)
    AlphaParams requested;
    RealVector to_requested;  ///< g with R_requested = g R g^{-1}

    RealMatrix R_requested() const { return apply_gauge(fixed.R, to_requested); }
    SRPair sr_requested() const { return SRPair{sr.s, apply_gauge(sr.r, to_requested), sr.t, sr.spin}; }
};

/**
 * @brief Full triangular pipeline: (s, r) -> physical C -> K -> family -> R.
 *
 * Requires every alpha nonzero so the requested gauge is reachable.
 */
inline RReconstruction reconstruct_R(const Spin& spin, double t, const AlphaParams& alphas,
                                     const NewtonOptions& opts = {}) {
    alphas.validate(spin);
    if (!alphas.all_nonzero()) throw InvalidInput("reconstructing R requires every alpha to be nonzero");
    check_guard_rail(spin, t);
    if (!R_pipeline_admissible(spin, t)) {
        throw InvalidInput("R pipeline needs 2|t|*2l <= " + sci(kRConditionLoad) + ", got " +
                           sci(2.0 * std::abs(t) * spin.two_l()));
    }
    const OracleFrame probe = oracle_in_gauge(build_sr(spin, t, alphas));

    RReconstruction rec{build_sr(spin, t, probe.standard_alphas), physical_casimir(spin, t), {}, {}, {}, {}, {}, 0.0,
                        alphas, gauge_between(probe.standard_alphas, alphas)};
    rec.K = build_K(rec.sr, rec.casimir);
    rec.rhs = R_equation_rhs(rec.sr);
    RSolveResult solved = solve_R_family(rec.K, rec.rhs);
    if (auto* none = std::get_if<NoInvertibleSolution>(&solved)) {
        throw VerificationError("physical Casimir admits no invertible R: " + none->reason);
    }
    rec.family = std::get<RFamily>(std::move(solved));
    rec.oracle = oracle_in_gauge(rec.sr);
    rec.fixed = fix_R_by_spectrum(rec.family, rec.sr, rec.family.project(rec.oracle.R), opts);
    rec.oracle_agreement = rel_residual(rec.fixed.R, rec.oracle.R);
    return rec;
}

/// R(t) R(-t) = 1 measured in a common frame.
struct InversePair {
    double transported = 0.0;      ///< both R mapped to the J_z basis before multiplying
    double literal = 0.0;          ///< R(t) R(-t) in the requested gauges, no transport
    double transport_offdiag = 0.0;///< off-diagonal leakage of frame(t)^{-1} frame(-t)
};

/**
 * @brief Runs the pipeline at t (alphas) and -t (-alphas) and checks R(t) R(-t) = 1.
 *
 * s(t) and s(-t) have different eigenbases, so the two matrices are first
 * carried to the J_z basis. For d <= 2 that transport is trivial and the
 * literal product already equals 1.
 */
inline InversePair inverse_pair(const Spin& spin, double t, const AlphaParams& alphas, const NewtonOptions& opts = {}) {
    AlphaParams flipped = alphas;
    for (double& a : flipped.values) a = -a;
    const RReconstruction plus = reconstruct_R(spin, t, alphas, opts);
    const RReconstruction minus = reconstruct_R(spin, -t, flipped, opts);
    const int d = spin.dim();

    InversePair out;
    const RealMatrix a = plus.oracle.frame * plus.fixed.R * plus.oracle.frame_inv;
    const RealMatrix b = minus.oracle.frame * minus.fixed.R * minus.oracle.frame_inv;
    out.transported = rel_residual(a * b, identity(d));
    out.literal = rel_residual(plus.R_requested() * minus.R_requested(), identity(d));
    out.transport_offdiag = offdiagonal_leakage(plus.oracle.frame_inv * minus.oracle.frame);
    return out;
}

}  // namespace qsu2
