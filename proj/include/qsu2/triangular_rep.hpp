/**
 * @file triangular_rep.hpp
 * @brief Lower-triangular realization of [s, r] = tanh t (s^2 - r^2 + 1).
 *
 * s = diag(sinh(t mu_j)), r is lower triangular with r_jj = cosh(t mu_j), free
 * subdiagonal entries alpha_i and deeper entries fixed by
 *
 *   alpha_{i,i-s} = c_{i,i-s}(t) * alpha_{i,i-1} alpha_{i-1,i-2} ... alpha_{i-s+1,i-s},
 *   c_{i,i-s}     = 2^{-(s-1)} prod_{k=2}^{s} 1 / cosh(t (2l + 2k - 2i)).
 *
 * build_r_recursive solves the matrix-element equations diagonal by diagonal
 * and is kept as an independent check on the closed form.
 */
#pragma once

#include "qsu2/qcore.hpp"
#include "qsu2/sr_algebra.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace qsu2 {

/// Subdiagonal parameters: values[k] sits at 1-based entry (k+2, k+1).
struct AlphaParams {
    std::vector<double> values;

    static AlphaParams ones(const Spin& spin) {
        return AlphaParams{std::vector<double>(static_cast<std::size_t>(spin.two_l()), 1.0)};
    }

    /// Subdiagonal entry in 1-based row i (i >= 2).
    double at_row(int i) const { return values[static_cast<std::size_t>(i - 2)]; }

    bool all_nonzero() const {
        for (double a : values)
            if (a == 0.0) return false;
        return true;
    }

    void validate(const Spin& spin) const {
        if (static_cast<int>(values.size()) != spin.two_l()) {
            throw InvalidInput("expected " + std::to_string(spin.two_l()) + " alpha parameters, got " +
                               std::to_string(values.size()));
        }
        for (double a : values)
            if (!std::isfinite(a)) throw InvalidInput("alpha parameters must be finite");
    }
};

struct SRPair {
    RealMatrix s;
    RealMatrix r;
    double t;
    Spin spin;
};

enum class DiagonalBranch { positive, negative };

inline RealMatrix build_s_diag(const Spin& spin, double t) {
    check_guard_rail(spin, t);
    RealMatrix s = RealMatrix::Zero(spin.dim(), spin.dim());
    for (int j = 1; j <= spin.dim(); ++j) s(j - 1, j - 1) = std::sinh(t * spin.weight(j));
    return s;
}

/// c_{ij}(t) for 1-based i > j; c_{i,i-1} = 1.
inline double closed_form_coefficient(const Spin& spin, double t, int i, int j) {
    const int depth = i - j;
    double c = std::ldexp(1.0, -(depth - 1));
    for (int k = 2; k <= depth; ++k) c /= std::cosh(t * (spin.two_l() + 2 * k - 2 * i));
    return c;
}

/// alpha_i alpha_{i-1} ... alpha_{j+1}: the subdiagonal chain from row i down to column j.
inline double alpha_chain(const AlphaParams& alphas, int i, int j) {
    double p = 1.0;
    for (int row = i; row > j; --row) p *= alphas.at_row(row);
    return p;
}

inline double alpha_chain(const RealMatrix& lower, int i, int j) {
    double p = 1.0;
    for (int row = i; row > j; --row) p *= lower(row - 1, row - 2);
    return p;
}

inline RealMatrix build_r_closed_form(const Spin& spin, double t, const AlphaParams& alphas) {
    check_guard_rail(spin, t);
    alphas.validate(spin);
    const int d = spin.dim();
    RealMatrix r = RealMatrix::Zero(d, d);
    for (int i = 1; i <= d; ++i) {
        r(i - 1, i - 1) = std::cosh(t * spin.weight(i));
        for (int j = 1; j < i; ++j) r(i - 1, j - 1) = closed_form_coefficient(spin, t, i, j) * alpha_chain(alphas, i, j);
    }
    return r;
}

/**
 * @brief Fills the lower triangle by solving the matrix-element equations.
 *
 * Positive branch:
 *   2 cosh[t(2l+2-i-j)] sinh[t(i-j-1)] alpha_ij = sinh t sum_{k=j+1}^{i-1} alpha_ik alpha_kj.
 * Negative branch (r_jj = -cosh): the commutator relation itself,
 *   [(s_i - s_j) cosh t + sinh t (r_ii + r_jj)] alpha_ij = -sinh t sum_k alpha_ik alpha_kj,
 * whose coefficient never vanishes, so every off-diagonal entry is forced to 0.
 */
inline RealMatrix build_r_recursive(const Spin& spin, double t, const AlphaParams& alphas,
                                    DiagonalBranch branch = DiagonalBranch::positive) {
    check_guard_rail(spin, t);
    alphas.validate(spin);
    const int d = spin.dim();
    const int two_l = spin.two_l();
    const double sh = std::sinh(t);
    const double sign = branch == DiagonalBranch::positive ? 1.0 : -1.0;

    RealMatrix r = RealMatrix::Zero(d, d);
    for (int j = 1; j <= d; ++j) r(j - 1, j - 1) = sign * std::cosh(t * spin.weight(j));

    for (int depth = 1; depth < d; ++depth) {
        for (int i = depth + 1; i <= d; ++i) {
            const int j = i - depth;
            double sum = 0.0;
            for (int k = j + 1; k <= i - 1; ++k) sum += r(i - 1, k - 1) * r(k - 1, j - 1);

            double coeff = 0.0;
            double rhs = 0.0;
            if (branch == DiagonalBranch::positive) {
                coeff = 2.0 * std::cosh(t * (two_l + 2 - i - j)) * std::sinh(t * (i - j - 1));
                rhs = sh * sum;
            } else {
                coeff = (std::sinh(t * spin.weight(i)) - std::sinh(t * spin.weight(j))) * std::cosh(t) +
                        sh * (r(i - 1, i - 1) + r(j - 1, j - 1));
                rhs = -sh * sum;
            }

            if (coeff == 0.0) {
                if (rhs != 0.0) {
                    throw VerificationError("vanishing coefficient with nonzero right side at (" + std::to_string(i) +
                                            "," + std::to_string(j) + ")");
                }
                r(i - 1, j - 1) = alphas.at_row(i);
            } else {
                r(i - 1, j - 1) = rhs / coeff;
            }
        }
    }
    return r;
}

inline SRPair build_sr(const Spin& spin, double t, const AlphaParams& alphas) {
    return SRPair{build_s_diag(spin, t), build_r_closed_form(spin, t, alphas), t, spin};
}

/// Outcome of checking that a lower-triangular matrix belongs to the closed-form family.
struct AlphaExtraction {
    AlphaParams alphas;
    double upper_leakage = 0.0;       ///< largest entry above the diagonal, relative
    double diagonal_residual = 0.0;   ///< worst rel_residual of r_jj against cosh(t mu_j)
    double worst_ratio_residual = 0.0;///< worst rel_residual(entry / chain, c_ij)
    int ratios_checked = 0;
};

/**
 * @brief Reads alpha from the subdiagonal and checks every deeper entry.
 *
 * entry_ij / (alpha chain) is invariant under diagonal similarity, so the
 * check applies to any gauge of the family.
 */
inline AlphaExtraction extract_and_check_alphas(const RealMatrix& lower, const Spin& spin, double t,
                                                double tol = 1e-9) {
    const int d = spin.dim();
    if (lower.rows() != d || lower.cols() != d) throw InvalidInput("extract_and_check_alphas: dimension mismatch");

    AlphaExtraction out;
    out.upper_leakage = upper_leakage(lower);
    for (int j = 1; j <= d; ++j) {
        out.diagonal_residual =
            std::max(out.diagonal_residual, rel_residual(lower(j - 1, j - 1), std::cosh(t * spin.weight(j))));
    }
    if (out.upper_leakage > tol) {
        throw VerificationError("matrix is not lower triangular (leakage " + sci(out.upper_leakage) + ")");
    }
    if (out.diagonal_residual > tol) {
        throw VerificationError("diagonal differs from cosh(t mu_j) (residual " +
                                sci(out.diagonal_residual) + ")");
    }

    for (int i = 2; i <= d; ++i) out.alphas.values.push_back(lower(i - 1, i - 2));

    for (int i = 3; i <= d; ++i) {
        for (int j = 1; j <= i - 2; ++j) {
            const double chain = alpha_chain(lower, i, j);
            if (chain == 0.0) continue;
            const double ratio = lower(i - 1, j - 1) / chain;
            const double res = rel_residual(ratio, closed_form_coefficient(spin, t, i, j));
            out.worst_ratio_residual = std::max(out.worst_ratio_residual, res);
            ++out.ratios_checked;
        }
    }
    if (out.worst_ratio_residual > tol) {
        throw VerificationError("entry/chain ratio differs from c_ij (residual " +
                                sci(out.worst_ratio_residual) + ")");
    }
    return out;
}

/// Diagonal gauge g with g_1 = 1 and g_i / g_{i-1} = to_i / from_i, so that
/// g * r(from) * g^{-1} = r(to) for any member of the family.
inline RealVector gauge_between(const AlphaParams& from, const AlphaParams& to) {
    if (from.values.size() != to.values.size()) throw InvalidInput("gauge_between: length mismatch");
    RealVector g = RealVector::Ones(static_cast<Eigen::Index>(from.values.size() + 1));
    for (std::size_t k = 0; k < from.values.size(); ++k) {
        if (from.values[k] == 0.0 || to.values[k] == 0.0) {
            throw InvalidInput("gauge_between: zero alpha cannot be gauged");
        }
        g(static_cast<Eigen::Index>(k + 1)) = g(static_cast<Eigen::Index>(k)) * to.values[k] / from.values[k];
    }
    return g;
}

/// g * m * g^{-1} for a diagonal gauge g.
inline RealMatrix apply_gauge(const RealMatrix& m, const RealVector& g) {
    return g.asDiagonal() * m * g.cwiseInverse().asDiagonal();
}

}  // namespace qsu2
