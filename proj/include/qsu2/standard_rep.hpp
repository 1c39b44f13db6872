/**
 * @file standard_rep.hpp
 * @brief Spin-l representation of SU_q(2) in the J_z-diagonal basis and the
 *        change of basis to the eigenbasis of s = sinh t (T^+ + T^-).
 *
 * Matrix elements use the symmetric convention
 *   (J^+)_{j,j+1} = (J^-)_{j+1,j} = sqrt([l - m_{j+1}] [l + m_{j+1} + 1]),
 * which is one admissible choice; every constructor re-verifies the
 * commutation relations it is supposed to satisfy before returning.
 */
#pragma once

#include "qsu2/qcore.hpp"
#include "qsu2/sr_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace qsu2 {

/// Internal self-check threshold; exceeding it means an implementation bug.
inline constexpr double kSelfCheckTolerance = 1e-10;

struct StandardRep {
    Spin spin;
    double t;
    RealMatrix H;
    RealMatrix Jp;
    RealMatrix Jm;
};

struct DerivedGenerators {
    RealMatrix Tp, Tm, R, Qp, Qm, s, r;
    double t;
};

/// Columns of U are s-eigenvectors; column j belongs to eigenvalue sinh(t mu_j).
struct BasisChange {
    RealMatrix U;
    RealMatrix Uinv;
    std::vector<double> eigenvalues;

    RealMatrix to_eigenbasis(const RealMatrix& m) const { return Uinv * m * U; }
    RealMatrix from_eigenbasis(const RealMatrix& m) const { return U * m * Uinv; }
};

namespace detail {

/// Diagonal matrix f(mu_j) for a function of the weight.
template <class F>
RealMatrix weight_diagonal(const Spin& spin, F&& f) {
    RealMatrix d = RealMatrix::Zero(spin.dim(), spin.dim());
    for (int j = 1; j <= spin.dim(); ++j) d(j - 1, j - 1) = f(spin.weight(j));
    return d;
}

inline void self_check(double residual, const std::string& what) {
    if (!(residual <= kSelfCheckTolerance)) {
        throw VerificationError(what + ": residual " + sci(residual) + " exceeds " +
                                sci(kSelfCheckTolerance));
    }
}

}  // namespace detail

/// sinh(tH)/sinh t, i.e. diag([mu_j]).
inline RealMatrix q_commutator_target(const Spin& spin, double t) {
    return detail::weight_diagonal(spin, [t](double mu) { return qnumber(mu, t); });
}

inline StandardRep build_standard(const Spin& spin, double t) {
    check_guard_rail(spin, t);
    const int d = spin.dim();
    const double l = spin.l();
    StandardRep rep{spin, t, RealMatrix::Zero(d, d), RealMatrix::Zero(d, d), RealMatrix::Zero(d, d)};
    for (int j = 1; j <= d; ++j) rep.H(j - 1, j - 1) = spin.weight(j);
    for (int j = 1; j < d; ++j) {
        double m = spin.magnetic(j + 1);
        double element = std::sqrt(qnumber(l - m, t) * qnumber(l + m + 1.0, t));
        rep.Jp(j - 1, j) = element;
        rep.Jm(j, j - 1) = element;
    }
    detail::self_check(rel_residual(commutator(rep.H, rep.Jp), 2.0 * rep.Jp), "[H, J+] = 2 J+");
    detail::self_check(rel_residual(commutator(rep.H, rep.Jm), -2.0 * rep.Jm), "[H, J-] = -2 J-");
    detail::self_check(rel_residual(commutator(rep.Jp, rep.Jm), q_commutator_target(spin, t)),
                       "[J+, J-] = sinh(tH)/sinh t");
    return rep;
}

/// Residuals of the relations RT^+- = e^{+-2t} T^+- R and the q-commutator.
struct IntertwiningResiduals {
    double plus = 0.0;
    double minus = 0.0;
    double q_commutator = 0.0;

    double worst() const { return std::max({plus, minus, q_commutator}); }
};

inline IntertwiningResiduals intertwining_residuals(const RealMatrix& Tp, const RealMatrix& Tm, const RealMatrix& R,
                                                    double t) {
    const int d = static_cast<int>(R.rows());
    IntertwiningResiduals res;
    res.plus = rel_residual(R * Tp, std::exp(2.0 * t) * (Tp * R));
    res.minus = rel_residual(R * Tm, std::exp(-2.0 * t) * (Tm * R));
    // both sides are differences of much larger terms when t is small
    const RealMatrix left = std::exp(t) * (Tp * Tm);
    const RealMatrix right = std::exp(-t) * (Tm * Tp);
    const RealMatrix RR = R * R;
    const double two_sh = 2.0 * std::abs(std::sinh(t));
    const double scale = std::max({max_abs(left), max_abs(right), (max_abs(RR) + 1.0) / two_sh});
    res.q_commutator = rel_residual(left - right, (RR - identity(d)) / (2.0 * std::sinh(t)), scale);
    return res;
}

/// e^t Q+Q- - e^-t Q-Q+ = -1/(2 sinh t). Both products are far larger than
/// their difference, so the residual is scaled by the products themselves.
inline double two_generator_residual(const DerivedGenerators& g) {
    const int d = static_cast<int>(g.R.rows());
    const RealMatrix left = std::exp(g.t) * (g.Qp * g.Qm);
    const RealMatrix right = std::exp(-g.t) * (g.Qm * g.Qp);
    return rel_residual(left - right, (-1.0 / (2.0 * std::sinh(g.t))) * identity(d),
                        std::max(max_abs(left), max_abs(right)));
}

inline DerivedGenerators derive_generators(const StandardRep& rep) {
    const double t = rep.t;
    const double sh = std::sinh(t);
    const RealMatrix quarter = detail::weight_diagonal(rep.spin, [t](double mu) { return std::exp(mu * t / 4.0); });

    DerivedGenerators g;
    g.t = t;
    g.Tp = quarter * rep.Jp * quarter;
    g.Tm = quarter * rep.Jm * quarter;
    g.R = detail::weight_diagonal(rep.spin, [t](double mu) { return std::exp(mu * t); });
    g.Qp = g.Tp + g.R / (2.0 * sh);
    g.Qm = g.Tm - g.R / (2.0 * sh);
    g.s = sh * (g.Tp + g.Tm);
    g.r = sh * (g.Tp - g.Tm) + g.R;

    detail::self_check(intertwining_residuals(g.Tp, g.Tm, g.R, t).worst(), "R T+- = e^{+-2t} T+- R");
    detail::self_check(two_generator_residual(g), "e^t Q+Q- - e^-t Q-Q+ = -1/(2 sinh t)");
    return g;
}

/// J+J- + J-J+ + (cosh t / sinh^2 t)(cosh(tH) - 1).
inline RealMatrix casimir_matrix(const StandardRep& rep) {
    const double t = rep.t;
    const double sh = std::sinh(t);
    // cosh x - 1 written as 2 sinh^2(x/2) to keep small-t accuracy.
    const RealMatrix bump = detail::weight_diagonal(rep.spin, [t](double mu) {
        double h = std::sinh(0.5 * t * mu);
        return 2.0 * h * h;
    });
    return rep.Jp * rep.Jm + rep.Jm * rep.Jp + (std::cosh(t) / (sh * sh)) * bump;
}

inline double casimir_value(const StandardRep& rep) {
    const RealMatrix c = casimir_matrix(rep);
    const double value = c.trace() / static_cast<double>(c.rows());
    detail::self_check(rel_residual(c, value * identity(static_cast<int>(c.rows()))), "Casimir is scalar");
    return value;
}

/// Closed form C sinh^2 t = cosh(t(2l+1)) - cosh t = 2 sinh(t l) sinh(t(l+1)).
inline double physical_casimir(const Spin& spin, double t) {
    const double l = spin.l();
    const double sh = std::sinh(t);
    return 2.0 * std::sinh(t * l) * std::sinh(t * (l + 1.0)) / (sh * sh);
}

/// Relative pivot size below which a pivot counts as vanishing.
inline constexpr double kSingularPivot = 1e-12;

/**
 * @brief Null vector of a matrix known to have a one-dimensional kernel.
 *
 * Gaussian elimination with full pivoting; the last pivot must vanish
 * (relative to max|A|) and the one before it must not. Anything else means
 * the claimed eigenvalue is wrong or degenerate.
 */
inline RealVector simple_null_vector(RealMatrix a, double singular_pivot = kSingularPivot) {
    const Eigen::Index n = a.rows();
    if (n != a.cols()) throw InvalidInput("simple_null_vector: matrix must be square");
    if (n == 1) {
        if (std::abs(a(0, 0)) > singular_pivot * (1.0 + std::abs(a(0, 0)))) {
            throw VerificationError("1x1 matrix is not singular");
        }
        return RealVector::Ones(1);
    }
    const double scale = std::max(max_abs(a), 1e-300);
    std::vector<Eigen::Index> col(static_cast<std::size_t>(n));
    std::iota(col.begin(), col.end(), Eigen::Index{0});

    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index pr = k, pc = k;
        a.bottomRightCorner(n - k, n - k).cwiseAbs().maxCoeff(&pr, &pc);
        pr += k;
        pc += k;
        a.row(k).swap(a.row(pr));
        a.col(k).swap(a.col(pc));
        std::swap(col[static_cast<std::size_t>(k)], col[static_cast<std::size_t>(pc)]);
        if (k == n - 1 || a(k, k) == 0.0) continue;
        for (Eigen::Index i = k + 1; i < n; ++i) {
            double f = a(i, k) / a(k, k);
            a.row(i).tail(n - k) -= f * a.row(k).tail(n - k);
        }
    }

    const double last = std::abs(a(n - 1, n - 1)) / scale;
    const double penultimate = std::abs(a(n - 2, n - 2)) / scale;
    if (last > singular_pivot) {
        throw VerificationError("claimed eigenvalue is not in the spectrum (last pivot " + sci(last) + ")");
    }
    if (penultimate <= singular_pivot) {
        throw VerificationError("claimed eigenvalue is not simple (two vanishing pivots)");
    }

    RealVector y = RealVector::Zero(n);
    y(n - 1) = 1.0;
    for (Eigen::Index k = n - 2; k >= 0; --k) {
        double acc = a.row(k).tail(n - 1 - k).dot(y.tail(n - 1 - k));
        y(k) = -acc / a(k, k);
    }
    RealVector v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(col[static_cast<std::size_t>(k)]) = y(k);
    return v;
}

/// Scales v to unit length with its first non-negligible component positive.
/// s is symmetric, so unit columns make U orthogonal up to rounding; fixing
/// the first component to 1 instead gives U a condition number near e^{t d}.
inline void normalize_unit(RealVector& v) {
    const double cutoff = 1e-13 * v.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v(k)) > cutoff) {
            v /= (v(k) > 0.0 ? 1.0 : -1.0) * v.norm();
            return;
        }
    }
}

/// Predicted spectrum of s: sinh(t mu_j), j = 1..d.
inline std::vector<double> s_spectrum(const Spin& spin, double t) {
    std::vector<double> out;
    for (int j = 1; j <= spin.dim(); ++j) out.push_back(std::sinh(t * spin.weight(j)));
    return out;
}

/// Predicted spectrum of R: e^{t mu_j} = e^{2tm}.
inline std::vector<double> R_spectrum(const Spin& spin, double t) {
    std::vector<double> out;
    for (int j = 1; j <= spin.dim(); ++j) out.push_back(std::exp(t * spin.weight(j)));
    return out;
}

/**
 * @brief Eigenbasis of s from its known spectrum sinh(t mu_j).
 *
 * No general eigensolver is involved: each eigenvector is the null vector of
 * s - sinh(t mu_j) I. A failure to find a simple null vector falsifies the
 * spectral claim for this representation.
 */
inline BasisChange s_eigenbasis(const DerivedGenerators& gen, const Spin& spin) {
    const int d = spin.dim();
    if (gen.s.rows() != d) throw InvalidInput("s_eigenbasis: spin does not match generator dimension");
    BasisChange bc;
    bc.eigenvalues = s_spectrum(spin, gen.t);
    bc.U = RealMatrix::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        RealVector v = simple_null_vector(gen.s - bc.eigenvalues[static_cast<std::size_t>(j)] * identity(d));
        normalize_unit(v);
        bc.U.col(j) = v;
    }
    bc.Uinv = bc.U.fullPivLu().inverse();
    if (!(rel_residual(bc.U * bc.Uinv, identity(d)) <= kSelfCheckTolerance)) {
        throw VerificationError("s eigenbasis is numerically singular");
    }
    return bc;
}

}  // namespace qsu2
