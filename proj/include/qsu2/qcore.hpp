/**
 * @file qcore.hpp
 * @brief Scalar and matrix primitives shared by every qsu2 module.
 *
 * Holds the deformation parameter, the spin label, q-numbers, commutators and
 * the scale-aware residual used by every verification in the library.
 */
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsu2 {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Invalid input: dimension mismatch, guard-rail violation, bad parameters.
class InvalidInput : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A constructor's self-check failed. Indicates a bug or a violated algebraic claim.
class VerificationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Scientific notation for residuals in messages.
inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

/// Largest admissible t * (2l + 1); beyond this entries reach ~e^26 and
/// relative comparisons in binary64 stop being meaningful.
inline constexpr double kGuardRail = 26.0;

/// Below this |t| the q-number falls back to its classical limit.
inline constexpr double kClassicalThreshold = 1e-12;

/**
 * @brief Deformation parameter t = log q and its hyperbolic constants.
 */
class Deformation {
  public:
    explicit Deformation(double t) : t_(t) {
        if (!std::isfinite(t)) throw InvalidInput("deformation parameter t must be finite");
    }

    double t() const noexcept { return t_; }
    double sinh() const noexcept { return std::sinh(t_); }
    double cosh() const noexcept { return std::cosh(t_); }
    double tanh() const noexcept { return std::tanh(t_); }
    bool is_classical() const noexcept { return std::abs(t_) < kClassicalThreshold; }

  private:
    double t_;
};

/**
 * @brief Spin label l, stored as the integer 2l.
 *
 * Row j (1-based) of every matrix carries the weight mu_j = 2l + 2 - 2j,
 * which is also the eigenvalue of H = 2 J_z on that row in the standard basis.
 */
class Spin {
  public:
    explicit Spin(int two_l) : two_l_(two_l) {
        if (two_l < 0) throw InvalidInput("two_l must be non-negative, got " + std::to_string(two_l));
    }

    int two_l() const noexcept { return two_l_; }
    int dim() const noexcept { return two_l_ + 1; }
    double l() const noexcept { return 0.5 * two_l_; }

    /// mu_j for 1-based j.
    double weight(int j) const noexcept { return static_cast<double>(two_l_ + 2 - 2 * j); }

    /// m_j = mu_j / 2 for 1-based j.
    double magnetic(int j) const noexcept { return 0.5 * weight(j); }

    std::vector<double> weights() const {
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(dim()));
        for (int j = 1; j <= dim(); ++j) w.push_back(weight(j));
        return w;
    }

  private:
    int two_l_;
};

/// Rejects t = 0 (deformed constructions only) and t * (2l+1) beyond the guard rail.
inline void check_guard_rail(const Spin& spin, double t) {
    if (!std::isfinite(t)) throw InvalidInput("t must be finite");
    if (t == 0.0) throw InvalidInput("deformed constructions require t != 0");
    double load = std::abs(t) * spin.dim();
    if (load > kGuardRail) {
        throw InvalidInput("guard rail: |t|*(2l+1) = " + std::to_string(load) + " exceeds " +
                           std::to_string(kGuardRail));
    }
}

/// q-number [n] = sinh(t n) / sinh(t), with the classical limit n for |t| < 1e-12.
inline double qnumber(double n, double t) {
    if (std::abs(t) < kClassicalThreshold) return n;
    return std::sinh(t * n) / std::sinh(t);
}

inline void require_same_shape(const RealMatrix& a, const RealMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw InvalidInput(std::string(what) + ": dimension mismatch (" + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                           std::to_string(b.cols()) + ")");
    }
}

/// AB - BA.
inline RealMatrix commutator(const RealMatrix& a, const RealMatrix& b) {
    require_same_shape(a, b, "commutator");
    if (a.rows() != a.cols()) throw InvalidInput("commutator: matrices must be square");
    return a * b - b * a;
}

inline double max_abs(const RealMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

/**
 * @brief Scale-aware residual max|A-B| / (1 + max|A| + max|B|).
 *
 * Matrices built from sinh/cosh of large arguments are compared relatively,
 * small ones effectively absolutely.
 */
inline double rel_residual(const RealMatrix& a, const RealMatrix& b) {
    require_same_shape(a, b, "rel_residual");
    if (a.size() == 0) return 0.0;
    return max_abs(a - b) / (1.0 + max_abs(a) + max_abs(b));
}

/// rel_residual with an extra magnitude in the denominator: for identities whose
/// two sides are differences of much larger terms, pass the size of those terms.
inline double rel_residual(const RealMatrix& a, const RealMatrix& b, double term_scale) {
    require_same_shape(a, b, "rel_residual");
    if (a.size() == 0) return 0.0;
    return max_abs(a - b) / (1.0 + term_scale + max_abs(a) + max_abs(b));
}

/// Scalar version of rel_residual.
inline double rel_residual(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b)); }

inline RealMatrix identity(int dim) { return RealMatrix::Identity(dim, dim); }

/// Largest |A_ij| strictly above the diagonal, relative to (1 + max|A|).
inline double upper_leakage(const RealMatrix& a) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j)));
    return worst / (1.0 + max_abs(a));
}

/// Largest off-diagonal |A_ij| relative to (1 + max|A|).
inline double offdiagonal_leakage(const RealMatrix& a) {
    RealMatrix off = a;
    off.diagonal().setZero();
    return max_abs(off) / (1.0 + max_abs(a));
}

/// Distance between a computed spectrum and a predicted one: max over predicted
/// values of the nearest computed value, scaled by (1 + max|predicted|).
inline double spectrum_mismatch(const std::vector<double>& computed, const std::vector<double>& predicted) {
    double scale = 1.0;
    for (double p : predicted) scale = std::max(scale, 1.0 + std::abs(p));
    double worst = 0.0;
    for (double p : predicted) {
        double nearest = INFINITY;
        for (double c : computed) nearest = std::min(nearest, std::abs(c - p));
        worst = std::max(worst, nearest);
    }
    if (computed.size() != predicted.size()) return INFINITY;
    return worst / scale;
}

}  // namespace qsu2
