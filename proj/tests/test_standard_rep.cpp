#include "support.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace qsu2;
using qsu2::testing::Gen;

namespace {

/// [n]_q for integer n >= 0 as a sum of powers of q = e^t (no sinh ratio involved).
double qint(int n, double t) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += std::exp(t * (n - 1 - 2 * k));
    return s;
}

std::vector<std::pair<int, double>> random_sweep(std::uint64_t salt, int count) {
    Gen g(salt);
    std::vector<std::pair<int, double>> out;
    while (static_cast<int>(out.size()) < count) {
        const int tl = g.integer(0, 24);
        const double t = g.uniform(0.05, 1.0);
        if (t * (tl + 1) <= kGuardRail) out.emplace_back(tl, t);
    }
    return out;
}

}  // namespace

TEST(BuildStandard, SpinHalfExample) {
    const StandardRep rep = build_standard(Spin(1), 0.3);
    RealMatrix H(2, 2), Jp(2, 2);
    H << 1, 0, 0, -1;
    Jp << 0, 1, 0, 0;
    EXPECT_EQ(rep.H, H);
    EXPECT_NEAR(max_abs(rep.Jp - Jp), 0.0, 1e-15);
    for (double t : {0.05, 0.3, 1.0, -0.8})
        EXPECT_LE(rel_residual(commutator(build_standard(Spin(1), t).Jp, build_standard(Spin(1), t).Jm),
                               q_commutator_target(Spin(1), t)),
                  1e-14);
}

TEST(BuildStandard, SpinOneSuperdiagonal) {
    for (double t : {0.1, 0.5, 1.2}) {
        const StandardRep rep = build_standard(Spin(2), t);
        EXPECT_NEAR(rep.Jp(0, 1), std::sqrt(2.0 * std::cosh(t)), 1e-14);
        EXPECT_NEAR(rep.Jp(1, 2), std::sqrt(2.0 * std::cosh(t)), 1e-14);
    }
}

TEST(BuildStandard, MatrixElementsMatchPowerSumOracle) {
    for (int tl = 0; tl <= 24; ++tl) {
        for (double t : {0.05, 0.4, 1.0}) {
            if (t * (tl + 1) > kGuardRail) continue;
            const StandardRep rep = build_standard(Spin(tl), t);
            for (int j = 1; j < tl + 1; ++j) {
                // row j+1 has m = l - j, so l - m = j and l + m + 1 = 2l + 1 - j.
                const double expect = std::sqrt(qint(j, t) * qint(tl + 1 - j, t));
                EXPECT_LE(rel_residual(rep.Jp(j - 1, j), expect), 1e-14) << "two_l=" << tl << " j=" << j;
            }
        }
    }
}

TEST(BuildStandard, WeightLadder) {
    for (int tl = 0; tl <= 24; ++tl) {
        const StandardRep rep = build_standard(Spin(tl), 0.2);
        // mu_i x - mu_j x rounds twice; allow a few ulps of the largest product
        const double ulps = 4.0 * std::numeric_limits<double>::epsilon() * (tl + 2) * (max_abs(rep.Jp) + 1.0);
        EXPECT_LE(max_abs(commutator(rep.H, rep.Jp) - 2.0 * rep.Jp), ulps);
        EXPECT_LE(max_abs(commutator(rep.H, rep.Jm) + 2.0 * rep.Jm), ulps);
    }
}

TEST(BuildStandard, RejectsOutsideGuardRail) {
    EXPECT_THROW(build_standard(Spin(25), 1.1), InvalidInput);
    EXPECT_THROW(build_standard(Spin(2), 0.0), InvalidInput);
}

TEST(StandardProperties, RandomSweepRelations) {
    for (auto [tl, t] : random_sweep(11, 60)) {
        const Spin spin(tl);
        const StandardRep rep = build_standard(spin, t);
        const DerivedGenerators g = derive_generators(rep);
        SCOPED_TRACE("two_l=" + std::to_string(tl) + " t=" + std::to_string(t));
        EXPECT_LE(rel_residual(commutator(rep.Jp, rep.Jm), q_commutator_target(spin, t)), 1e-12);
        EXPECT_LE(intertwining_residuals(g.Tp, g.Tm, g.R, t).worst(), 1e-11);
        EXPECT_LE(two_generator_residual(g), 1e-11);
        EXPECT_LE(defining_residual(g.s, g.r, t), 1e-11);
        const IdentityChain chain = identity_chain(g.s, g.r, t);
        EXPECT_LE(chain.minus_plus, 1e-11);
        EXPECT_LE(chain.plus_minus, 1e-11);
        EXPECT_LE(chain.transport, 1e-10);
    }
}

TEST(DerivedGenerators, SpinHalfExample) {
    const double t = 0.7;
    const StandardRep rep = build_standard(Spin(1), t);
    const DerivedGenerators g = derive_generators(rep);
    EXPECT_LE(max_abs(g.Tp - rep.Jp), 1e-15);
    EXPECT_NEAR(g.R(0, 0), std::exp(t), 1e-15);
    EXPECT_NEAR(g.R(1, 1), std::exp(-t), 1e-15);
    EXPECT_LE(max_abs(g.s - std::sinh(t) * (rep.Jp + rep.Jm)), 1e-15);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(g.s);
    EXPECT_NEAR(es.eigenvalues()(0), -std::sinh(t), 1e-15);
    EXPECT_NEAR(es.eigenvalues()(1), std::sinh(t), 1e-15);
}

TEST(DerivedGenerators, QDecomposition) {
    for (int tl : {0, 1, 3, 8}) {
        const double t = 0.45;
        const DerivedGenerators g = derive_generators(build_standard(Spin(tl), t));
        EXPECT_LE(rel_residual(g.Qp + g.Qm, g.Tp + g.Tm), 1e-15);
        EXPECT_LE(rel_residual(g.s, (g.Qp + g.Qm) * std::sinh(t)), 1e-15);
        EXPECT_LE(rel_residual(g.r, (g.Qp - g.Qm) * std::sinh(t)), 1e-15);
        for (int j = 0; j < tl + 1; ++j) EXPECT_GT(g.R(j, j), 0.0);
        EXPECT_EQ(offdiagonal_leakage(g.R), 0.0);
    }
}

TEST(Casimir, SpinHalfAndSpinOneClosedForms) {
    for (double t : {0.1, 0.5, 1.3}) {
        const double sh2 = std::sinh(t) * std::sinh(t);
        EXPECT_LE(rel_residual(casimir_value(build_standard(Spin(1), t)) * sh2,
                               2.0 * std::sinh(1.5 * t) * std::sinh(0.5 * t)),
                  1e-14);
        EXPECT_LE(rel_residual(casimir_value(build_standard(Spin(2), t)) * sh2, std::cosh(3 * t) - std::cosh(t)),
                  1e-14);
    }
}

TEST(Casimir, ClassicalLimit) {
    for (int tl = 0; tl <= 12; ++tl) {
        const double l = 0.5 * tl;
        EXPECT_LE(rel_residual(casimir_value(build_standard(Spin(tl), 1e-6)), 2.0 * l * (l + 1.0)), 1e-9);
        EXPECT_LE(rel_residual(physical_casimir(Spin(tl), 1e-5), 2.0 * l * (l + 1.0)), 1e-8);
    }
}

TEST(Casimir, TraceMatchesClosedFormOnSweep) {
    for (auto [tl, t] : qsu2::testing::identity_sweep()) {
        EXPECT_LE(rel_residual(casimir_value(build_standard(Spin(tl), t)), physical_casimir(Spin(tl), t)), 1e-11)
            << "two_l=" << tl << " t=" << t;
    }
}

TEST(Spectrum, SelfAdjointSolverAgreesWithPrediction) {
    for (auto [tl, t] : qsu2::testing::identity_sweep()) {
        const Spin spin(tl);
        const DerivedGenerators g = derive_generators(build_standard(spin, t));
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(g.s, Eigen::EigenvaluesOnly);
        std::vector<double> computed(es.eigenvalues().begin(), es.eigenvalues().end());
        EXPECT_LE(spectrum_mismatch(computed, s_spectrum(spin, t)), 1e-9) << "two_l=" << tl << " t=" << t;
        // same as the triangular diagonal
        const RealMatrix sd = build_s_diag(spin, t);
        std::vector<double> diag(sd.diagonal().begin(), sd.diagonal().end());
        EXPECT_LE(spectrum_mismatch(computed, diag), 1e-9);
    }
}

TEST(Spectrum, Examples) {
    const double t = 0.4;
    const auto s1 = s_spectrum(Spin(1), t);
    EXPECT_DOUBLE_EQ(s1[0], std::sinh(t));
    EXPECT_DOUBLE_EQ(s1[1], -std::sinh(t));
    const auto s2 = s_spectrum(Spin(2), t);
    EXPECT_DOUBLE_EQ(s2[0], std::sinh(2 * t));
    EXPECT_DOUBLE_EQ(s2[1], 0.0);
    EXPECT_DOUBLE_EQ(s2[2], -std::sinh(2 * t));
}

TEST(SEigenbasis, DiagonalizesSAndTriangularizesR) {
    for (auto [tl, t] : qsu2::testing::identity_sweep()) {
        const Spin spin(tl);
        const DerivedGenerators g = derive_generators(build_standard(spin, t));
        const BasisChange bc = s_eigenbasis(g, spin);
        SCOPED_TRACE("two_l=" + std::to_string(tl) + " t=" + std::to_string(t));
        EXPECT_LE(rel_residual(bc.U * bc.Uinv, identity(spin.dim())), 1e-10);
        const RealMatrix sd = bc.to_eigenbasis(g.s);
        EXPECT_LE(rel_residual(sd, build_s_diag(spin, t)), 1e-9);
        const RealMatrix rl = bc.to_eigenbasis(g.r);
        EXPECT_LE(upper_leakage(rl), 1e-9);
        for (int j = 1; j <= spin.dim(); ++j)
            EXPECT_LE(rel_residual(rl(j - 1, j - 1), std::cosh(t * spin.weight(j))), 1e-9);
    }
}

TEST(SEigenbasis, ColumnsAreEigenvectors) {
    Gen gen(12);
    for (int k = 0; k < 20; ++k) {
        const Spin spin(gen.integer(0, 12));
        const double t = gen.uniform(0.05, 1.0);
        const DerivedGenerators g = derive_generators(build_standard(spin, t));
        const BasisChange bc = s_eigenbasis(g, spin);
        for (int j = 0; j < spin.dim(); ++j) {
            const RealVector v = bc.U.col(j);
            EXPECT_NEAR(v.norm(), 1.0, 1e-14);
            EXPECT_LE((g.s * v - bc.eigenvalues[static_cast<std::size_t>(j)] * v).cwiseAbs().maxCoeff(),
                      1e-12 * (1.0 + max_abs(g.s)));
        }
    }
}

TEST(SEigenbasis, DimensionMismatchRejected) {
    const DerivedGenerators g = derive_generators(build_standard(Spin(3), 0.2));
    EXPECT_THROW(s_eigenbasis(g, Spin(4)), InvalidInput);
}

TEST(SimpleNullVector, RejectsNonsingularAndDoubleNull) {
    EXPECT_THROW(simple_null_vector(identity(3)), VerificationError);
    RealMatrix m = RealMatrix::Zero(3, 3);
    m(0, 0) = 1.0;
    EXPECT_THROW(simple_null_vector(m), VerificationError);
}
