// Shared fixtures for the test binaries: seeded generators and parameter sweeps.
#pragma once

#include "qsu2/qsu2.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace qsu2::testing {

inline constexpr std::uint64_t kSeed = 20261019;

/// Fixed-seed generator. Every property test draws from its own instance.
class Gen {
  public:
    explicit Gen(std::uint64_t salt = 0) : eng_(kSeed ^ (salt * 0x9E3779B97F4A7C15ULL)) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    double sign() { return integer(0, 1) ? 1.0 : -1.0; }

    /// alpha_i in [-2, 2], kept away from 0 so the R pipeline accepts them.
    AlphaParams alphas(const Spin& spin, double min_abs = 0.0) {
        AlphaParams a;
        for (int k = 0; k < spin.two_l(); ++k) {
            double v = 0.0;
            do v = uniform(-2.0, 2.0);
            while (std::abs(v) < min_abs);
            a.values.push_back(v);
        }
        return a;
    }

    RealMatrix matrix(int rows, int cols, double lo = -1.0, double hi = 1.0) {
        RealMatrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
        return m;
    }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

/// (two_l, t) for two_l in [lo, hi] and the given t values, dropping pairs beyond the guard rail.
inline std::vector<std::pair<int, double>> sweep(int lo, int hi, std::vector<double> ts) {
    std::vector<std::pair<int, double>> out;
    for (int tl = lo; tl <= hi; ++tl)
        for (double t : ts)
            if (std::abs(t) * (tl + 1) <= kGuardRail) out.emplace_back(tl, t);
    return out;
}

/// The main identity sweep: two_l 0..24, t in {0.05, 0.2, 0.5, 1.0}.
inline std::vector<std::pair<int, double>> identity_sweep() { return sweep(0, 24, {0.05, 0.2, 0.5, 1.0}); }

}  // namespace qsu2::testing
