#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"

namespace isoperiod {

/// Symmetric tridiagonal matrix: diagonal d (size n), off-diagonal e (size n-1).
struct SymTridiagonal {
    std::vector<double> d;
    std::vector<double> e;

    std::size_t size() const { return d.size(); }

    void validate() const {
        if (d.empty()) throw ConfigError("tridiagonal: empty matrix");
        if (e.size() + 1 != d.size()) throw ConfigError("tridiagonal: off-diagonal must have n-1 entries");
    }

    /// Gershgorin interval containing the spectrum.
    std::pair<double, double> gershgorin() const {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < d.size(); ++i) {
            double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < d.size() ? std::abs(e[i]) : 0.0);
            lo = std::min(lo, d[i] - r);
            hi = std::max(hi, d[i] + r);
        }
        return {lo, hi};
    }

    double norm() const {
        auto [lo, hi] = gershgorin();
        return std::max(std::abs(lo), std::abs(hi));
    }
};

/// Number of eigenvalues strictly below x (Sylvester inertia of T - x I).
inline std::size_t sturm_count(const SymTridiagonal& T, double x) {
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    std::size_t neg = 0;
    double q = T.d[0] - x;
    for (std::size_t i = 0;; ++i) {
        if (q == 0.0) q = -tiny;
        if (q < 0.0) ++neg;
        if (i + 1 == T.d.size()) break;
        q = T.d[i + 1] - x - T.e[i] * T.e[i] / q;
    }
    return neg;
}

/// Eigenvalues in [lo, hi), sorted, each to absolute accuracy
/// 1e-12 * ||T|| by Sturm bisection. The result size is the inertia
/// difference at the endpoints.
inline std::vector<double> eig_tridiagonal(const SymTridiagonal& T, double lo, double hi,
                                           int workers = 1) {
    T.validate();
    if (!(lo < hi)) return {};
    auto [glo, ghi] = T.gershgorin();
    const double tol = 1e-12 * std::max(T.norm(), std::numeric_limits<double>::min());
    const std::size_t k0 = sturm_count(T, lo);
    const std::size_t k1 = sturm_count(T, hi);
    if (k1 <= k0) return {};
    std::vector<double> out(k1 - k0);
    // k-th eigenvalue (0-based): the smallest x with count(x) > k
    parallel_for(out.size(), workers, [&](std::size_t j) {
        const std::size_t k = k0 + j;
        double a = std::max(lo, glo - tol), b = std::min(hi, ghi + tol);
        while (b - a > tol) {
            double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            if (sturm_count(T, m) > k) b = m;
            else a = m;
        }
        out[j] = 0.5 * (a + b);
    });
    std::sort(out.begin(), out.end());
    return out;
}

/// Whole spectrum.
inline std::vector<double> eig_tridiagonal(const SymTridiagonal& T, int workers = 1) {
    auto [lo, hi] = T.gershgorin();
    const double pad = 1e-9 * std::max(1.0, T.norm());
    return eig_tridiagonal(T, lo - pad, hi + pad, workers);
}

}  // namespace isoperiod
