#pragma once

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "polynomial.hpp"

namespace isoperiod {

/// Search interval and node count for the 1D quadrature oracles.
struct OracleOptions {
    double lo = -10.0;
    double hi = 10.0;
    int nodes = 2000;
};

struct TurningPoints {
    double left;
    double right;
    /// Minimum of V between them.
    double x_min;
};

/// Turning points V(q) = E of the well around the global minimum of V on
/// [lo, hi]: march outward from the minimum, bisect the first bracket.
inline TurningPoints turning_points(const Polynomial& V, double E, const OracleOptions& opt = {}) {
    if (!(opt.lo < opt.hi)) throw ConfigError("oracle: empty search interval");
    auto mn = minimize_on(V, opt.lo, opt.hi);
    if (!(E > mn.value))
        throw SurfaceUnreachable("oracle: E = " + std::to_string(E) + " not above min V = " +
                                 std::to_string(mn.value));
    auto find = [&](double dir, double bound) {
        double inner = mn.x;
        double s = 1e-3 * (1.0 + std::abs(mn.x));
        for (;;) {
            double outer = mn.x + dir * s;
            bool last = dir > 0 ? outer >= bound : outer <= bound;
            if (last) outer = bound;
            if (V(outer) >= E) {
                double a = inner, b = outer;
                for (int it = 0; it < 200 && a != b; ++it) {
                    double m = 0.5 * (a + b);
                    if (m == a || m == b) break;
                    (V(m) >= E ? b : a) = m;
                }
                return 0.5 * (a + b);
            }
            if (last) throw NotConfining("oracle: no turning point for E = " + std::to_string(E) +
                                         " inside [" + std::to_string(opt.lo) + ", " +
                                         std::to_string(opt.hi) + "]");
            inner = outer;
            s *= 1.5;
        }
    };
    return {find(-1.0, opt.lo), find(1.0, opt.hi), mn.x};
}

namespace detail {

/// Midpoint rule in theta for q = mid + w sin(theta) over (-pi/2, pi/2).
/// `f(E - V(q), cos(theta))` is the integrand with dq = w cos(theta) dtheta
/// already folded in by the caller.
template <class F>
double turning_quadrature(const Polynomial& V, double E, const TurningPoints& tp, int nodes, F f) {
    if (nodes < 2) throw ConfigError("oracle: need at least 2 nodes");
    const double mid = 0.5 * (tp.left + tp.right);
    const double w = 0.5 * (tp.right - tp.left);
    const double dth = std::numbers::pi / nodes;
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        double th = -0.5 * std::numbers::pi + (i + 0.5) * dth;
        double q = mid + w * std::sin(th);
        double gap = std::max(E - V(q), 0.0);
        acc += f(gap, w * std::cos(th));
    }
    return acc * dth;
}

}  // namespace detail

/// Period of the 1D flow for H = c p^2 + V(q) at energy E:
/// T = (1/sqrt(c)) * integral dq / sqrt(E - V) between the turning points.
inline double period_oracle_1d(const Polynomial& V, double c, double E, const OracleOptions& opt = {}) {
    if (!(c > 0)) throw ConfigError("oracle: kinetic coefficient must be positive");
    auto tp = turning_points(V, E, opt);
    double I = detail::turning_quadrature(V, E, tp, opt.nodes, [](double gap, double jac) {
        return gap > 0.0 ? jac / std::sqrt(gap) : 0.0;
    });
    return I / std::sqrt(c);
}

/// Action S(E) = closed-loop integral of p dq = 2 * integral sqrt((E - V)/c) dq.
inline double action_1d(const Polynomial& V, double c, double E, const OracleOptions& opt = {}) {
    if (!(c > 0)) throw ConfigError("oracle: kinetic coefficient must be positive");
    auto tp = turning_points(V, E, opt);
    double I = detail::turning_quadrature(V, E, tp, opt.nodes, [](double gap, double jac) {
        return jac * std::sqrt(gap);
    });
    return 2.0 * I / std::sqrt(c);
}

}  // namespace isoperiod
