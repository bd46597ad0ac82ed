#pragma once

#include <cmath>
#include <initializer_list>
#include <numbers>

#include <isoperiod/isoperiod.hpp>

namespace testing_support {

using isoperiod::Mat;
using isoperiod::PhasePoint;
using isoperiod::SystemSpec;
using isoperiod::Vec;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Vec vec(std::initializer_list<double> xs) {
    Vec v(Eigen::Index(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

inline PhasePoint pp(std::initializer_list<double> q, std::initializer_list<double> p) {
    return PhasePoint(vec(q), vec(p));
}

// eps = (1, -1), A = [[0, -1], [1, 0]]: equilibrium (1, 1)
inline SystemSpec predator_prey(isoperiod::Convention c = isoperiod::Convention::paper_lv) {
    Mat A(2, 2);
    A << 0, -1, 1, 0;
    return SystemSpec::lotka_volterra(vec({1, -1}), A, c);
}

inline isoperiod::StepperConfig verlet(double h) {
    isoperiod::StepperConfig c;
    c.method = isoperiod::Method::verlet;
    c.h = h;
    return c;
}

inline isoperiod::StepperConfig midpoint(double h) {
    isoperiod::StepperConfig c;
    c.method = isoperiod::Method::implicit_midpoint;
    c.h = h;
    return c;
}

/// Closed-form flow of H = p^2/2m + k q^2/2, componentwise.
inline PhasePoint ho_exact(const PhasePoint& x0, double m, double k, double t) {
    const double w = std::sqrt(k / m);
    Vec q = x0.q * std::cos(w * t) + x0.p * (std::sin(w * t) / (m * w));
    Vec p = -x0.q * (m * w * std::sin(w * t)) + x0.p * std::cos(w * t);
    return PhasePoint(q, p);
}

/// Central-difference gradient of H, step s.
inline isoperiod::Gradient fd_gradient(const SystemSpec& sys, const PhasePoint& x, double s = 1e-5) {
    const auto n = x.dof();
    isoperiod::Gradient g{Vec(n), Vec(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        PhasePoint a = x, b = x;
        a.q[i] += s;
        b.q[i] -= s;
        g.dq[i] = (isoperiod::eval_hamiltonian(sys, a) - isoperiod::eval_hamiltonian(sys, b)) / (2 * s);
        a = x;
        b = x;
        a.p[i] += s;
        b.p[i] -= s;
        g.dp[i] = (isoperiod::eval_hamiltonian(sys, a) - isoperiod::eval_hamiltonian(sys, b)) / (2 * s);
    }
    return g;
}

/// Period of the population ODE x' = x (eps + A x) by classical RK4 on x
/// directly, timing two upward crossings of x_2 = x0_2 with cubic Hermite
/// interpolation. Independent of the Volterra-coordinate machinery.
inline double lv_rk4_period(const Vec& eps, const Mat& A, const Vec& x0, double h) {
    auto f = [&](const Vec& x) -> Vec { return x.cwiseProduct(eps + A * x); };
    auto rk4 = [&](const Vec& x) {
        Vec k1 = f(x), k2 = f(x + 0.5 * h * k1), k3 = f(x + 0.5 * h * k2), k4 = f(x + h * k3);
        return Vec(x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4));
    };
    const double level = x0[1];
    Vec x = x0;
    double t = 0.0;
    std::vector<double> hits;
    // skip the start itself, which sits on the section
    for (long i = 0; i < long(1e8) && hits.size() < 2; ++i) {
        Vec y = rk4(x);
        double s0 = x[1] - level, s1 = y[1] - level;
        if (i > 10 && s0 < 0 && s1 >= 0) {
            // Hermite cubic in tau on [0, h], root by bisection
            double d0 = f(x)[1] * h, d1 = f(y)[1] * h;
            auto H = [&](double u) {
                double u2 = u * u, u3 = u2 * u;
                return (2 * u3 - 3 * u2 + 1) * s0 + (u3 - 2 * u2 + u) * d0 + (-2 * u3 + 3 * u2) * s1 +
                       (u3 - u2) * d1;
            };
            double a = 0, b = 1;
            for (int it = 0; it < 80; ++it) {
                double m = 0.5 * (a + b);
                (H(m) < 0 ? a : b) = m;
            }
            hits.push_back(t + 0.5 * (a + b) * h);
        }
        x = y;
        t += h;
    }
    return hits.size() == 2 ? hits[1] - hits[0] : NAN;
}

}  // namespace testing_support
