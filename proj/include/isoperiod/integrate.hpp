#pragma once

#include <cfloat>
#include <cmath>
#include <functional>
#include <string>

#include "error.hpp"
#include "systems.hpp"
#include "trajectory.hpp"

namespace isoperiod {

enum class Method { verlet, implicit_midpoint };

inline const char* to_string(Method m) {
    return m == Method::verlet ? "verlet" : "implicit-midpoint";
}

struct StepperConfig {
    Method method = Method::verlet;
    double h = 1e-3;
    /// Newton stopping threshold, relative to the step increment.
    double newton_tol = 1e-14;
    int newton_max_iter = 50;

    void validate() const {
        if (!(h > 0) || !std::isfinite(h)) throw ConfigError("stepper: h must be positive");
        if (!(newton_tol > 0) || newton_tol > 1e-4)
            throw ConfigError("stepper: newton_tol must lie in (0, 1e-4]");
        if (newton_max_iter < 1) throw ConfigError("stepper: newton_max_iter must be >= 1");
    }
};

namespace detail {

inline Vec flat_field(const SystemSpec& sys, const Vec& y) {
    return vector_field(sys, PhasePoint::from_flat(y)).flat();
}

inline PhasePoint verlet_step(const SystemSpec& sys, const PhasePoint& pt, double dt) {
    // kick-drift-kick; for separable H the p-rate depends on q only and
    // the q-rate on p only
    PhasePoint v = vector_field(sys, pt);
    Vec p_half = pt.p + (0.5 * dt) * v.p;
    PhasePoint mid(pt.q, p_half);
    Vec q_new = pt.q + dt * vector_field(sys, mid).q;
    PhasePoint v_end = vector_field(sys, PhasePoint(q_new, p_half));
    return PhasePoint(std::move(q_new), p_half + (0.5 * dt) * v_end.p);
}

inline PhasePoint midpoint_step(const SystemSpec& sys, const PhasePoint& pt, double dt,
                                const StepperConfig& cfg) {
    // Newton on the increment d: R(d) = d - dt f(y + d/2) = 0
    const Vec y = pt.flat();
    const Eigen::Index m = y.size();
    auto residual = [&](const Vec& d) -> Vec { return d - dt * flat_field(sys, y + 0.5 * d); };

    Vec d = dt * flat_field(sys, y);
    Vec R = residual(d);
    Eigen::PartialPivLU<Mat> lu;
    const double y_scale = y.lpNorm<Eigen::Infinity>();
    double last = R.lpNorm<Eigen::Infinity>();

    for (int iter = 0; iter < cfg.newton_max_iter; ++iter) {
        if (iter % 4 == 0) {
            // finite-difference Jacobian of the residual
            Mat J(m, m);
            for (Eigen::Index j = 0; j < m; ++j) {
                double eps = 1e-7 * std::max(1.0, std::abs(d[j]));
                Vec dp = d;
                dp[j] += eps;
                J.col(j) = (residual(dp) - R) / eps;
            }
            lu.compute(J);
        }
        Vec delta = lu.solve(-R);
        d += delta;
        R = residual(d);
        last = R.lpNorm<Eigen::Infinity>();
        double thr = std::max(cfg.newton_tol * d.lpNorm<Eigen::Infinity>(), 4.0 * DBL_EPSILON * y_scale);
        if (!std::isfinite(last)) break;
        if (delta.lpNorm<Eigen::Infinity>() <= thr) return PhasePoint::from_flat(y + d);
    }
    throw StepFailure("implicit midpoint: Newton did not converge in " +
                          std::to_string(cfg.newton_max_iter) + " iterations",
                      last);
}

}  // namespace detail

/// One step of signed size dt (negative dt integrates backwards).
inline PhasePoint step(const SystemSpec& sys, const PhasePoint& pt, const StepperConfig& cfg,
                       double dt) {
    if (cfg.method == Method::verlet) {
        if (!sys.separable())
            throw ConfigError("verlet requires a separable Hamiltonian; " + sys.kind_name() +
                              " needs implicit-midpoint");
        return detail::verlet_step(sys, pt, dt);
    }
    return detail::midpoint_step(sys, pt, dt, cfg);
}

inline PhasePoint step(const SystemSpec& sys, const PhasePoint& pt, const StepperConfig& cfg) {
    return step(sys, pt, cfg, cfg.h);
}

using Observer = std::function<void(double t, const PhasePoint& state)>;

/// Fixed-step integration on t = 0, h, 2h, ... <= t_max. Every `stride`-th
/// state is stored; the observer sees every step. A domain exit (Kepler
/// r < r_min, population overflow) truncates the trajectory and records
/// the reason; Newton failures propagate with the failing time.
inline Trajectory integrate(const SystemSpec& sys, const PhasePoint& pt0, const StepperConfig& cfg,
                            double t_max, const Observer& observer = {}, int stride = 1) {
    cfg.validate();
    if (!(t_max >= 0)) throw ConfigError("integrate: t_max must be non-negative");
    if (stride < 1) throw ConfigError("integrate: stride must be >= 1");
    sys.check_domain(pt0);
    if (cfg.method == Method::verlet && !sys.separable())
        throw ConfigError("verlet requires a separable Hamiltonian; " + sys.kind_name() +
                          " needs implicit-midpoint");

    Trajectory traj;
    traj.energy0 = eval_hamiltonian(sys, pt0);
    traj.times.push_back(0.0);
    traj.states.push_back(pt0);
    if (observer) observer(0.0, pt0);

    const auto* kep = sys.as<Kepler>();
    const long n_steps = long(std::floor(t_max / cfg.h + 1e-9));
    PhasePoint cur = pt0;
    for (long i = 1; i <= n_steps; ++i) {
        const double t = double(i) * cfg.h;
        try {
            cur = step(sys, cur, cfg);
            sys.check_domain(cur);
        } catch (const StepFailure& e) {
            throw StepFailure(std::string(e.what()) + " at t = " + std::to_string(t), e.residual(), t);
        } catch (const DomainError& e) {
            traj.exit_reason = std::string("domain exit at t = ") + std::to_string(t) + ": " + e.what();
            break;
        } catch (const RangeError& e) {
            traj.exit_reason = std::string("domain exit at t = ") + std::to_string(t) + ": " + e.what();
            break;
        }
        if (kep && cur.q.norm() < kep->r_min) {
            traj.exit_reason = "kepler: r < r_min at t = " + std::to_string(t);
            break;
        }
        if (observer) observer(t, cur);
        if (i % stride == 0) {
            traj.max_drift = std::max(traj.max_drift, std::abs(eval_hamiltonian(sys, cur) - traj.energy0));
            traj.times.push_back(t);
            traj.states.push_back(cur);
        }
    }
    return traj;
}

/// max over stored states of |H(state) - H(state_0)|.
inline double energy_drift(const SystemSpec& sys, const Trajectory& traj) {
    if (traj.states.empty()) throw ConfigError("energy_drift: empty trajectory");
    const double h0 = eval_hamiltonian(sys, traj.states.front());
    double worst = 0.0;
    for (const auto& s : traj.states) worst = std::max(worst, std::abs(eval_hamiltonian(sys, s) - h0));
    return worst;
}

}  // namespace isoperiod
