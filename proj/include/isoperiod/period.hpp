#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "error.hpp"
#include "integrate.hpp"
#include "lotka_volterra.hpp"
#include "systems.hpp"

namespace isoperiod {

enum class PeriodVerdict { periodic, not_periodic_within_horizon, degenerate_fixed_point };

inline const char* to_string(PeriodVerdict v) {
    switch (v) {
        case PeriodVerdict::periodic: return "periodic";
        case PeriodVerdict::not_periodic_within_horizon: return "not-periodic-within-horizon";
        default: return "degenerate-fixed-point";
    }
}

struct PeriodEstimate {
    std::optional<double> T;
    /// Distance to the start at the reported return (or at the closest
    /// section crossing when none qualified).
    double residual = 0.0;
    /// Positive-direction section crossings up to and including the reported one.
    int returns_used = 0;
    PeriodVerdict verdict = PeriodVerdict::not_periodic_within_horizon;
    /// Confirmation pass: flowing exactly T returns within tolerance and
    /// flowing T/2 does not.
    bool confirmed = false;
    std::string note;
};

/// Linearized (or energy-determined) period that sets default horizons.
inline std::optional<double> characteristic_period(const SystemSpec& sys,
                                                   std::optional<double> energy = std::nullopt) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return std::visit(
        [&](const auto& s) -> std::optional<double> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, HarmonicOscillator>) {
                return two_pi * std::sqrt(s.m / s.k);
            } else if constexpr (std::is_same_v<T, Kepler>) {
                if (!energy || *energy >= 0.0) return std::nullopt;
                double a = -s.mu() * s.mass / (2.0 * *energy);
                return two_pi * std::sqrt(a * a * a / s.mu());
            } else if constexpr (std::is_same_v<T, LotkaVolterra>) {
                try {
                    auto eq = lv_equilibrium(s.eps, s.A);
                    Mat J = eq.q.asDiagonal() * s.A;
                    Eigen::EigenSolver<Mat> es(J, false);
                    double w = es.eigenvalues().imag().cwiseAbs().maxCoeff();
                    if (w > 0.0) return two_pi / w;
                } catch (const Error&) {
                }
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, Potential1D>) {
                auto mn = minimize_on(s.V, s.lo, s.hi);
                double curv = s.V.derivative().derivative()(mn.x);
                if (curv > 0.0) return two_pi / std::sqrt(2.0 * s.kinetic * curv);
                return std::nullopt;
            } else {
                return two_pi / std::min(s.omega1, s.omega2);
            }
        },
        sys.kind());
}

inline double default_return_tol(const Vec& start) { return 1e-6 * (start.norm() + 1.0); }

inline double default_horizon(const SystemSpec& sys, std::optional<double> energy = std::nullopt) {
    auto T = characteristic_period(sys, energy);
    return T ? 50.0 * *T : 1000.0;
}

/// Flow for signed time t: floor(t/h) full steps plus one partial step.
inline PhasePoint flow_for(const SystemSpec& sys, const PhasePoint& start, const StepperConfig& cfg,
                           double t) {
    const long n = long(std::floor(t / cfg.h));
    PhasePoint cur = start;
    for (long i = 0; i < n; ++i) cur = step(sys, cur, cfg);
    double rest = t - double(n) * cfg.h;
    if (rest > 0.0) cur = step(sys, cur, cfg, rest);
    return cur;
}

/// Section-return detector for one observable of the flow. The section is
/// the hyperplane through obs0 with normal v0; every crossing from s < 0 to
/// s >= 0 is refined by Illinois-safeguarded bisection on substeps from the
/// state at the start of the step.
class ReturnTracker {
public:
    using Observable = std::function<Vec(const PhasePoint& state, double t)>;

    ReturnTracker(Observable observe, Vec obs0, Vec v0, double return_tol)
        : observe_(std::move(observe)), obs0_(std::move(obs0)), v0_(std::move(v0)), tol_(return_tol) {
        if (v0_.norm() < 1e-12) {
            est_.verdict = PeriodVerdict::degenerate_fixed_point;
            est_.note = "flow velocity below 1e-12 at the start point";
            done_ = true;
        }
    }

    bool done() const { return done_; }
    const PeriodEstimate& estimate() const { return est_; }
    /// State of the flow at the reported return.
    const PhasePoint& crossing_state() const { return crossing_; }

    double section(const Vec& obs) const { return (obs - obs0_).dot(v0_); }

    /// Feed one completed step prev (time t) -> next (time t + h).
    void feed(const SystemSpec& sys, const StepperConfig& cfg, const PhasePoint& prev, double t,
              const PhasePoint& next, double h) {
        if (done_) return;
        double s_next = section(observe_(next, t + h));
        if (s_prev_ < 0.0 && s_next >= 0.0) refine(sys, cfg, prev, t, h, s_prev_, s_next);
        s_prev_ = s_next;
    }

    void finish_not_periodic(const std::string& note = {}) {
        if (done_) return;
        est_.verdict = PeriodVerdict::not_periodic_within_horizon;
        est_.T.reset();
        if (!note.empty()) est_.note = note;
        done_ = true;
    }

    double distance_at(const PhasePoint& state, double t) const {
        return (observe_(state, t) - obs0_).norm();
    }

    double tolerance() const { return tol_; }

    void set_confirmed(bool c) { est_.confirmed = c; }

private:
    void refine(const SystemSpec& sys, const StepperConfig& cfg, const PhasePoint& prev, double t,
                double h, double g_lo, double g_hi) {
        double a = 0.0, b = h;
        PhasePoint at_b;
        bool have_b = false;
        int side = 0;
        const double width_tol = 1e-12 * h;
        PhasePoint cand;
        double tau = b;
        for (int it = 0; it < 200 && (b - a) > width_tol; ++it) {
            // Illinois step, bisection when it stalls outside the bracket
            tau = (g_hi != g_lo) ? b - g_hi * (b - a) / (g_hi - g_lo) : 0.5 * (a + b);
            if (!(tau > a && tau < b)) tau = 0.5 * (a + b);
            cand = step(sys, prev, cfg, tau);
            double g = section(observe_(cand, t + tau));
            if (g >= 0.0) {
                b = tau;
                g_hi = g;
                at_b = cand;
                have_b = true;
                if (side == 1) g_lo *= 0.5;
                side = 1;
            } else {
                a = tau;
                g_lo = g;
                if (side == -1) g_hi *= 0.5;
                side = -1;
            }
            if (g == 0.0) break;
        }
        if (!have_b) at_b = step(sys, prev, cfg, b);
        const double tc = t + b;
        const double dist = (observe_(at_b, tc) - obs0_).norm();
        ++est_.returns_used;
        if (dist <= tol_) {
            est_.T = tc;
            est_.residual = dist;
            est_.verdict = PeriodVerdict::periodic;
            crossing_ = at_b;
            done_ = true;
        } else if (est_.returns_used == 1 || dist < est_.residual) {
            est_.residual = dist;
        }
    }

    Observable observe_;
    Vec obs0_;
    Vec v0_;
    double tol_;
    double s_prev_ = 0.0;
    bool done_ = false;
    PeriodEstimate est_;
    PhasePoint crossing_;
};

namespace detail {

/// Runs the flow from start, feeding every tracker, until all are done or
/// the horizon is passed. `each_step` sees every accepted state.
inline void drive(const SystemSpec& sys, const PhasePoint& start, const StepperConfig& cfg,
                  double horizon, std::initializer_list<ReturnTracker*> trackers,
                  const std::function<void(double, const PhasePoint&)>& each_step = {}) {
    auto all_done = [&] {
        for (auto* tr : trackers)
            if (!tr->done()) return false;
        return true;
    };
    PhasePoint cur = start;
    const long n_steps = long(std::ceil(horizon / cfg.h));
    for (long i = 0; i < n_steps && !all_done(); ++i) {
        const double t = double(i) * cfg.h;
        PhasePoint next;
        try {
            next = step(sys, cur, cfg);
            sys.check_domain(next);
            if (auto* k = sys.as<Kepler>(); k && next.q.norm() < k->r_min)
                throw DomainError("kepler: r < r_min");
        } catch (const DomainError& e) {
            for (auto* tr : trackers)
                tr->finish_not_periodic(std::string("domain exit at t = ") + std::to_string(t) + ": " +
                                        e.what());
            return;
        } catch (const RangeError& e) {
            for (auto* tr : trackers)
                tr->finish_not_periodic(std::string("domain exit at t = ") + std::to_string(t) + ": " +
                                        e.what());
            return;
        }
        for (auto* tr : trackers) tr->feed(sys, cfg, cur, t, next, cfg.h);
        if (each_step) each_step(t + cfg.h, next);
        cur = std::move(next);
    }
    for (auto* tr : trackers) tr->finish_not_periodic();
}

inline void confirm(const SystemSpec& sys, const PhasePoint& start, const StepperConfig& cfg,
                    ReturnTracker& tr) {
    const auto& est = tr.estimate();
    if (est.verdict != PeriodVerdict::periodic) return;
    const double T = *est.T;
    PhasePoint half = flow_for(sys, start, cfg, 0.5 * T);
    PhasePoint full = flow_for(sys, half, cfg, 0.5 * T);
    bool returns = tr.distance_at(full, T) <= tr.tolerance();
    bool half_returns = tr.distance_at(half, 0.5 * T) <= tr.tolerance();
    tr.set_confirmed(returns && !half_returns);
}

}  // namespace detail

/// Minimal period of the orbit through pt0: first return to within
/// return_tol at a positive crossing of the section through pt0 normal to
/// the flow.
inline PeriodEstimate detect_period(const SystemSpec& sys, const PhasePoint& pt0,
                                    const StepperConfig& cfg, double horizon, double return_tol) {
    cfg.validate();
    if (!(horizon > 0)) throw ConfigError("detect_period: horizon must be positive");
    if (!(return_tol > 0)) throw ConfigError("detect_period: return_tol must be positive");
    sys.check_domain(pt0);
    if (cfg.method == Method::verlet && !sys.separable())
        throw ConfigError("verlet requires a separable Hamiltonian");

    const Vec y0 = pt0.flat();
    ReturnTracker tr([](const PhasePoint& s, double) { return s.flat(); }, y0,
                     vector_field(sys, pt0).flat(), return_tol);
    if (tr.done()) return tr.estimate();
    detail::drive(sys, pt0, cfg, horizon, {&tr});
    detail::confirm(sys, pt0, cfg, tr);
    return tr.estimate();
}

inline PeriodEstimate detect_period(const SystemSpec& sys, const PhasePoint& pt0,
                                    const StepperConfig& cfg) {
    return detect_period(sys, pt0, cfg, default_horizon(sys, eval_hamiltonian(sys, pt0)),
                         default_return_tol(pt0.flat()));
}

struct LvPeriodResult {
    /// Detected on the populations x(t).
    PeriodEstimate x_space;
    /// Detected on the drift-removed Volterra coordinates (Q~, P~).
    PeriodEstimate drift_removed;
    /// Q(T)/T at the x-space return, i.e. the mean of x over one period.
    Vec time_average;
    /// max |H - H(0)| over the detection run.
    double energy_drift = 0.0;
    double energy = 0.0;
    Vec equilibrium;
};

/// Period of the Lotka-Volterra orbit through x0, detected twice: on the
/// populations and on the drift-removed Volterra coordinates. One
/// integration feeds both detectors.
inline LvPeriodResult detect_period_lv(const SystemSpec& sys, const Vec& x0, const StepperConfig& cfg,
                                       double horizon, double return_tol) {
    cfg.validate();
    const auto& lv = require_lv(sys);
    if (sys.convention() != Convention::paper_lv)
        throw ConfigError("detect_period_lv: system must use the paper-lv convention");
    if (cfg.method != Method::implicit_midpoint)
        throw ConfigError("detect_period_lv: lotka-volterra needs implicit-midpoint");
    if (!(horizon > 0)) throw ConfigError("detect_period_lv: horizon must be positive");
    if (!(return_tol > 0)) throw ConfigError("detect_period_lv: return_tol must be positive");

    const auto eq = lv_equilibrium(lv.eps, lv.A);
    const Vec& q = eq.q;
    const Mat& A = lv.A;
    const PhasePoint start = lv_embed(x0, sys).point();

    LvPeriodResult out;
    out.equilibrium = q;
    out.energy = eval_hamiltonian(sys, start);

    ReturnTracker xs([&sys](const PhasePoint& s, double) { return lv_extract(s, sys); }, x0,
                     lv_rhs(lv, x0), return_tol);

    PhasePoint v = vector_field(sys, start);
    Vec vd(2 * q.size());
    vd << v.q - q, v.p + 0.5 * (A * q);
    ReturnTracker dr([q, A](const PhasePoint& s, double t) { return lv_remove_drift(s, t, q, A).flat(); },
                     start.flat(), vd, return_tol);

    double drift = 0.0;
    detail::drive(sys, start, cfg, horizon, {&xs, &dr}, [&](double, const PhasePoint& s) {
        drift = std::max(drift, std::abs(eval_hamiltonian(sys, s) - out.energy));
    });
    detail::confirm(sys, start, cfg, xs);
    detail::confirm(sys, start, cfg, dr);

    out.x_space = xs.estimate();
    out.drift_removed = dr.estimate();
    out.energy_drift = drift;
    if (out.x_space.verdict == PeriodVerdict::periodic)
        out.time_average = xs.crossing_state().q / *out.x_space.T;
    return out;
}

}  // namespace isoperiod
