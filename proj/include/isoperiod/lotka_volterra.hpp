#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"
#include "systems.hpp"
#include "trajectory.hpp"

namespace isoperiod {

/// Volterra coordinates: Q_j = integral of x_j, P_j = log Q_j' - (A Q)_j / 2.
struct VolterraState {
    Vec Q;
    Vec P;
    double t = 0.0;

    PhasePoint point() const { return PhasePoint(Q, P); }
};

struct LvEquilibrium {
    Vec q;
    /// False when some q_j <= 0; the positive-cone statements then do not apply.
    bool in_positive_cone = true;
};

inline const LotkaVolterra& require_lv(const SystemSpec& sys) {
    auto* lv = sys.as<LotkaVolterra>();
    if (!lv) throw ConfigError("operation requires a lotka-volterra system, got " + sys.kind_name());
    return *lv;
}

/// Solves eps + A q = 0.
inline LvEquilibrium lv_equilibrium(const Vec& eps, const Mat& A) {
    if (A.rows() != A.cols() || A.rows() != eps.size())
        throw ConfigError("lv_equilibrium: A must be square and match eps");
    Eigen::FullPivLU<Mat> lu(A);
    if (!lu.isInvertible()) throw NoUniqueEquilibrium("lv_equilibrium: A is singular");
    LvEquilibrium eq;
    eq.q = lu.solve(-eps);
    eq.in_positive_cone = (eq.q.array() > 0.0).all();
    return eq;
}

inline LvEquilibrium lv_equilibrium(const SystemSpec& sys) {
    const auto& lv = require_lv(sys);
    return lv_equilibrium(lv.eps, lv.A);
}

inline VolterraState lv_embed(const Vec& x0, const SystemSpec& sys) {
    const auto& lv = require_lv(sys);
    if (x0.size() != lv.eps.size()) throw ConfigError("lv_embed: dimension mismatch");
    VolterraState s;
    s.Q = Vec::Zero(x0.size());
    s.P.resize(x0.size());
    for (Eigen::Index j = 0; j < x0.size(); ++j) {
        if (!(x0[j] > 0.0) || !std::isfinite(x0[j]))
            throw DomainError("lv_embed: population x_" + std::to_string(j + 1) + " must be positive",
                              int(j));
        s.P[j] = std::log(x0[j]);
    }
    return s;
}

/// x_j = exp(P_j + (A Q)_j / 2).
inline Vec lv_extract(const Vec& Q, const Vec& P, const SystemSpec& sys) {
    const auto& lv = require_lv(sys);
    if (Q.size() != lv.eps.size() || P.size() != lv.eps.size())
        throw ConfigError("lv_extract: dimension mismatch");
    Vec e = P + 0.5 * (lv.A * Q);
    Vec x(e.size());
    for (Eigen::Index j = 0; j < e.size(); ++j) {
        if (!std::isfinite(e[j]) || std::abs(e[j]) > 700.0)
            throw RangeError("lv_extract: exponent " + std::to_string(e[j]) + " out of range");
        x[j] = std::exp(e[j]);
    }
    return x;
}

inline Vec lv_extract(const VolterraState& s, const SystemSpec& sys) {
    return lv_extract(s.Q, s.P, sys);
}

inline Vec lv_extract(const PhasePoint& pt, const SystemSpec& sys) {
    return lv_extract(pt.q, pt.p, sys);
}

/// Right side of the original population ODE, x_j (eps_j + (A x)_j).
inline Vec lv_rhs(const LotkaVolterra& lv, const Vec& x) {
    return x.cwiseProduct(lv.eps + lv.A * x);
}

/// Q~ = Q - q t, P~ = P + t A q / 2, applied pointwise.
inline PhasePoint lv_remove_drift(const PhasePoint& pt, double t, const Vec& q, const Mat& A) {
    return PhasePoint(pt.q - q * t, pt.p + (0.5 * t) * (A * q));
}

inline Trajectory lv_drift_removal(const Trajectory& traj, const Vec& q, const Mat& A) {
    if (A.rows() != A.cols() || A.rows() != q.size())
        throw ConfigError("lv_drift_removal: shape mismatch between q and A");
    Trajectory out;
    out.times = traj.times;
    out.energy0 = traj.energy0;
    out.max_drift = traj.max_drift;
    out.exit_reason = traj.exit_reason;
    out.states.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        if (traj.states[i].dof() != q.size())
            throw ConfigError("lv_drift_removal: state dimension mismatch");
        out.states.push_back(lv_remove_drift(traj.states[i], traj.times[i], q, A));
    }
    return out;
}

}  // namespace isoperiod
