#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "error.hpp"

namespace isoperiod {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Position/momentum pair in a 2n-dimensional phase space.
struct PhasePoint {
    Vec q;
    Vec p;

    PhasePoint() = default;
    PhasePoint(Vec q_, Vec p_) : q(std::move(q_)), p(std::move(p_)) {
        if (q.size() != p.size() || q.size() < 1)
            throw DomainError("phase point: q and p must have equal length n >= 1");
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            if (!std::isfinite(q[i])) throw DomainError("phase point: non-finite q", int(i));
            if (!std::isfinite(p[i])) throw DomainError("phase point: non-finite p", int(i + q.size()));
        }
    }

    Eigen::Index dof() const { return q.size(); }

    /// Stacked (q, p) coordinates.
    Vec flat() const {
        Vec y(2 * q.size());
        y << q, p;
        return y;
    }

    static PhasePoint from_flat(const Vec& y) {
        const Eigen::Index n = y.size() / 2;
        return PhasePoint(y.head(n), y.tail(n));
    }
};

inline double distance(const PhasePoint& a, const PhasePoint& b) {
    return std::sqrt((a.q - b.q).squaredNorm() + (a.p - b.p).squaredNorm());
}

inline double norm(const PhasePoint& a) {
    return std::sqrt(a.q.squaredNorm() + a.p.squaredNorm());
}

}  // namespace isoperiod
