#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "error.hpp"
#include "phase_point.hpp"
#include "polynomial.hpp"

namespace isoperiod {

/// Sign convention of Hamilton's equations.
///   canonical: q' =  dH/dp, p' = -dH/dq
///   paper_lv:  q' = -dH/dp, p' =  dH/dq  (Volterra form, Q' = x > 0)
enum class Convention { canonical, paper_lv };

inline const char* to_string(Convention c) {
    return c == Convention::canonical ? "canonical" : "paper-lv";
}

/// H = |p|^2 / 2m + k |q|^2 / 2
struct HarmonicOscillator {
    double m = 1.0;
    double k = 1.0;
    int dof = 1;
};

/// One-body Kepler problem H = |p|^2 / 2m - G M m / |q|.
struct Kepler {
    double G = 1.0;
    double central_mass = 1.0;
    double mass = 1.0;
    int dim = 3;
    /// Integration is truncated when |q| drops below this radius.
    double r_min = 1e-3;

    double mu() const { return G * central_mass; }
};

/// Volterra Hamiltonian H = sum eps_j Q_j - sum exp(P_j + (A Q)_j / 2)
/// for the Lotka-Volterra system x_j' = eps_j x_j + sum_k a_jk x_j x_k
/// with skew-symmetric A.
struct LotkaVolterra {
    Vec eps;
    Mat A;
};

/// H = kinetic * p^2 + V(q), one degree of freedom.
struct Potential1D {
    Polynomial V;
    double kinetic = 1.0;
    double lo = -1.0;
    double hi = 1.0;
};

/// H = |p|^2 / 2 + (omega1^2 q1^2 + omega2^2 q2^2) / 2
struct AnisotropicOscillator2D {
    double omega1 = 1.0;
    double omega2 = std::numbers::sqrt2;
};

using SystemKind =
    std::variant<HarmonicOscillator, Kepler, LotkaVolterra, Potential1D, AnisotropicOscillator2D>;

/// An immutable Hamiltonian system. Build through the named factories,
/// which validate parameters.
class SystemSpec {
public:
    static SystemSpec harmonic_oscillator(double m, double k, int dof) {
        if (!(m > 0) || !(k > 0)) throw ConfigError("harmonic oscillator needs m > 0 and k > 0");
        if (dof < 1) throw ConfigError("harmonic oscillator needs dof >= 1");
        return SystemSpec(HarmonicOscillator{m, k, dof}, Convention::canonical);
    }

    static SystemSpec kepler(double G, double central_mass, double mass, int dim = 3,
                             double r_min = 1e-3) {
        if (!(G > 0) || !(central_mass > 0) || !(mass > 0))
            throw ConfigError("kepler needs G, M, m > 0");
        if (dim < 2 || dim > 3) throw ConfigError("kepler dimension must be 2 or 3");
        if (!(r_min > 0)) throw ConfigError("kepler r_min must be positive");
        return SystemSpec(Kepler{G, central_mass, mass, dim, r_min}, Convention::canonical);
    }

    static SystemSpec lotka_volterra(Vec eps, Mat A,
                                     Convention convention = Convention::paper_lv) {
        if (A.rows() != A.cols()) throw ConfigError("lotka-volterra: A must be square");
        if (A.rows() != eps.size()) throw ConfigError("lotka-volterra: eps and A dimension mismatch");
        if (eps.size() < 1) throw ConfigError("lotka-volterra: empty system");
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            for (Eigen::Index j = 0; j < A.cols(); ++j)
                if (std::abs(A(i, j) + A(j, i)) > 1e-12)
                    throw ConfigError("lotka-volterra: A must be skew-symmetric (a_" +
                                      std::to_string(i + 1) + std::to_string(j + 1) + " + a_" +
                                      std::to_string(j + 1) + std::to_string(i + 1) + " != 0)");
        return SystemSpec(LotkaVolterra{std::move(eps), std::move(A)}, convention);
    }

    static SystemSpec potential_1d(Polynomial V, double kinetic, double lo, double hi) {
        if (!(kinetic > 0)) throw ConfigError("potential-1d: kinetic coefficient must be positive");
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw ConfigError("potential-1d: interval must be finite with lo < hi");
        // A polynomial is continuous, so it is bounded below on a finite
        // interval; reject only coefficients that make it non-finite there.
        for (double c : V.coefficients())
            if (!std::isfinite(c)) throw ConfigError("potential-1d: non-finite coefficient");
        return SystemSpec(Potential1D{std::move(V), kinetic, lo, hi}, Convention::canonical);
    }

    static SystemSpec anisotropic_oscillator(double omega1, double omega2) {
        if (!(omega1 > 0) || !(omega2 > 0)) throw ConfigError("anisotropic oscillator needs omega > 0");
        return SystemSpec(AnisotropicOscillator2D{omega1, omega2}, Convention::canonical);
    }

    const SystemKind& kind() const { return kind_; }
    Convention convention() const { return convention_; }

    template <class T>
    const T* as() const {
        return std::get_if<T>(&kind_);
    }

    int dof() const {
        return std::visit(
            [](const auto& s) -> int {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, HarmonicOscillator>) return s.dof;
                else if constexpr (std::is_same_v<T, Kepler>) return s.dim;
                else if constexpr (std::is_same_v<T, LotkaVolterra>) return int(s.eps.size());
                else if constexpr (std::is_same_v<T, Potential1D>) return 1;
                else return 2;
            },
            kind_);
    }

    std::string kind_name() const {
        return std::visit(
            [](const auto& s) -> std::string {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, HarmonicOscillator>) return "harmonic-oscillator";
                else if constexpr (std::is_same_v<T, Kepler>) return "kepler";
                else if constexpr (std::is_same_v<T, LotkaVolterra>) return "lotka-volterra";
                else if constexpr (std::is_same_v<T, Potential1D>) return "potential-1d";
                else return "anisotropic-oscillator-2d";
            },
            kind_);
    }

    /// H = T(p) + V(q); required by the Verlet stepper.
    bool separable() const { return !std::holds_alternative<LotkaVolterra>(kind_); }

    /// Throws DomainError naming the offending component.
    void check_domain(const PhasePoint& pt) const {
        if (pt.dof() != dof())
            throw DomainError("phase point has " + std::to_string(pt.dof()) + " dof, system has " +
                              std::to_string(dof()));
        for (Eigen::Index i = 0; i < pt.dof(); ++i) {
            if (!std::isfinite(pt.q[i])) throw DomainError("non-finite q component", int(i));
            if (!std::isfinite(pt.p[i])) throw DomainError("non-finite p component", int(pt.dof() + i));
        }
        if (as<Kepler>() && pt.q.norm() == 0.0)
            throw DomainError("kepler: q = 0 is a collision", 0);
        if (auto* lv = as<LotkaVolterra>()) {
            Vec e = pt.p + 0.5 * (lv->A * pt.q);
            for (Eigen::Index j = 0; j < e.size(); ++j)
                if (std::abs(e[j]) > 700.0)
                    throw DomainError("lotka-volterra: population exponent out of range", int(j));
        }
    }

    bool admissible(const PhasePoint& pt) const {
        try {
            check_domain(pt);
            return true;
        } catch (const DomainError&) {
            return false;
        }
    }

private:
    SystemSpec(SystemKind kind, Convention c) : kind_(std::move(kind)), convention_(c) {}

    SystemKind kind_;
    Convention convention_;
};

struct Gradient {
    Vec dq;
    Vec dp;
};

namespace detail {

inline Vec lv_populations(const LotkaVolterra& lv, const PhasePoint& pt) {
    return (pt.p + 0.5 * (lv.A * pt.q)).array().exp().matrix();
}

}  // namespace detail

inline double eval_hamiltonian(const SystemSpec& sys, const PhasePoint& pt) {
    sys.check_domain(pt);
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, HarmonicOscillator>) {
                return pt.p.squaredNorm() / (2.0 * s.m) + 0.5 * s.k * pt.q.squaredNorm();
            } else if constexpr (std::is_same_v<T, Kepler>) {
                return pt.p.squaredNorm() / (2.0 * s.mass) - s.mu() * s.mass / pt.q.norm();
            } else if constexpr (std::is_same_v<T, LotkaVolterra>) {
                return s.eps.dot(pt.q) - detail::lv_populations(s, pt).sum();
            } else if constexpr (std::is_same_v<T, Potential1D>) {
                return s.kinetic * pt.p[0] * pt.p[0] + s.V(pt.q[0]);
            } else {
                return 0.5 * pt.p.squaredNorm() +
                       0.5 * (s.omega1 * s.omega1 * pt.q[0] * pt.q[0] +
                              s.omega2 * s.omega2 * pt.q[1] * pt.q[1]);
            }
        },
        sys.kind());
}

inline Gradient eval_gradient(const SystemSpec& sys, const PhasePoint& pt) {
    sys.check_domain(pt);
    return std::visit(
        [&](const auto& s) -> Gradient {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, HarmonicOscillator>) {
                return {s.k * pt.q, pt.p / s.m};
            } else if constexpr (std::is_same_v<T, Kepler>) {
                double r = pt.q.norm();
                return {(s.mu() * s.mass / (r * r * r)) * pt.q, pt.p / s.mass};
            } else if constexpr (std::is_same_v<T, LotkaVolterra>) {
                Vec x = detail::lv_populations(s, pt);
                return {s.eps - 0.5 * (s.A.transpose() * x), -x};
            } else if constexpr (std::is_same_v<T, Potential1D>) {
                Vec dq(1), dp(1);
                dq[0] = s.V.derivative()(pt.q[0]);
                dp[0] = 2.0 * s.kinetic * pt.p[0];
                return {dq, dp};
            } else {
                Vec dq(2);
                dq << s.omega1 * s.omega1 * pt.q[0], s.omega2 * s.omega2 * pt.q[1];
                return {dq, pt.p};
            }
        },
        sys.kind());
}

/// Velocity (q', p') under the system's declared sign convention.
inline PhasePoint vector_field(const SystemSpec& sys, const PhasePoint& pt) {
    Gradient g = eval_gradient(sys, pt);
    PhasePoint v;
    if (sys.convention() == Convention::canonical) {
        v.q = g.dp;
        v.p = -g.dq;
    } else {
        v.q = -g.dp;
        v.p = g.dq;
    }
    return v;
}

}  // namespace isoperiod
