#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "rng.hpp"
#include "systems.hpp"

namespace isoperiod {

struct SamplerOptions {
    /// Position box override; defaults are per system (see default_box).
    std::optional<Vec> box_lo;
    std::optional<Vec> box_hi;
    /// Kepler: reject orbits with perihelion below this fraction of a.
    double kepler_min_perihelion = 0.1;
    /// Failed draws allowed per requested point.
    int max_failures_per_point = 1000;
};

struct Box {
    Vec lo;
    Vec hi;
};

/// Per-system position box for the level E. Throws DegenerateSurface when
/// E is the minimum of H (the level set is a point) and SurfaceUnreachable
/// when it lies below it or, for Kepler, when E >= 0.
inline Box default_box(const SystemSpec& sys, double E) {
    const int n = sys.dof();
    auto symmetric = [n](const Vec& half) { return Box{-half, half}; };
    auto check_min = [&](double hmin) {
        double tol = 1e-12 * std::max(1.0, std::abs(E));
        if (std::abs(E - hmin) <= tol)
            throw DegenerateSurface("energy " + std::to_string(E) +
                                    " is the minimum of H: the level set is a critical point");
        if (E < hmin)
            throw SurfaceUnreachable("energy " + std::to_string(E) + " lies below min H = " +
                                     std::to_string(hmin));
    };
    return std::visit(
        [&](const auto& s) -> Box {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, HarmonicOscillator>) {
                check_min(0.0);
                return symmetric(Vec::Constant(n, std::sqrt(2.0 * E / s.k)));
            } else if constexpr (std::is_same_v<T, Kepler>) {
                if (E >= 0.0)
                    throw SurfaceUnreachable("kepler: E >= 0 has no bound orbits");
                double a = -s.mu() * s.mass / (2.0 * E);
                return symmetric(Vec::Constant(n, 2.0 * a));
            } else if constexpr (std::is_same_v<T, LotkaVolterra>) {
                return symmetric(Vec::Ones(n));
            } else if constexpr (std::is_same_v<T, Potential1D>) {
                check_min(minimize_on(s.V, s.lo, s.hi).value);
                return Box{Vec::Constant(1, s.lo), Vec::Constant(1, s.hi)};
            } else {
                check_min(0.0);
                Vec half(2);
                half << std::sqrt(2.0 * E) / s.omega1, std::sqrt(2.0 * E) / s.omega2;
                return symmetric(half);
            }
        },
        sys.kind());
}

namespace detail {

/// Extra admissibility beyond hitting the level set.
inline bool sample_acceptable(const SystemSpec& sys, const PhasePoint& pt, double E,
                              const SamplerOptions& opt) {
    if (auto* k = sys.as<Kepler>()) {
        double r = pt.q.norm();
        if (r < k->r_min) return false;
        double L2;
        if (pt.dof() == 2) {
            double l = pt.q[0] * pt.p[1] - pt.q[1] * pt.p[0];
            L2 = l * l;
        } else {
            L2 = pt.q.head<3>().cross(pt.p.head<3>()).squaredNorm();
        }
        double mu = k->mu();
        double e2 = 1.0 + 2.0 * E * L2 / (mu * mu * k->mass * k->mass * k->mass);
        double e = std::sqrt(std::max(0.0, e2));
        return 1.0 - e >= opt.kepler_min_perihelion;
    }
    return true;
}

/// One draw: q in the box, random momentum direction, bisection on the
/// ray length. Empty when the ray never crosses the level.
inline std::optional<PhasePoint> draw_on_surface(const SystemSpec& sys, double E, const Box& box,
                                                 Rng& rng) {
    const int n = sys.dof();
    Vec q(n), d(n);
    for (int i = 0; i < n; ++i) q[i] = rng.uniform(box.lo[i], box.hi[i]);
    double dn = 0.0;
    do {
        for (int i = 0; i < n; ++i) d[i] = rng.normal();
        dn = d.norm();
    } while (dn == 0.0);
    d /= dn;

    auto f = [&](double s) -> std::optional<double> {
        PhasePoint pt(q, s * d);
        if (!sys.admissible(pt)) return std::nullopt;
        return eval_hamiltonian(sys, pt) - E;
    };
    const double tol = 1e-10 * std::max(1.0, std::abs(E));

    auto f0 = f(0.0);
    if (!f0) return std::nullopt;
    if (std::abs(*f0) <= tol * 1e-2) return PhasePoint(q, Vec::Zero(n));

    double lo = 0.0, flo = *f0, hi = 1e-3, fhi = 0.0;
    bool bracketed = false;
    for (int it = 0; it < 80; ++it) {
        auto v = f(hi);
        if (!v) return std::nullopt;
        fhi = *v;
        if ((fhi > 0) != (flo > 0) || fhi == 0.0) {
            bracketed = true;
            break;
        }
        lo = hi;
        flo = fhi;
        hi *= 2.0;
    }
    if (!bracketed) return std::nullopt;

    double mid = hi;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = *f(mid);
        if (fm == 0.0) break;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    // pick whichever end sits closest to the level
    double best = mid;
    double fb = std::abs(*f(mid));
    if (std::abs(flo) < fb) best = lo, fb = std::abs(flo);
    if (std::abs(fhi) < fb) best = hi, fb = std::abs(fhi);
    if (fb > tol) return std::nullopt;
    return PhasePoint(q, best * d);
}

}  // namespace detail

/// Draws `count` points on the level set H = E. Point i uses its own
/// stream derived from (seed, i), so any subset can be regenerated
/// independently and the result does not depend on evaluation order.
inline std::vector<PhasePoint> sample_energy_surface(const SystemSpec& sys, double E, int count,
                                                     std::uint64_t seed,
                                                     const SamplerOptions& opt = {}) {
    if (count < 0) throw ConfigError("sample_energy_surface: negative count");
    Box box = default_box(sys, E);
    if (opt.box_lo) box.lo = *opt.box_lo;
    if (opt.box_hi) box.hi = *opt.box_hi;
    if (box.lo.size() != sys.dof() || box.hi.size() != sys.dof())
        throw ConfigError("sample_energy_surface: box dimension mismatch");
    if (((box.hi - box.lo).array() <= 0.0).any())
        throw DegenerateSurface("sample_energy_surface: empty position box at E = " +
                                std::to_string(E));

    std::vector<PhasePoint> out;
    out.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        Rng rng = Rng::for_item(seed, std::uint64_t(i));
        bool done = false;
        for (int attempt = 0; attempt < opt.max_failures_per_point; ++attempt) {
            auto pt = detail::draw_on_surface(sys, E, box, rng);
            if (pt && detail::sample_acceptable(sys, *pt, E, opt)) {
                out.push_back(std::move(*pt));
                done = true;
                break;
            }
        }
        if (!done)
            throw SurfaceUnreachable("sample_energy_surface: no admissible point on H = " +
                                     std::to_string(E) + " after " +
                                     std::to_string(opt.max_failures_per_point) + " draws");
    }
    return out;
}

}  // namespace isoperiod
