#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "oracle_1d.hpp"
#include "polynomial.hpp"
#include "tridiagonal.hpp"

namespace isoperiod {

/// Uniform Dirichlet grid on [-L, L]; nodes x_i = -L + i*dx for i = 1..N.
struct Grid1D {
    double L = 1.0;
    int N = 16;

    Grid1D() = default;
    Grid1D(double L_, int N_) : L(L_), N(N_) {
        if (!(L > 0) || !std::isfinite(L)) throw ConfigError("grid: L must be positive");
        if (N < 16) throw ConfigError("grid: N must be at least 16");
    }

    double spacing() const { return 2.0 * L / (N + 1); }
    double node(int i) const { return -L + i * spacing(); }
};

/// -hbar^2 d^2/dx^2 + V with the 3-point Laplacian.
inline SymTridiagonal discretize_1d(const Polynomial& V, double hbar, const Grid1D& grid) {
    if (!(hbar > 0)) throw ConfigError("discretize: hbar must be positive");
    const double dx = grid.spacing();
    const double t = hbar * hbar / (dx * dx);
    SymTridiagonal T;
    T.d.resize(std::size_t(grid.N));
    T.e.assign(std::size_t(grid.N - 1), -t);
    for (int i = 1; i <= grid.N; ++i) {
        double v = V(grid.node(i));
        if (!std::isfinite(v)) throw ConfigError("discretize: V not finite on the grid");
        T.d[std::size_t(i - 1)] = 2.0 * t + v;
    }
    return T;
}

struct GridOptions {
    /// Fixed half-width / node count; chosen automatically when absent.
    std::optional<double> L;
    std::optional<int> N;
    /// Largest local wavenumber times dx.
    double k_delta = 0.08;
    /// Required WKB decay exponent past the outer turning points.
    double decay = 35.0;
    int max_N = 400000;
    int workers = 1;
};

struct GridChoice {
    Grid1D grid;
    std::vector<std::string> warnings;
};

/// Picks L so that V(+-L) >= E_max + margin and the WKB tail past the
/// turning points has decayed by exp(-decay); N so that the fastest
/// oscillation is resolved at k_delta.
inline GridChoice choose_grid(const Polynomial& V, double hbar, double E_max, double margin,
                              const GridOptions& opt = {}) {
    GridChoice out;
    const OracleOptions search{-1e3, 1e3, 20000};
    const auto mn = minimize_on(V, search.lo, search.hi, search.nodes);
    double L = 0.0;
    if (opt.L) {
        L = *opt.L;
        if (V(-L) < E_max + margin || V(L) < E_max + margin)
            out.warnings.push_back("confinement margin not met at L = " + std::to_string(L) +
                                   ": window eigenvalues may feel the box");
    } else {
        const double target = E_max + margin;
        double reach = 0.0;
        for (double dir : {-1.0, 1.0}) {
            double x = mn.x, integral = 0.0;
            const double dx = 1e-3 * (1.0 + std::abs(mn.x));
            double step = dx;
            while (V(x) < target || integral < opt.decay * hbar) {
                double xn = x + dir * step;
                double gap = V(0.5 * (x + xn)) - E_max;
                if (gap > 0) integral += std::sqrt(gap) * step;
                x = xn;
                if (std::abs(x) > 1e6) throw NotConfining("grid: V does not confine the window energy");
                step = std::min(step * 1.01, 0.01 * (1.0 + std::abs(x)));
            }
            reach = std::max(reach, std::abs(x));
        }
        L = reach;
    }
    int N = 0;
    if (opt.N) {
        N = *opt.N;
    } else {
        const double kmax = std::sqrt(std::max(E_max - mn.value, 0.0)) / hbar;
        const double dx = kmax > 0 ? opt.k_delta / kmax : L / 16.0;
        N = std::max(16, int(std::ceil(2.0 * L / dx)) - 1);
        if (N > opt.max_N) {
            out.warnings.push_back("grid capped at N = " + std::to_string(opt.max_N));
            N = opt.max_N;
        }
    }
    out.grid = Grid1D(L, N);
    return out;
}

/// Eigenvalues within |E - E_k| < c hbar^(1-delta).
struct SpectralWindow {
    double hbar = 0.0;
    double E = 0.0;
    double c = 0.0;
    double delta = 0.0;
    std::vector<double> eigenvalues;

    double half_width() const { return c * std::pow(hbar, 1.0 - delta); }
    bool empty() const { return eigenvalues.empty(); }
};

inline void check_window_params(double c, double delta, double hbar) {
    if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("window: delta must lie in (0, 1/2)");
    if (!(c > 0)) throw ConfigError("window: c must be positive");
    if (!(hbar > 0)) throw ConfigError("window: hbar must be positive");
}

inline SpectralWindow window(const std::vector<double>& eigs, double E, double c, double delta,
                             double hbar) {
    check_window_params(c, delta, hbar);
    SpectralWindow w{hbar, E, c, delta, {}};
    const double hw = w.half_width();
    for (double x : eigs)
        if (std::abs(E - x) < hw) w.eigenvalues.push_back(x);
    return w;
}

/// Sorted sums a + b with |a + b - E| <= margin; never forms the full product.
inline std::vector<double> tensor_sum_spectrum(const std::vector<double>& ex,
                                               const std::vector<double>& ey, double E, double margin) {
    if (!(margin > 0)) throw ConfigError("tensor sum: margin must be positive");
    std::vector<double> out;
    for (double a : ex) {
        auto lo = std::lower_bound(ey.begin(), ey.end(), E - margin - a);
        for (auto it = lo; it != ey.end() && a + *it <= E + margin; ++it)
            if (a + *it >= E - margin) out.push_back(a + *it);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// (E_k - E_l) / hbar over all ordered pairs k != l, sorted.
inline std::vector<double> difference_spectrum(const SpectralWindow& win) {
    const auto& e = win.eigenvalues;
    std::vector<double> out;
    if (e.size() < 2) return out;
    out.reserve(e.size() * (e.size() - 1));
    for (std::size_t k = 0; k < e.size(); ++k)
        for (std::size_t l = 0; l < e.size(); ++l)
            if (k != l) out.push_back((e[k] - e[l]) / win.hbar);
    std::sort(out.begin(), out.end());
    return out;
}

enum class ClusterVerdict { lattice, dense, inconclusive };

inline const char* to_string(ClusterVerdict v) {
    switch (v) {
        case ClusterVerdict::lattice: return "LATTICE";
        case ClusterVerdict::dense: return "DENSE";
        default: return "INCONCLUSIVE";
    }
}

struct ClusterOptions {
    double bin_width = 0.1;
    /// Defaults to bin_width.
    std::optional<double> persist_tol;
    /// Histogram range [0, R]; defaults to 4 * expected spacing, else 10.
    std::optional<double> range;
    std::optional<double> expected_spacing;
    double fill_threshold = 0.9;
    double lattice_rel_tol = 0.02;
};

struct HbarDiffs {
    double hbar = 0.0;
    SpectralWindow window;
    std::vector<double> diffs;
    /// Counts on [0, R] in bins of bin_width.
    std::vector<long> histogram;
    double fill_fraction = 0.0;
};

struct DiffSpectrumReport {
    std::vector<double> hbars;
    std::vector<HbarDiffs> per_hbar;
    double bin_width = 0.0;
    double persist_tol = 0.0;
    double range = 0.0;
    std::vector<double> cluster_points;
    std::optional<double> fitted_spacing;
    std::optional<double> T_hat;
    double fit_residual = 0.0;
    /// Fill fraction at the smallest hbar.
    double fill_fraction = 0.0;
    ClusterVerdict verdict = ClusterVerdict::inconclusive;
    /// Classical reference, when an oracle applies.
    std::optional<double> oracle_T;
    std::vector<std::string> warnings;
};

namespace detail {

inline bool has_value_near(const std::vector<double>& sorted, double x, double tol) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), x - tol);
    return it != sorted.end() && *it <= x + tol;
}

struct LatticeFit {
    double s = 0.0;
    double residual = 0.0;
};

/// Largest spacing s >= min_s with every point within rel_tol * s of a
/// positive multiple of s.
inline std::optional<LatticeFit> fit_lattice(const std::vector<double>& pts, double min_s,
                                             double rel_tol) {
    std::optional<LatticeFit> best;
    for (double p : pts) {
        for (int m = 1; m <= 8; ++m) {
            double s0 = p / m;
            if (s0 < min_s) break;
            double num = 0.0, den = 0.0;
            for (double x : pts) {
                double k = std::max(1.0, std::round(x / s0));
                num += k * x;
                den += k * k;
            }
            double s = num / den;
            double res = 0.0;
            for (double x : pts) {
                double k = std::max(1.0, std::round(x / s));
                res = std::max(res, std::abs(x - k * s) / s);
            }
            if (res < rel_tol && (!best || s > best->s * (1.0 + rel_tol))) best = LatticeFit{s, res};
        }
    }
    return best;
}

}  // namespace detail

/// Lattice-vs-dense classification of the scaled difference spectra over a
/// decreasing hbar schedule.
inline DiffSpectrumReport cluster_verdict(std::vector<SpectralWindow> windows,
                                          const ClusterOptions& opt = {}) {
    if (windows.size() < 3) throw ConfigError("cluster verdict: need at least 3 hbar values");
    for (std::size_t i = 1; i < windows.size(); ++i)
        if (!(windows[i].hbar < windows[i - 1].hbar))
            throw ConfigError("cluster verdict: hbar schedule must be strictly decreasing");
    if (!(opt.bin_width > 0)) throw ConfigError("cluster verdict: bin width must be positive");

    DiffSpectrumReport rep;
    rep.bin_width = opt.bin_width;
    rep.persist_tol = opt.persist_tol.value_or(opt.bin_width);
    rep.range = opt.range ? *opt.range : opt.expected_spacing ? 4.0 * *opt.expected_spacing : 10.0;
    if (!(rep.range > 0)) throw ConfigError("cluster verdict: range must be positive");
    const std::size_t nbins = std::max<std::size_t>(1, std::size_t(std::llround(rep.range / opt.bin_width)));

    for (auto& w : windows) {
        HbarDiffs h;
        h.hbar = w.hbar;
        h.diffs = difference_spectrum(w);
        h.histogram.assign(nbins, 0);
        for (double d : h.diffs) {
            if (d < 0.0 || d > rep.range) continue;
            std::size_t b = std::min(nbins - 1, std::size_t(d / opt.bin_width));
            ++h.histogram[b];
        }
        long filled = std::count_if(h.histogram.begin(), h.histogram.end(), [](long n) { return n > 0; });
        h.fill_fraction = double(filled) / double(nbins);
        if (w.empty()) rep.warnings.push_back("empty window at hbar = " + std::to_string(w.hbar));
        h.window = std::move(w);
        rep.hbars.push_back(h.hbar);
        rep.per_hbar.push_back(std::move(h));
    }
    const auto& finest = rep.per_hbar.back();
    rep.fill_fraction = finest.fill_fraction;

    // bins populated (to within persist_tol) at every hbar, merged into runs
    auto center = [&](std::size_t b) { return (double(b) + 0.5) * opt.bin_width; };
    std::vector<bool> persistent(nbins, false);
    for (std::size_t b = 0; b < nbins; ++b) {
        bool all = true;
        for (const auto& h : rep.per_hbar)
            if (!detail::has_value_near(h.diffs, center(b), rep.persist_tol)) {
                all = false;
                break;
            }
        persistent[b] = all;
    }
    for (std::size_t b = 0; b < nbins;) {
        if (!persistent[b]) {
            ++b;
            continue;
        }
        std::size_t e = b;
        while (e + 1 < nbins && persistent[e + 1]) ++e;
        // locate the cluster at the finest hbar
        double lo = center(b) - rep.persist_tol, hi = center(e) + rep.persist_tol;
        auto first = std::lower_bound(finest.diffs.begin(), finest.diffs.end(), std::max(lo, 0.0));
        double sum = 0.0;
        long n = 0;
        for (auto it = first; it != finest.diffs.end() && *it <= hi; ++it) {
            sum += *it;
            ++n;
        }
        if (n > 0) rep.cluster_points.push_back(sum / double(n));
        b = e + 1;
    }

    if (rep.fill_fraction > opt.fill_threshold) {
        rep.verdict = ClusterVerdict::dense;
        return rep;
    }
    std::vector<double> pts;
    for (double p : rep.cluster_points)
        if (p > opt.bin_width) pts.push_back(p);
    if (pts.empty()) return rep;
    if (auto fit = detail::fit_lattice(pts, 2.0 * opt.bin_width, opt.lattice_rel_tol)) {
        rep.verdict = ClusterVerdict::lattice;
        rep.fitted_spacing = fit->s;
        rep.T_hat = 2.0 * std::numbers::pi / fit->s;
        rep.fit_residual = fit->residual;
    }
    return rep;
}

struct SpectrumOptions {
    GridOptions grid;
    /// Confinement margin V(+-L) >= E_max + margin_factor * c * hbar^(1-delta).
    double margin_factor = 10.0;
};

struct Spectrum1D {
    Grid1D grid;
    std::vector<double> eigenvalues;
    std::vector<std::string> warnings;
};

/// Eigenvalues of -hbar^2 d^2 + V in [lo, hi).
inline Spectrum1D spectrum_1d(const Polynomial& V, double hbar, double lo, double hi, double margin,
                              const SpectrumOptions& opt = {}) {
    auto g = choose_grid(V, hbar, hi, margin, opt.grid);
    Spectrum1D out{g.grid, {}, std::move(g.warnings)};
    out.eigenvalues = eig_tridiagonal(discretize_1d(V, hbar, out.grid), lo, hi, opt.grid.workers);
    return out;
}

inline SpectralWindow window_1d(const Polynomial& V, double hbar, double E, double c, double delta,
                                const SpectrumOptions& opt = {}, std::vector<std::string>* warnings = nullptr) {
    check_window_params(c, delta, hbar);
    const double hw = c * std::pow(hbar, 1.0 - delta);
    auto sp = spectrum_1d(V, hbar, E - hw, E + hw, opt.margin_factor * hw, opt);
    if (warnings)
        for (auto& w : sp.warnings) warnings->push_back("hbar = " + std::to_string(hbar) + ": " + w);
    return window(sp.eigenvalues, E, c, delta, hbar);
}

/// Window of -hbar^2 Laplacian + Vx(x) + Vy(y) from tensor sums of the two 1D spectra.
inline SpectralWindow window_separable(const Polynomial& Vx, const Polynomial& Vy, double hbar, double E,
                                       double c, double delta, const SpectrumOptions& opt = {},
                                       std::vector<std::string>* warnings = nullptr) {
    check_window_params(c, delta, hbar);
    const double hw = c * std::pow(hbar, 1.0 - delta);
    const OracleOptions search{-1e3, 1e3, 20000};
    const double min_x = minimize_on(Vx, search.lo, search.hi, search.nodes).value;
    const double min_y = minimize_on(Vy, search.lo, search.hi, search.nodes).value;
    auto sx = spectrum_1d(Vx, hbar, -1e300, E + hw - min_y, opt.margin_factor * hw, opt);
    auto sy = spectrum_1d(Vy, hbar, -1e300, E + hw - min_x, opt.margin_factor * hw, opt);
    if (warnings) {
        for (auto& w : sx.warnings) warnings->push_back("hbar = " + std::to_string(hbar) + " (x): " + w);
        for (auto& w : sy.warnings) warnings->push_back("hbar = " + std::to_string(hbar) + " (y): " + w);
    }
    return window(tensor_sum_spectrum(sx.eigenvalues, sy.eigenvalues, E, hw), E, c, delta, hbar);
}

inline DiffSpectrumReport diffspec_1d(const Polynomial& V, const std::vector<double>& hbars, double E,
                                      double c, double delta, ClusterOptions copt = {},
                                      const SpectrumOptions& sopt = {}) {
    std::vector<std::string> warnings;
    std::vector<SpectralWindow> wins;
    for (double h : hbars) wins.push_back(window_1d(V, h, E, c, delta, sopt, &warnings));
    // classical reference for the symbol p^2 + V
    std::optional<double> T;
    try {
        T = period_oracle_1d(V, 1.0, E, {-1e3, 1e3, 2000});
    } catch (const Error&) {
    }
    if (T && !copt.expected_spacing && !copt.range) copt.expected_spacing = 2.0 * std::numbers::pi / *T;
    auto rep = cluster_verdict(std::move(wins), copt);
    rep.oracle_T = T;
    rep.warnings.insert(rep.warnings.begin(), warnings.begin(), warnings.end());
    return rep;
}

inline DiffSpectrumReport diffspec_separable(const Polynomial& Vx, const Polynomial& Vy,
                                             const std::vector<double>& hbars, double E, double c,
                                             double delta, const ClusterOptions& copt = {},
                                             const SpectrumOptions& sopt = {}) {
    std::vector<std::string> warnings;
    std::vector<SpectralWindow> wins;
    for (double h : hbars) wins.push_back(window_separable(Vx, Vy, h, E, c, delta, sopt, &warnings));
    auto rep = cluster_verdict(std::move(wins), copt);
    rep.warnings.insert(rep.warnings.begin(), warnings.begin(), warnings.end());
    return rep;
}

struct BsLevel {
    double E;
    double S;
    /// S / (2 pi hbar) - 1/2
    double n_eff;
    long k_star;
    double residual;
};

struct BsGap {
    double E_mid;
    double gap;
    /// 2 pi hbar / T(E_mid)
    double expected;
    double ratio;
};

struct BsReport {
    double hbar = 0.0;
    std::vector<BsLevel> levels;
    std::vector<BsGap> gaps;
    double max_abs_residual = 0.0;
    double max_gap_deviation = 0.0;
};

/// Bohr-Sommerfeld check S(E_k) = 2 pi hbar (k + mu/4) with mu = 2 for a
/// 1D well, plus gap ratios against the classical period.
inline BsReport bohr_sommerfeld_residuals(const Polynomial& V, double c, double hbar,
                                          const SpectralWindow& win, const OracleOptions& oopt = {-1e3, 1e3, 2000}) {
    BsReport rep;
    rep.hbar = hbar;
    const double two_pi_h = 2.0 * std::numbers::pi * hbar;
    for (double E : win.eigenvalues) {
        double S = action_1d(V, c, E, oopt);
        double n = S / two_pi_h - 0.5;
        long k = std::lround(n);
        rep.levels.push_back({E, S, n, k, n - double(k)});
        rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(n - double(k)));
    }
    for (std::size_t i = 1; i < win.eigenvalues.size(); ++i) {
        double a = win.eigenvalues[i - 1], b = win.eigenvalues[i];
        double mid = 0.5 * (a + b);
        double expected = two_pi_h / period_oracle_1d(V, c, mid, oopt);
        BsGap g{mid, b - a, expected, (b - a) / expected};
        rep.gaps.push_back(g);
        rep.max_gap_deviation = std::max(rep.max_gap_deviation, std::abs(g.ratio - 1.0));
    }
    return rep;
}

}  // namespace isoperiod
