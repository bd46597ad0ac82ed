#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "period.hpp"
#include "semiclassical.hpp"
#include "survey.hpp"
#include "systems.hpp"

namespace isoperiod {

using Json = nlohmann::ordered_json;

inline Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Vec json_vec(const Json& j) {
    if (!j.is_array()) throw ConfigError("expected a numeric array");
    Vec v(Eigen::Index(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[Eigen::Index(i)] = j[i].get<double>();
    return v;
}

inline Json mat_json(const Mat& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        a.push_back(std::move(row));
    }
    return a;
}

inline Mat json_mat(const Json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("expected a matrix (array of rows)");
    const std::size_t n = j.size(), m = j[0].size();
    Mat A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i) {
        if (j[i].size() != m) throw ConfigError("ragged matrix");
        for (std::size_t k = 0; k < m; ++k) A(Eigen::Index(i), Eigen::Index(k)) = j[i][k].get<double>();
    }
    return A;
}

inline Json to_json(const SystemSpec& sys) {
    Json params = std::visit(
        [](const auto& s) -> Json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, HarmonicOscillator>) {
                return {{"m", s.m}, {"k", s.k}, {"dof", s.dof}};
            } else if constexpr (std::is_same_v<T, Kepler>) {
                return {{"G", s.G}, {"M", s.central_mass}, {"m", s.mass}, {"dim", s.dim}, {"r_min", s.r_min}};
            } else if constexpr (std::is_same_v<T, LotkaVolterra>) {
                return {{"eps", vec_json(s.eps)}, {"A", mat_json(s.A)}};
            } else if constexpr (std::is_same_v<T, Potential1D>) {
                return {{"V", s.V.to_string()}, {"kinetic", s.kinetic}, {"lo", s.lo}, {"hi", s.hi}};
            } else {
                return {{"omega1", s.omega1}, {"omega2", s.omega2}};
            }
        },
        sys.kind());
    return {{"kind", sys.kind_name()}, {"params", params}, {"convention", to_string(sys.convention())}};
}

inline SystemSpec system_from_json(const Json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        const Json& p = j.contains("params") ? j.at("params") : Json::object();
        auto num = [&](const char* key, double def) { return p.contains(key) ? p.at(key).get<double>() : def; };
        if (kind == "harmonic-oscillator")
            return SystemSpec::harmonic_oscillator(num("m", 1), num("k", 1), int(num("dof", 1)));
        if (kind == "kepler")
            return SystemSpec::kepler(num("G", 1), num("M", 1), num("m", 1), int(num("dim", 3)), num("r_min", 1e-3));
        if (kind == "lotka-volterra") {
            Convention c = Convention::paper_lv;
            if (j.contains("convention")) {
                auto s = j.at("convention").get<std::string>();
                if (s == "canonical") c = Convention::canonical;
                else if (s != "paper-lv") throw ConfigError("unknown convention '" + s + "'");
            }
            return SystemSpec::lotka_volterra(json_vec(p.at("eps")), json_mat(p.at("A")), c);
        }
        if (kind == "potential-1d")
            return SystemSpec::potential_1d(Polynomial::parse(p.at("V").get<std::string>()), num("kinetic", 1),
                                            num("lo", -10), num("hi", 10));
        if (kind == "anisotropic-oscillator-2d")
            return SystemSpec::anisotropic_oscillator(num("omega1", 1), num("omega2", std::numbers::sqrt2));
        throw ConfigError("unknown system kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("system json: ") + e.what());
    }
}

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const PeriodEstimate& e) {
    return {{"verdict", to_string(e.verdict)},
            {"T", optional_json(e.T)},
            {"residual", e.residual},
            {"returns_used", e.returns_used},
            {"confirmed", e.confirmed},
            {"note", e.note}};
}

inline Json to_json(const SurveyReport& r) {
    Json samples = Json::array();
    for (std::size_t i = 0; i < r.results.size(); ++i) {
        const auto& s = r.results[i];
        Json one = to_json(s.estimate);
        one["sample"] = i;
        one["q"] = vec_json(s.start.q);
        one["p"] = vec_json(s.start.p);
        samples.push_back(std::move(one));
    }
    Json verdicts = Json::object();
    for (const auto& [k, v] : r.verdicts) verdicts[k] = v;
    return {{"E", r.E},
            {"samples", r.samples},
            {"tol_rel", r.tol_rel},
            {"verdict", to_string(r.verdict)},
            {"T_min", r.T_min},
            {"T_max", r.T_max},
            {"T_mean", r.T_mean},
            {"spread_rel", r.spread_rel},
            {"verdicts", verdicts},
            {"excluded_degenerate", r.excluded_degenerate},
            {"periods", r.periods},
            {"results", samples}};
}

inline void write_survey_csv(std::ostream& os, const SurveyReport& r) {
    os << "sample,verdict,T,residual\n";
    for (std::size_t i = 0; i < r.results.size(); ++i) {
        const auto& e = r.results[i].estimate;
        os << i << ',' << to_string(e.verdict) << ',' << (e.T ? fmt17(*e.T) : "") << ',' << fmt17(e.residual)
           << '\n';
    }
}

inline Json to_json(const LvPeriodResult& r) {
    return {{"energy", r.energy},
            {"equilibrium", vec_json(r.equilibrium)},
            {"x_space", to_json(r.x_space)},
            {"drift_removed", to_json(r.drift_removed)},
            {"time_average", r.time_average.size() ? vec_json(r.time_average) : Json(nullptr)},
            {"energy_drift", r.energy_drift}};
}

inline Json to_json(const DiffSpectrumReport& r) {
    Json per = Json::array();
    for (const auto& h : r.per_hbar) {
        per.push_back({{"hbar", h.hbar},
                       {"window_half_width", h.window.half_width()},
                       {"window", h.window.eigenvalues},
                       {"differences", h.diffs.size()},
                       {"fill_fraction", h.fill_fraction},
                       {"histogram", h.histogram}});
    }
    return {{"hbars", r.hbars},
            {"bin_width", r.bin_width},
            {"persist_tol", r.persist_tol},
            {"range", r.range},
            {"verdict", to_string(r.verdict)},
            {"fitted_spacing", optional_json(r.fitted_spacing)},
            {"T_hat", optional_json(r.T_hat)},
            {"fit_residual", r.fit_residual},
            {"fill_fraction", r.fill_fraction},
            {"oracle_T", optional_json(r.oracle_T)},
            {"cluster_points", r.cluster_points},
            {"warnings", r.warnings},
            {"per_hbar", per}};
}

inline void write_histogram_csv(std::ostream& os, const DiffSpectrumReport& r) {
    os << "hbar,bin_center,count\n";
    for (const auto& h : r.per_hbar)
        for (std::size_t b = 0; b < h.histogram.size(); ++b)
            os << fmt17(h.hbar) << ',' << fmt17((double(b) + 0.5) * r.bin_width) << ',' << h.histogram[b] << '\n';
}

/// Matplotlib script that stacks the difference histograms by hbar.
inline std::string histogram_plot_script(const std::string& csv_name, const std::string& png_name) {
    return "import csv\n"
           "from collections import defaultdict\n"
           "import matplotlib\n"
           "matplotlib.use('Agg')\n"
           "import matplotlib.pyplot as plt\n\n"
           "rows = defaultdict(list)\n"
           "with open('" + csv_name + "') as f:\n"
           "    for r in csv.DictReader(f):\n"
           "        rows[float(r['hbar'])].append((float(r['bin_center']), int(r['count'])))\n"
           "hbars = sorted(rows, reverse=True)\n"
           "fig, axes = plt.subplots(len(hbars), 1, sharex=True, figsize=(7, 2.2 * len(hbars)), squeeze=False)\n"
           "for ax, h in zip(axes[:, 0], hbars):\n"
           "    xs, ys = zip(*rows[h])\n"
           "    width = xs[1] - xs[0] if len(xs) > 1 else 0.1\n"
           "    ax.bar(xs, ys, width=width)\n"
           "    ax.set_ylabel(f'hbar={h:g}')\n"
           "axes[-1, 0].set_xlabel('(E_k - E_l) / hbar')\n"
           "fig.tight_layout()\n"
           "fig.savefig('" + png_name + "', dpi=120)\n";
}

inline Json to_json(const BsReport& r) {
    Json levels = Json::array(), gaps = Json::array();
    for (const auto& l : r.levels)
        levels.push_back({{"E", l.E}, {"S", l.S}, {"n_eff", l.n_eff}, {"k_star", l.k_star}, {"residual", l.residual}});
    for (const auto& g : r.gaps)
        gaps.push_back({{"E_mid", g.E_mid}, {"gap", g.gap}, {"expected", g.expected}, {"ratio", g.ratio}});
    return {{"hbar", r.hbar},
            {"maslov_index", 2},
            {"max_abs_residual", r.max_abs_residual},
            {"max_gap_deviation", r.max_gap_deviation},
            {"levels", levels},
            {"gaps", gaps}};
}

inline void write_bs_csv(std::ostream& os, const BsReport& r) {
    os << "E,S,n_eff,k_star,residual\n";
    for (const auto& l : r.levels)
        os << fmt17(l.E) << ',' << fmt17(l.S) << ',' << fmt17(l.n_eff) << ',' << l.k_star << ','
           << fmt17(l.residual) << '\n';
}

}  // namespace isoperiod
