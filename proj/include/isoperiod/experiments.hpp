#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lotka_volterra.hpp"
#include "parallel.hpp"
#include "period.hpp"
#include "rng.hpp"
#include "semiclassical.hpp"
#include "serialization.hpp"
#include "survey.hpp"

#ifndef ISOPERIOD_VERSION
#define ISOPERIOD_VERSION "0.0.0"
#endif

namespace isoperiod {

inline constexpr int kSchemaVersion = 1;

enum class Protocol { survey, lv_hlevel, diffspec, bohr_sommerfeld };

inline const char* to_string(Protocol p) {
    switch (p) {
        case Protocol::survey: return "survey";
        case Protocol::lv_hlevel: return "lv-hlevel";
        case Protocol::diffspec: return "diffspec";
        default: return "bohr-sommerfeld";
    }
}

inline Protocol protocol_from_string(const std::string& s) {
    if (s == "survey") return Protocol::survey;
    if (s == "lv-hlevel") return Protocol::lv_hlevel;
    if (s == "diffspec") return Protocol::diffspec;
    if (s == "bohr-sommerfeld") return Protocol::bohr_sommerfeld;
    throw ConfigError("unknown protocol '" + s + "'");
}

struct ExperimentRecipe {
    std::string name;
    SystemSpec system;
    Protocol protocol;
    Json parameters;
    std::uint64_t seed = 0;
};

inline Json to_json(const ExperimentRecipe& r) {
    return {{"name", r.name},
            {"protocol", to_string(r.protocol)},
            {"seed", r.seed},
            {"system", to_json(r.system)},
            {"parameters", r.parameters}};
}

namespace detail {

struct ParamSchema {
    std::set<std::string> required;
    std::set<std::string> optional;
};

inline const ParamSchema& schema_for(Protocol p) {
    static const std::map<Protocol, ParamSchema> schemas = {
        {Protocol::survey,
         {{"energy", "count"}, {"h", "method", "tol_rel", "horizon", "return_tol", "min_perihelion"}}},
        {Protocol::lv_hlevel,
         {{"levels", "count"}, {"h", "drift_target", "max_halvings", "horizon", "return_tol"}}},
        {Protocol::diffspec,
         {{"hbars", "energy"},
          {"potential", "separable", "c", "delta", "bin_width", "persist_tol", "range", "k_delta"}}},
        {Protocol::bohr_sommerfeld, {{"potential", "hbar", "energy"}, {"c", "delta", "k_delta"}}},
    };
    return schemas.at(p);
}

inline double num(const Json& p, const char* key, double def) {
    return p.contains(key) ? p.at(key).get<double>() : def;
}

}  // namespace detail

/// Checks keys and value types against the protocol's schema.
inline void validate_recipe(const ExperimentRecipe& r) {
    if (r.name.empty()) throw ConfigError("recipe: empty name");
    if (!r.parameters.is_object()) throw ConfigError("recipe '" + r.name + "': parameters must be an object");
    const auto& s = detail::schema_for(r.protocol);
    for (const auto& key : s.required)
        if (!r.parameters.contains(key))
            throw ConfigError("recipe '" + r.name + "': missing parameter '" + key + "'");
    for (const auto& [key, value] : r.parameters.items()) {
        if (!s.required.count(key) && !s.optional.count(key))
            throw ConfigError("recipe '" + r.name + "': unknown parameter '" + key + "' for protocol " +
                              to_string(r.protocol));
        bool ok = true;
        if (key == "method" || key == "potential") ok = value.is_string();
        else if (key == "levels" || key == "hbars") ok = value.is_array() && !value.empty();
        else if (key == "separable") ok = value.is_array() && value.size() == 2;
        else if (key == "count" || key == "max_halvings") ok = value.is_number_integer() && value.get<long>() > 0;
        else ok = value.is_number();
        if (!ok) throw ConfigError("recipe '" + r.name + "': bad value for '" + key + "'");
    }
    if (r.protocol == Protocol::diffspec &&
        r.parameters.contains("potential") == r.parameters.contains("separable"))
        throw ConfigError("recipe '" + r.name + "': diffspec needs exactly one of potential / separable");
    if (r.protocol == Protocol::lv_hlevel && !r.system.as<LotkaVolterra>())
        throw ConfigError("recipe '" + r.name + "': lv-hlevel needs a lotka-volterra system");
}

/// x0 > 0 uniform on the simplex slice sum x = -H; the embedded state
/// (Q = 0, P = log x0) sits on the level H.
inline std::vector<Vec> lv_hlevel_sampler(const SystemSpec& sys, double H, int count, std::uint64_t seed) {
    require_lv(sys);
    if (!(H < 0.0))
        throw SurfaceUnreachable("lv-hlevel: H = " + std::to_string(H) +
                                 " unreachable from the positive cone (needs H < 0)");
    if (count < 1) throw ConfigError("lv-hlevel: count must be positive");
    const int n = sys.dof();
    std::vector<Vec> out;
    out.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) {
        Rng rng = Rng::for_item(seed, std::uint64_t(i));
        Vec e(n);
        for (int j = 0; j < n; ++j) {
            double u = rng.uniform();
            while (u <= 0.0) u = rng.uniform();
            e[j] = -std::log(u);
        }
        out.push_back((-H / e.sum()) * e);
    }
    return out;
}

struct LvSample {
    Vec x0;
    double H = 0.0;
    double h = 0.0;
    LvPeriodResult result;
    double period_rel_diff = 0.0;
    double time_average_error = 0.0;
    bool consistent = false;
};

struct LvSampleOptions {
    double h = 1e-3;
    double drift_target = 1e-8;
    int max_halvings = 6;
    double horizon = 0.0;
    double return_tol = 0.0;
    double period_tol_rel = 1e-6;
    double average_tol = 1e-6;
};

/// One LV sample: detect both periods, halving h until the energy drift
/// over the detection run meets drift_target (or max_halvings is spent).
inline LvSample run_lv_sample(const SystemSpec& sys, const Vec& x0, const LvSampleOptions& opt) {
    LvSample s;
    s.x0 = x0;
    const double horizon = opt.horizon > 0 ? opt.horizon : default_horizon(sys);
    const double tol = opt.return_tol > 0 ? opt.return_tol : default_return_tol(x0);
    StepperConfig cfg;
    cfg.method = Method::implicit_midpoint;
    cfg.h = opt.h;
    for (int k = 0;;) {
        s.result = detect_period_lv(sys, x0, cfg, horizon, tol);
        s.h = cfg.h;
        const double drift = s.result.energy_drift;
        if (drift <= opt.drift_target || k >= opt.max_halvings) break;
        // drift scales as h^2: jump to the predicted number of halvings
        int need = std::isfinite(drift) && drift > 0
                       ? std::max(1, int(std::ceil(0.5 * std::log2(drift / opt.drift_target))))
                       : 1;
        need = std::min(need, opt.max_halvings - k);
        cfg.h = std::ldexp(cfg.h, -need);
        k += need;
    }
    s.H = s.result.energy;
    const auto& r = s.result;
    if (r.x_space.T && r.drift_removed.T) {
        s.period_rel_diff = std::abs(*r.x_space.T - *r.drift_removed.T) / *r.x_space.T;
        s.time_average_error = (r.time_average - r.equilibrium).cwiseAbs().maxCoeff();
        s.consistent = r.energy_drift < opt.drift_target && s.period_rel_diff <= opt.period_tol_rel &&
                       s.time_average_error <= opt.average_tol;
    } else {
        s.period_rel_diff = s.time_average_error = std::numeric_limits<double>::infinity();
    }
    return s;
}

struct RecipeResult {
    Json report;
    /// Protocol-specific summary table.
    std::string summary_csv;
    std::string verdict;
    /// Extra artifacts (diffspec): histogram CSV.
    std::string histogram_csv;
};

namespace detail {

inline RecipeResult run_survey(const ExperimentRecipe& r, int workers) {
    const Json& p = r.parameters;
    SurveyOptions opt;
    opt.stepper.h = num(p, "h", 1e-3);
    if (p.contains("method"))
        opt.stepper.method = p.at("method") == "implicit-midpoint" ? Method::implicit_midpoint : Method::verlet;
    opt.tol_rel = num(p, "tol_rel", 1e-6);
    opt.horizon = num(p, "horizon", 0.0);
    opt.return_tol = num(p, "return_tol", 0.0);
    opt.sampler.kepler_min_perihelion = num(p, "min_perihelion", 0.1);
    opt.workers = workers;
    const double E = p.at("energy").get<double>();
    auto rep = survey_periods(r.system, E, p.at("count").get<int>(), r.seed, opt);

    RecipeResult out;
    out.verdict = to_string(rep.verdict);
    out.report["tolerances"] = {{"tol_rel", opt.tol_rel},
                                {"return_tol", opt.return_tol > 0 ? Json(opt.return_tol) : Json("1e-6*(|pt0|+1)")},
                                {"newton_tol", opt.stepper.newton_tol},
                                {"h", opt.stepper.h},
                                {"method", to_string(opt.stepper.method)},
                                {"horizon", opt.horizon > 0 ? opt.horizon : default_horizon(r.system, E)}};
    out.report["result"] = to_json(rep);
    if (auto T = characteristic_period(r.system, E)) out.report["result"]["oracle_T"] = *T;
    std::ostringstream csv;
    write_survey_csv(csv, rep);
    out.summary_csv = csv.str();
    return out;
}

inline RecipeResult run_lv_hlevel(const ExperimentRecipe& r, int workers) {
    const Json& p = r.parameters;
    LvSampleOptions opt;
    opt.h = num(p, "h", 1e-3);
    opt.drift_target = num(p, "drift_target", 1e-8);
    opt.max_halvings = int(num(p, "max_halvings", 6));
    opt.horizon = num(p, "horizon", 0.0);
    opt.return_tol = num(p, "return_tol", 0.0);
    const int count = p.at("count").get<int>();
    const int n = r.system.dof();

    struct Job {
        double H;
        Vec x0;
    };
    std::vector<Job> jobs;
    std::vector<double> levels;
    for (std::size_t li = 0; li < p.at("levels").size(); ++li) {
        double H = p.at("levels")[li].get<double>();
        levels.push_back(H);
        // one stream per level so levels can be added without shifting others
        for (auto& x : lv_hlevel_sampler(r.system, H, count, r.seed + 1000003ull * li)) jobs.push_back({H, x});
    }
    std::vector<LvSample> res(jobs.size());
    parallel_for(jobs.size(), resolve_workers(workers),
                 [&](std::size_t i) { res[i] = run_lv_sample(r.system, jobs[i].x0, opt); });

    Json per_level = Json::array();
    std::ostringstream csv;
    csv << "H,sample";
    for (int j = 1; j <= n; ++j) csv << ",x" << j;
    csv << ",T,T_drift_removed,energy_drift,h,consistent\n";
    bool all_consistent = true;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        Json samples = Json::array();
        double tmin = INFINITY, tmax = -INFINITY;
        int consistent = 0;
        for (int k = 0; k < count; ++k) {
            const auto& s = res[li * std::size_t(count) + std::size_t(k)];
            samples.push_back({{"sample", k},
                               {"x0", vec_json(s.x0)},
                               {"H", s.H},
                               {"h", s.h},
                               {"period", to_json(s.result)},
                               {"period_rel_diff", s.period_rel_diff},
                               {"time_average_error", s.time_average_error},
                               {"consistent", s.consistent}});
            if (s.result.x_space.T) {
                tmin = std::min(tmin, *s.result.x_space.T);
                tmax = std::max(tmax, *s.result.x_space.T);
            }
            consistent += s.consistent;
            all_consistent = all_consistent && s.consistent;
            csv << fmt17(levels[li]) << ',' << k;
            for (int j = 0; j < n; ++j) csv << ',' << fmt17(s.x0[j]);
            auto T = s.result.x_space.T, Td = s.result.drift_removed.T;
            csv << ',' << (T ? fmt17(*T) : "") << ',' << (Td ? fmt17(*Td) : "") << ','
                << fmt17(s.result.energy_drift) << ',' << fmt17(s.h) << ',' << (s.consistent ? 1 : 0) << '\n';
        }
        per_level.push_back({{"H", levels[li]},
                             {"samples", samples},
                             {"T_min", std::isfinite(tmin) ? Json(tmin) : Json(nullptr)},
                             {"T_max", std::isfinite(tmax) ? Json(tmax) : Json(nullptr)},
                             {"T_spread_rel", std::isfinite(tmin) ? Json((tmax - tmin) / tmin) : Json(nullptr)},
                             {"consistent_samples", consistent}});
    }
    RecipeResult out;
    // exploratory: no verdict on T-vs-H constancy, only internal consistency
    out.verdict = all_consistent ? "CONSISTENT" : "INCONSISTENT";
    out.report["tolerances"] = {{"drift_target", opt.drift_target},
                                {"period_tol_rel", opt.period_tol_rel},
                                {"average_tol", opt.average_tol},
                                {"return_tol", opt.return_tol > 0 ? Json(opt.return_tol) : Json("1e-6*(|x0|+1)")},
                                {"h", opt.h},
                                {"max_halvings", opt.max_halvings}};
    out.report["result"] = {{"gate", "none: T-vs-H scatter is exploratory"},
                            {"all_consistent", all_consistent},
                            {"levels", per_level}};
    out.summary_csv = csv.str();
    return out;
}

inline RecipeResult run_diffspec(const ExperimentRecipe& r, int workers) {
    const Json& p = r.parameters;
    std::vector<double> hbars = p.at("hbars").get<std::vector<double>>();
    const double E = p.at("energy").get<double>();
    const double c = num(p, "c", 1.0), delta = num(p, "delta", 0.45);
    ClusterOptions copt;
    copt.bin_width = num(p, "bin_width", 0.1);
    if (p.contains("persist_tol")) copt.persist_tol = p.at("persist_tol").get<double>();
    if (p.contains("range")) copt.range = p.at("range").get<double>();
    SpectrumOptions sopt;
    sopt.grid.k_delta = num(p, "k_delta", sopt.grid.k_delta);
    sopt.grid.workers = workers;
    DiffSpectrumReport rep;
    if (p.contains("potential")) {
        rep = diffspec_1d(Polynomial::parse(p.at("potential").get<std::string>()), hbars, E, c, delta, copt, sopt);
    } else {
        auto Vx = Polynomial::parse(p.at("separable")[0].get<std::string>());
        auto Vy = Polynomial::parse(p.at("separable")[1].get<std::string>());
        rep = diffspec_separable(Vx, Vy, hbars, E, c, delta, copt, sopt);
    }
    RecipeResult out;
    out.verdict = to_string(rep.verdict);
    out.report["tolerances"] = {{"bin_width", rep.bin_width},
                                {"persist_tol", rep.persist_tol},
                                {"range", rep.range},
                                {"lattice_rel_tol", copt.lattice_rel_tol},
                                {"fill_threshold", copt.fill_threshold},
                                {"c", c},
                                {"delta", delta},
                                {"k_delta", sopt.grid.k_delta}};
    out.report["result"] = to_json(rep);
    std::ostringstream csv;
    write_histogram_csv(csv, rep);
    out.summary_csv = csv.str();
    out.histogram_csv = out.summary_csv;
    return out;
}

inline RecipeResult run_bohr_sommerfeld(const ExperimentRecipe& r, int workers) {
    const Json& p = r.parameters;
    auto V = Polynomial::parse(p.at("potential").get<std::string>());
    const double hbar = p.at("hbar").get<double>(), E = p.at("energy").get<double>();
    const double c = num(p, "c", 1.0), delta = num(p, "delta", 0.45);
    SpectrumOptions sopt;
    sopt.grid.k_delta = num(p, "k_delta", sopt.grid.k_delta);
    sopt.grid.workers = workers;
    std::vector<std::string> warnings;
    auto win = window_1d(V, hbar, E, c, delta, sopt, &warnings);
    auto bs = bohr_sommerfeld_residuals(V, 1.0, hbar, win);
    const double res_tol = 0.05, gap_tol = 0.02;
    const bool pass = !win.empty() && bs.max_abs_residual <= res_tol && bs.max_gap_deviation <= gap_tol;
    RecipeResult out;
    out.verdict = pass ? "PASS" : "FAIL";
    out.report["tolerances"] = {{"residual_tol", res_tol}, {"gap_tol", gap_tol}, {"c", c}, {"delta", delta},
                                {"k_delta", sopt.grid.k_delta}};
    out.report["result"] = to_json(bs);
    out.report["result"]["warnings"] = warnings;
    std::ostringstream csv;
    write_bs_csv(csv, bs);
    out.summary_csv = csv.str();
    return out;
}

}  // namespace detail

/// Executes a recipe. The report carries the full recipe, tool version and
/// tolerances, and no timestamps or worker counts, so reruns with the same
/// seed are byte-identical.
inline RecipeResult run_recipe(const ExperimentRecipe& r, int workers = 0) {
    validate_recipe(r);
    RecipeResult out;
    try {
        switch (r.protocol) {
            case Protocol::survey: out = detail::run_survey(r, workers); break;
            case Protocol::lv_hlevel: out = detail::run_lv_hlevel(r, workers); break;
            case Protocol::diffspec: out = detail::run_diffspec(r, workers); break;
            case Protocol::bohr_sommerfeld: out = detail::run_bohr_sommerfeld(r, workers); break;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("recipe '" + r.name + "': " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError("recipe '" + r.name + "': " + e.what());
    } catch (const Error& e) {
        throw Error("recipe '" + r.name + "': " + e.what());
    }
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["tool"] = {{"name", "isoperiod"}, {"version", ISOPERIOD_VERSION}};
    doc["recipe"] = to_json(r);
    doc["tolerances"] = out.report["tolerances"];
    doc["verdict"] = out.verdict;
    doc["result"] = out.report["result"];
    out.report = std::move(doc);
    return out;
}

inline ExperimentRecipe recipe_from_json(const Json& j) {
    try {
        ExperimentRecipe r{j.at("name").get<std::string>(), system_from_json(j.at("system")),
                           protocol_from_string(j.at("protocol").get<std::string>()),
                           j.contains("parameters") ? j.at("parameters") : Json::object(),
                           j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0};
        validate_recipe(r);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("recipe json: ") + e.what());
    }
}

inline std::vector<std::string> builtin_recipe_names() {
    return {"ho-survey", "kepler-iso-energy", "anisotropic-survey", "lv-hlevel",
            "diffspec-lattice", "diffspec-dense", "bohr-sommerfeld-x4"};
}

inline ExperimentRecipe builtin_recipe(const std::string& name, std::uint64_t seed = 7) {
    if (name == "ho-survey")
        return {name, SystemSpec::harmonic_oscillator(1, 1, 2), Protocol::survey,
                Json{{"energy", 1.0}, {"count", 64}, {"h", 1e-3}, {"tol_rel", 1e-6}}, seed};
    if (name == "kepler-iso-energy")
        // perihelion >= 0.2 a keeps eccentricities in [0, 0.8]
        return {name, SystemSpec::kepler(1, 1, 1), Protocol::survey,
                Json{{"energy", -0.5}, {"count", 16}, {"h", 2e-5}, {"tol_rel", 1e-6}, {"min_perihelion", 0.2}},
                seed};
    if (name == "anisotropic-survey")
        return {name, SystemSpec::anisotropic_oscillator(1, std::numbers::sqrt2), Protocol::survey,
                Json{{"energy", 1.0}, {"count", 8}, {"h", 1e-3}, {"tol_rel", 1e-6}}, seed};
    if (name == "lv-hlevel") {
        Vec eps(2);
        eps << 1, -1;
        Mat A(2, 2);
        A << 0, -1, 1, 0;
        return {name, SystemSpec::lotka_volterra(eps, A), Protocol::lv_hlevel,
                Json{{"levels", {-2.5, -3.0, -4.0}}, {"count", 20}, {"h", 1e-3}, {"drift_target", 1e-8}},
                seed};
    }
    if (name == "diffspec-lattice")
        return {name, SystemSpec::potential_1d(Polynomial::parse("x^2"), 1, -10, 10), Protocol::diffspec,
                Json{{"potential", "x^2"}, {"hbars", {0.1, 0.05, 0.02}}, {"energy", 1.0}, {"c", 1.0},
                     {"delta", 0.25}},
                seed};
    if (name == "diffspec-dense")
        // classical counterpart of p^2 + x^2 + 2y^2 up to a time rescaling
        return {name, SystemSpec::anisotropic_oscillator(1, std::numbers::sqrt2), Protocol::diffspec,
                Json{{"separable", {"x^2", "2y^2"}}, {"hbars", {0.05, 0.02, 0.01}}, {"energy", 5.0},
                     {"c", 1.0}, {"delta", 0.45}, {"bin_width", 0.1}, {"range", 10.0}},
                seed};
    if (name == "bohr-sommerfeld-x4")
        return {name, SystemSpec::potential_1d(Polynomial::parse("x^4"), 1, -10, 10), Protocol::bohr_sommerfeld,
                Json{{"potential", "x^4"}, {"hbar", 0.02}, {"energy", 1.0}, {"c", 1.0}, {"delta", 0.45}}, seed};
    throw ConfigError("unknown builtin recipe '" + name + "'");
}

}  // namespace isoperiod
