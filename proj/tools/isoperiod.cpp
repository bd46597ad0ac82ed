// isoperiod command-line front end.
//
// Exit codes: 0 success, 1 runtime error, 2 verdict differs from --expect,
// 64 malformed flags.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <isoperiod/isoperiod.hpp>

namespace fs = std::filesystem;
using namespace isoperiod;

namespace {

constexpr int kExitError = 1;
constexpr int kExitVerdict = 2;
constexpr int kExitUsage = 64;

/// JSON config files: flat {"command": "survey", "energy": 1, ...} or
/// sectioned {"survey": {...}}. Arrays become comma-separated lists.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        Json j = Json::object();
        for (const CLI::Option* opt : app->get_options({})) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            const std::string name = opt->get_lnames()[0];
            if (opt->count() > 0) j[name] = opt->as<std::string>();
            else if (default_also && !opt->get_default_str().empty()) j[name] = opt->get_default_str();
        }
        return j.dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        Json j;
        try {
            j = Json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config: top level must be an object");
        std::vector<CLI::ConfigItem> items;
        std::vector<std::string> parents;
        if (j.contains("command")) {
            parents.push_back(j.at("command").get<std::string>());
            items.push_back({parents, "++", {}});
        }
        emit(j, parents, items);
        if (!parents.empty()) items.push_back({parents, "--", {}});
        return items;
    }

private:
    static std::string scalar(const Json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_array()) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + scalar(v[i]);
            return s;
        }
        return v.dump();
    }

    static void emit(const Json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : j.items()) {
            if (key == "command" && parents.size() <= 1) continue;
            if (value.is_object()) {
                auto sub = parents;
                sub.push_back(key);
                items.push_back({sub, "++", {}});
                emit(value, sub, items);
                items.push_back({sub, "--", {}});
            } else {
                items.push_back({parents, key, {scalar(value)}});
            }
        }
    }
};

struct Options {
    // system
    std::string system = "ho";
    double m = 1.0, k = 1.0;
    int dof = 1;
    double G = 1.0, M = 1.0;
    int dim = 3;
    double r_min = 1e-3;
    std::string eps = "1,-1";
    std::string A = "0,-1;1,0";
    std::string convention = "paper-lv";
    std::string potential = "x^2";
    double kinetic = 1.0, lo = -10.0, hi = 10.0;
    double omega1 = 1.0, omega2 = std::numbers::sqrt2;
    // start point
    std::string q0, p0, x0;
    // integration and detection
    double h = 1e-3;
    std::string method = "auto";
    double t_max = 10.0;
    int stride = 1;
    double horizon = 0.0;
    double return_tol = 0.0;
    double tol_rel = 1e-6;
    double newton_tol = 1e-14;
    // survey
    double energy = 1.0;
    int count = 16;
    std::uint64_t seed = 7;
    int workers = 0;
    double min_perihelion = 0.1;
    // semiclassical
    std::string hbars = "0.1,0.05,0.02";
    double hbar = 0.1;
    double c = 1.0;
    double delta = 0.45;
    double bin_width = 0.1;
    double persist_tol = 0.0;
    double range = 0.0;
    double L = 0.0;
    int N = 0;
    double k_delta = 0.08;
    std::string separable;
    // output
    std::string expect;
    std::string format;
    std::string output;
    bool emit_plot = false;
    std::string out_dir = ".";
    std::string recipe;
    std::string recipe_file;
    bool list = false;
};

const CLI::Validator kOpenHalf(
    [](std::string& s) -> std::string {
        try {
            double d = parse_double(s);
            if (d > 0.0 && d < 0.5) return {};
        } catch (const Error&) {
        }
        return "delta must lie in the open interval (0, 1/2)";
    },
    "(0,1/2)");

const CLI::Validator kDecreasingList(
    [](std::string& s) -> std::string {
        try {
            auto v = parse_list(s);
            if (v.empty()) return "empty hbar schedule";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!(v[i] > 0)) return "hbar values must be positive";
                if (i > 0 && !(v[i] < v[i - 1])) return "hbar schedule must be strictly decreasing";
            }
            return {};
        } catch (const Error& e) {
            return e.what();
        }
    },
    "DECREASING LIST");

void add_system_flags(CLI::App* cmd, Options& o) {
    const char* g = "System";
    cmd->add_option("--system", o.system, "ho | kepler | lv | potential | anisotropic")
        ->check(CLI::IsMember({"ho", "kepler", "lv", "potential", "anisotropic"}))
        ->group(g);
    cmd->add_option("--m", o.m, "mass (ho, kepler orbiting body)")->group(g);
    cmd->add_option("--k", o.k, "spring constant (ho)")->group(g);
    cmd->add_option("--dof", o.dof, "degrees of freedom (ho)")->group(g);
    cmd->add_option("--G", o.G, "gravitational constant (kepler)")->group(g);
    cmd->add_option("--M", o.M, "central mass (kepler)")->group(g);
    cmd->add_option("--dim", o.dim, "spatial dimension 2 or 3 (kepler)")->group(g);
    cmd->add_option("--r-min", o.r_min, "collision radius (kepler)")->group(g);
    cmd->add_option("--eps", o.eps, "growth rates, comma separated (lv)")->group(g);
    cmd->add_option("--A", o.A, "skew-symmetric matrix, rows separated by ';' (lv)")->group(g);
    cmd->add_option("--convention", o.convention, "paper-lv | canonical (lv)")
        ->check(CLI::IsMember({"paper-lv", "canonical"}))
        ->group(g);
    cmd->add_option("--potential", o.potential, "polynomial V(x) (potential)")->group(g);
    cmd->add_option("--kinetic", o.kinetic, "H = kinetic*p^2 + V (potential)")->group(g);
    cmd->add_option("--lo", o.lo, "sampling interval low end (potential)")->group(g);
    cmd->add_option("--hi", o.hi, "sampling interval high end (potential)")->group(g);
    cmd->add_option("--omega1", o.omega1, "first frequency (anisotropic)")->group(g);
    cmd->add_option("--omega2", o.omega2, "second frequency (anisotropic)")->group(g);
}

void add_stepper_flags(CLI::App* cmd, Options& o) {
    const char* g = "Integration";
    cmd->add_option("--h", o.h, "step size")->check(CLI::PositiveNumber)->group(g);
    cmd->add_option("--method", o.method, "auto | verlet | implicit-midpoint")
        ->check(CLI::IsMember({"auto", "verlet", "implicit-midpoint"}))
        ->group(g);
    cmd->add_option("--newton-tol", o.newton_tol, "implicit-midpoint Newton tolerance")->group(g);
}

void add_start_flags(CLI::App* cmd, Options& o) {
    const char* g = "Start point";
    cmd->add_option("--q0", o.q0, "initial positions, comma separated")->group(g);
    cmd->add_option("--p0", o.p0, "initial momenta, comma separated")->group(g);
    cmd->add_option("--x0", o.x0, "initial populations (lv)")->group(g);
}

void add_detect_flags(CLI::App* cmd, Options& o) {
    const char* g = "Period detection";
    cmd->add_option("--horizon", o.horizon, "time horizon; 0 = 50 x linearized period")->group(g);
    cmd->add_option("--return-tol", o.return_tol, "return tolerance; 0 = 1e-6*(|pt0|+1)")->group(g);
}

void add_window_flags(CLI::App* cmd, Options& o) {
    const char* g = "Spectral window";
    cmd->add_option("--energy", o.energy, "window center E")->group(g);
    cmd->add_option("--c", o.c, "window constant: |E - E_k| < c hbar^(1-delta)")
        ->check(CLI::PositiveNumber)
        ->group(g);
    cmd->add_option("--delta", o.delta, "window exponent in (0, 1/2)")->check(kOpenHalf)->group(g);
    cmd->add_option("--L", o.L, "box half-width; 0 = automatic")->group(g);
    cmd->add_option("--N", o.N, "interior grid points; 0 = automatic")->group(g);
    cmd->add_option("--k-delta", o.k_delta, "automatic grid: max wavenumber x spacing")
        ->check(CLI::PositiveNumber)
        ->group(g);
}

void add_output_flags(CLI::App* cmd, Options& o, const std::string& formats) {
    const char* g = "Output";
    cmd->add_option("--format", o.format, formats)->check(CLI::IsMember({"csv", "json"}))->group(g);
    cmd->add_option("--output", o.output, "output file; default stdout or none")->group(g);
    cmd->add_option("--workers", o.workers, "worker threads; 0 = all cores (capped by ISOPERIOD_THREADS)")
        ->group(g);
}

Vec vec_from(const std::string& s) {
    auto v = parse_list(s);
    Vec out(Eigen::Index(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[Eigen::Index(i)] = v[i];
    return out;
}

Mat mat_from(const std::string& s) {
    auto rows = split(s, ';');
    std::vector<std::vector<double>> r;
    for (auto& row : rows) r.push_back(parse_list(row));
    Mat A(Eigen::Index(r.size()), Eigen::Index(r.empty() ? 0 : r[0].size()));
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i].size() != r[0].size()) throw ConfigError("--A: ragged matrix");
        for (std::size_t j = 0; j < r[i].size(); ++j) A(Eigen::Index(i), Eigen::Index(j)) = r[i][j];
    }
    return A;
}

SystemSpec build_system(const Options& o) {
    if (o.system == "ho") return SystemSpec::harmonic_oscillator(o.m, o.k, o.dof);
    if (o.system == "kepler") return SystemSpec::kepler(o.G, o.M, o.m, o.dim, o.r_min);
    if (o.system == "lv")
        return SystemSpec::lotka_volterra(vec_from(o.eps), mat_from(o.A),
                                          o.convention == "canonical" ? Convention::canonical
                                                                      : Convention::paper_lv);
    if (o.system == "potential")
        return SystemSpec::potential_1d(Polynomial::parse(o.potential), o.kinetic, o.lo, o.hi);
    return SystemSpec::anisotropic_oscillator(o.omega1, o.omega2);
}

StepperConfig build_stepper(const Options& o, const SystemSpec& sys) {
    StepperConfig cfg;
    cfg.h = o.h;
    cfg.newton_tol = o.newton_tol;
    if (o.method == "verlet") cfg.method = Method::verlet;
    else if (o.method == "implicit-midpoint") cfg.method = Method::implicit_midpoint;
    else cfg.method = sys.separable() ? Method::verlet : Method::implicit_midpoint;
    cfg.validate();
    return cfg;
}

PhasePoint build_start(const Options& o, const SystemSpec& sys) {
    if (!o.x0.empty()) return lv_embed(vec_from(o.x0), sys).point();
    if (o.q0.empty() || o.p0.empty()) throw ConfigError("start point needs --q0 and --p0 (or --x0 for lv)");
    return PhasePoint(vec_from(o.q0), vec_from(o.p0));
}

/// Writes to --output, or stdout when it is empty.
void emit(const Options& o, const std::string& text) {
    if (o.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.output, std::ios::binary);
    if (!f) throw Error("cannot write " + o.output);
    f << text;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
}

std::string lower(std::string s) {
    for (auto& ch : s) ch = char(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

/// 0 when no expectation or it matches, else the verdict exit code.
int check_expect(const Options& o, const std::string& verdict) {
    if (o.expect.empty() || lower(o.expect) == lower(verdict)) return 0;
    std::cerr << "verdict " << verdict << " differs from expected " << o.expect << "\n";
    return kExitVerdict;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

int cmd_integrate(const Options& o) {
    auto sys = build_system(o);
    auto cfg = build_stepper(o, sys);
    auto traj = integrate(sys, build_start(o, sys), cfg, o.t_max, {}, o.stride);
    if (o.format == "json") {
        Json j = {{"system", to_json(sys)}, {"method", to_string(cfg.method)}, {"h", cfg.h},
                  {"energy0", traj.energy0}, {"max_drift", traj.max_drift}, {"exit_reason", traj.exit_reason},
                  {"t", traj.times}};
        Json states = Json::array();
        for (const auto& s : traj.states) states.push_back({{"q", vec_json(s.q)}, {"p", vec_json(s.p)}});
        j["states"] = states;
        emit(o, j.dump(2) + "\n");
    } else {
        std::ostringstream os;
        write_trajectory_csv(os, sys, traj);
        emit(o, os.str());
    }
    if (!o.output.empty())
        std::cout << "steps=" << traj.size() << " max_drift=" << fmt("%.3g", traj.max_drift)
                  << (traj.truncated() ? " truncated: " + traj.exit_reason : std::string()) << "\n";
    return 0;
}

int cmd_period(const Options& o) {
    auto sys = build_system(o);
    auto cfg = build_stepper(o, sys);
    Json j;
    std::string verdict;
    if (sys.as<LotkaVolterra>() && !o.x0.empty() && sys.convention() == Convention::paper_lv) {
        Vec x0 = vec_from(o.x0);
        double horizon = o.horizon > 0 ? o.horizon : default_horizon(sys);
        double tol = o.return_tol > 0 ? o.return_tol : default_return_tol(x0);
        auto r = detect_period_lv(sys, x0, cfg, horizon, tol);
        j = to_json(r);
        verdict = to_string(r.x_space.verdict);
        std::cout << "verdict=" << verdict;
        if (r.x_space.T) std::cout << " T=" << fmt("%.10g", *r.x_space.T);
        if (r.drift_removed.T) std::cout << " T_drift_removed=" << fmt("%.10g", *r.drift_removed.T);
        std::cout << " energy_drift=" << fmt("%.3g", r.energy_drift) << "\n";
    } else {
        auto pt = build_start(o, sys);
        double horizon = o.horizon > 0 ? o.horizon : default_horizon(sys, eval_hamiltonian(sys, pt));
        double tol = o.return_tol > 0 ? o.return_tol : default_return_tol(pt.flat());
        auto e = detect_period(sys, pt, cfg, horizon, tol);
        j = to_json(e);
        verdict = to_string(e.verdict);
        std::cout << "verdict=" << verdict;
        if (e.T) std::cout << " T=" << fmt("%.10g", *e.T);
        std::cout << " residual=" << fmt("%.3g", e.residual) << " confirmed=" << (e.confirmed ? "yes" : "no") << "\n";
    }
    j["system"] = to_json(sys);
    if (!o.output.empty()) emit(o, j.dump(2) + "\n");
    return check_expect(o, verdict);
}

int cmd_survey(const Options& o) {
    auto sys = build_system(o);
    SurveyOptions opt;
    opt.stepper = build_stepper(o, sys);
    opt.tol_rel = o.tol_rel;
    opt.horizon = o.horizon;
    opt.return_tol = o.return_tol;
    opt.workers = o.workers;
    opt.sampler.kepler_min_perihelion = o.min_perihelion;
    auto rep = survey_periods(sys, o.energy, o.count, o.seed, opt);
    std::cout << "verdict=" << to_string(rep.verdict);
    if (!rep.periods.empty())
        std::cout << " T=" << fmt("%.5g", rep.T_mean) << " spread=" << fmt("%.3g", rep.spread_rel);
    std::cout << " periodic=" << rep.periods.size() << "/" << rep.samples << "\n";
    if (!o.output.empty()) {
        if (o.format == "csv") {
            std::ostringstream os;
            write_survey_csv(os, rep);
            emit(o, os.str());
        } else {
            Json j = to_json(rep);
            j["system"] = to_json(sys);
            j["seed"] = o.seed;
            emit(o, j.dump(2) + "\n");
        }
    }
    return check_expect(o, to_string(rep.verdict));
}

SpectrumOptions spectrum_options(const Options& o) {
    SpectrumOptions s;
    if (o.L > 0) s.grid.L = o.L;
    if (o.N > 0) s.grid.N = o.N;
    s.grid.k_delta = o.k_delta;
    s.grid.workers = resolve_workers(o.workers);
    return s;
}

int cmd_spectrum(const Options& o) {
    auto V = Polynomial::parse(o.potential);
    std::vector<std::string> warnings;
    auto win = window_1d(V, o.hbar, o.energy, o.c, o.delta, spectrum_options(o), &warnings);
    for (auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "window size=" << win.eigenvalues.size() << " half_width=" << fmt("%.6g", win.half_width())
              << "\n";
    if (o.format == "csv") {
        std::ostringstream os;
        os << "index,E\n";
        for (std::size_t i = 0; i < win.eigenvalues.size(); ++i) os << i << ',' << fmt17(win.eigenvalues[i]) << '\n';
        if (!o.output.empty()) emit(o, os.str());
    } else if (!o.output.empty()) {
        Json j = {{"potential", V.to_string()}, {"hbar", o.hbar},     {"E", o.energy},
                  {"c", o.c},                   {"delta", o.delta},   {"eigenvalues", win.eigenvalues},
                  {"warnings", warnings}};
        emit(o, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_diffspec(const Options& o) {
    auto hbars = parse_list(o.hbars);
    ClusterOptions copt;
    copt.bin_width = o.bin_width;
    if (o.persist_tol > 0) copt.persist_tol = o.persist_tol;
    if (o.range > 0) copt.range = o.range;
    DiffSpectrumReport rep;
    if (!o.separable.empty()) {
        auto parts = split(o.separable, ':');
        if (parts.size() != 2) throw ConfigError("--separable expects Vx:Vy, e.g. x^2:2y^2");
        rep = diffspec_separable(Polynomial::parse(parts[0]), Polynomial::parse(parts[1]), hbars, o.energy, o.c,
                                 o.delta, copt, spectrum_options(o));
    } else {
        rep = diffspec_1d(Polynomial::parse(o.potential), hbars, o.energy, o.c, o.delta, copt, spectrum_options(o));
    }
    for (auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "verdict=" << to_string(rep.verdict);
    if (rep.fitted_spacing) std::cout << " spacing=" << fmt("%.6g", *rep.fitted_spacing);
    if (rep.T_hat) std::cout << " T_hat=" << fmt("%.6g", *rep.T_hat);
    if (rep.oracle_T) std::cout << " T_classical=" << fmt("%.6g", *rep.oracle_T);
    std::cout << " fill=" << fmt("%.4g", rep.fill_fraction) << "\n";

    std::ostringstream hist;
    write_histogram_csv(hist, rep);
    if (!o.output.empty()) emit(o, o.format == "csv" ? hist.str() : to_json(rep).dump(2) + "\n");
    if (o.emit_plot) {
        fs::path base = o.output.empty() ? fs::path("diffspec") : fs::path(o.output).replace_extension();
        fs::path csv = base.string() + ".histogram.csv", py = base.string() + ".plot.py";
        if (o.format != "csv" || o.output.empty()) write_file(csv, hist.str());
        else csv = o.output;
        write_file(py, histogram_plot_script(csv.filename().string(), base.filename().string() + ".png"));
        std::cout << "plot script: " << py.string() << "\n";
    }
    return check_expect(o, to_string(rep.verdict));
}

std::string utc_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

int cmd_recipe(const Options& o, const CLI::App* cmd) {
    if (o.list) {
        for (const auto& n : builtin_recipe_names()) std::cout << n << "\n";
        return 0;
    }
    ExperimentRecipe r = [&] {
        if (!o.recipe_file.empty()) {
            std::ifstream f(o.recipe_file);
            if (!f) throw Error("cannot read " + o.recipe_file);
            Json j;
            try {
                j = Json::parse(f);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(o.recipe_file + ": " + e.what());
            }
            auto rec = recipe_from_json(j);
            if (cmd->count("--seed")) rec.seed = o.seed;
            return rec;
        }
        if (o.recipe.empty()) throw ConfigError("recipe: give a builtin name or --file (see --list)");
        return builtin_recipe(o.recipe, o.seed);
    }();
    const int workers = resolve_workers(o.workers);
    auto t0 = std::chrono::steady_clock::now();
    auto res = run_recipe(r, workers);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::path dir(o.out_dir);
    fs::create_directories(dir);
    const std::string stem = r.name + "-" + std::to_string(r.seed);
    write_file(dir / (stem + ".report.json"), res.report.dump(2) + "\n");
    write_file(dir / (stem + ".summary.csv"), res.summary_csv);
    Json meta = {{"timestamp", utc_timestamp()}, {"workers", workers}, {"wall_seconds", secs},
                 {"tool_version", ISOPERIOD_VERSION}};
    write_file(dir / (stem + ".meta.json"), meta.dump(2) + "\n");
    if (o.emit_plot && !res.histogram_csv.empty())
        write_file(dir / (stem + ".plot.py"), histogram_plot_script(stem + ".summary.csv", stem + ".png"));
    std::cout << "recipe=" << r.name << " verdict=" << res.verdict << " report=" << (dir / (stem + ".report.json")).string()
              << "\n";
    return check_expect(o, res.verdict);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic orbits on energy surfaces: period detection, iso-energy surveys and "
                 "semiclassical difference spectra."};
    // "--h" is the step size, so help is long-form only
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", std::string(ISOPERIOD_VERSION));
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file mirroring the flags (command-line flags win)");

    Options o;
    auto* integrate_cmd = app.add_subcommand("integrate", "Integrate a trajectory and write t,q,p,H rows");
    add_system_flags(integrate_cmd, o);
    add_start_flags(integrate_cmd, o);
    add_stepper_flags(integrate_cmd, o);
    integrate_cmd->add_option("--t-max", o.t_max, "final time")->check(CLI::PositiveNumber);
    integrate_cmd->add_option("--stride", o.stride, "keep every stride-th state")->check(CLI::PositiveNumber);
    add_output_flags(integrate_cmd, o, "csv (default) | json");

    auto* period_cmd = app.add_subcommand("period", "Detect the minimal period of one orbit");
    add_system_flags(period_cmd, o);
    add_start_flags(period_cmd, o);
    add_stepper_flags(period_cmd, o);
    add_detect_flags(period_cmd, o);
    period_cmd->add_option("--expect", o.expect, "required verdict, e.g. periodic");
    add_output_flags(period_cmd, o, "json");

    auto* survey_cmd = app.add_subcommand("survey", "Sample an energy surface and compare periods");
    add_system_flags(survey_cmd, o);
    add_stepper_flags(survey_cmd, o);
    add_detect_flags(survey_cmd, o);
    survey_cmd->add_option("--energy", o.energy, "energy level E");
    survey_cmd->add_option("--count", o.count, "number of samples")->check(CLI::PositiveNumber);
    survey_cmd->add_option("--seed", o.seed, "sampler seed");
    survey_cmd->add_option("--tol-rel", o.tol_rel, "relative spread allowed for SAME-PERIOD");
    survey_cmd->add_option("--min-perihelion", o.min_perihelion, "kepler: reject perihelion below this fraction of a");
    survey_cmd->add_option("--expect", o.expect, "required verdict: same-period | mixed | spread-exceeded");
    add_output_flags(survey_cmd, o, "json (default) | csv");

    auto* spectrum_cmd = app.add_subcommand("spectrum", "Eigenvalues of -hbar^2 d^2/dx^2 + V in the window");
    spectrum_cmd->add_option("--potential", o.potential, "polynomial V(x)");
    spectrum_cmd->add_option("--hbar", o.hbar, "Planck constant")->check(CLI::PositiveNumber);
    add_window_flags(spectrum_cmd, o);
    add_output_flags(spectrum_cmd, o, "json (default) | csv");

    auto* diffspec_cmd = app.add_subcommand("diffspec", "Difference spectrum over an hbar schedule: LATTICE or DENSE");
    diffspec_cmd->add_option("--potential", o.potential, "polynomial V(x) for a 1D problem");
    diffspec_cmd->add_option("--separable", o.separable, "Vx:Vy for a separable 2D problem, e.g. x^2:2y^2");
    diffspec_cmd->add_option("--hbars", o.hbars, "strictly decreasing, comma separated")->check(kDecreasingList);
    add_window_flags(diffspec_cmd, o);
    diffspec_cmd->add_option("--bin-width", o.bin_width, "histogram bin width")->check(CLI::PositiveNumber);
    diffspec_cmd->add_option("--persist-tol", o.persist_tol, "cluster persistence tolerance; 0 = bin width");
    diffspec_cmd->add_option("--range", o.range, "histogram range [0, R]; 0 = 4 x classical spacing, else 10");
    diffspec_cmd->add_option("--expect", o.expect, "required verdict: lattice | dense | inconclusive");
    diffspec_cmd->add_flag("--emit-plot", o.emit_plot, "write a matplotlib script next to the data");
    add_output_flags(diffspec_cmd, o, "json (default) | csv (histogram)");

    auto* recipe_cmd = app.add_subcommand("recipe", "Run a builtin or JSON experiment recipe");
    recipe_cmd->add_option("name", o.recipe, "builtin recipe name");
    recipe_cmd->add_option("--file", o.recipe_file, "recipe JSON file");
    recipe_cmd->add_option("--seed", o.seed, "seed (overrides the recipe's)");
    recipe_cmd->add_option("--out-dir", o.out_dir, "directory for report, summary and metadata files");
    recipe_cmd->add_option("--workers", o.workers, "worker threads; 0 = all cores (capped by ISOPERIOD_THREADS)");
    recipe_cmd->add_option("--expect", o.expect, "required verdict");
    recipe_cmd->add_flag("--emit-plot", o.emit_plot, "diffspec recipes: write a plot script");
    recipe_cmd->add_flag("--list", o.list, "list builtin recipes");

    for (auto* sub : app.get_subcommands({})) sub->configurable();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*integrate_cmd) {
            if (o.format.empty()) o.format = "csv";
            return cmd_integrate(o);
        }
        if (o.format.empty()) o.format = "json";
        if (*period_cmd) return cmd_period(o);
        if (*survey_cmd) return cmd_survey(o);
        if (*spectrum_cmd) return cmd_spectrum(o);
        if (*diffspec_cmd) return cmd_diffspec(o);
        if (*recipe_cmd) return cmd_recipe(o, recipe_cmd);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}
