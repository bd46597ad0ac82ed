#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "period.hpp"
#include "sampling.hpp"

namespace isoperiod {

enum class SurveyVerdict { same_period, mixed, spread_exceeded };

inline const char* to_string(SurveyVerdict v) {
    switch (v) {
        case SurveyVerdict::same_period: return "SAME-PERIOD";
        case SurveyVerdict::mixed: return "MIXED";
        default: return "SPREAD-EXCEEDED";
    }
}

struct SurveyOptions {
    StepperConfig stepper;
    /// Relative spread allowed for SAME-PERIOD.
    double tol_rel = 1e-6;
    /// Non-positive: default_horizon for the system at this energy.
    double horizon = 0.0;
    /// Non-positive: default_return_tol per sample.
    double return_tol = 0.0;
    SamplerOptions sampler;
    int workers = 0;
};

struct SurveySample {
    PhasePoint start;
    PeriodEstimate estimate;
};

struct SurveyReport {
    double E = 0.0;
    int samples = 0;
    std::vector<SurveySample> results;
    /// Periods of the periodic samples, in sample order.
    std::vector<double> periods;
    double T_min = 0.0, T_max = 0.0, T_mean = 0.0;
    double spread_rel = 0.0;
    std::map<std::string, int> verdicts;
    int excluded_degenerate = 0;
    SurveyVerdict verdict = SurveyVerdict::mixed;
    double tol_rel = 0.0;
};

/// Verdict rules: MIXED if any sample failed to return within the horizon
/// (or none returned at all), SAME-PERIOD if all periodic samples lie
/// within tol_rel relative spread, SPREAD-EXCEEDED otherwise. Degenerate
/// samples are excluded and counted.
inline void aggregate(SurveyReport& r) {
    r.periods.clear();
    r.verdicts = {{to_string(PeriodVerdict::periodic), 0},
                  {to_string(PeriodVerdict::not_periodic_within_horizon), 0},
                  {to_string(PeriodVerdict::degenerate_fixed_point), 0}};
    for (const auto& s : r.results) {
        ++r.verdicts[to_string(s.estimate.verdict)];
        if (s.estimate.verdict == PeriodVerdict::periodic) r.periods.push_back(*s.estimate.T);
    }
    r.excluded_degenerate = r.verdicts[to_string(PeriodVerdict::degenerate_fixed_point)];
    const int not_periodic = r.verdicts[to_string(PeriodVerdict::not_periodic_within_horizon)];
    if (!r.periods.empty()) {
        auto [mn, mx] = std::minmax_element(r.periods.begin(), r.periods.end());
        r.T_min = *mn;
        r.T_max = *mx;
        double sum = 0.0;
        for (double T : r.periods) sum += T;
        r.T_mean = sum / double(r.periods.size());
        r.spread_rel = (r.T_max - r.T_min) / r.T_mean;
    } else {
        r.T_min = r.T_max = r.T_mean = r.spread_rel = 0.0;
    }
    if (not_periodic > 0 || r.periods.empty()) r.verdict = SurveyVerdict::mixed;
    else if (r.spread_rel <= r.tol_rel) r.verdict = SurveyVerdict::same_period;
    else r.verdict = SurveyVerdict::spread_exceeded;
}

/// Runs detect_period on the given start points (in parallel) and aggregates.
inline SurveyReport survey_points(const SystemSpec& sys, double E, std::vector<PhasePoint> points,
                                  const SurveyOptions& opt) {
    opt.stepper.validate();
    SurveyReport rep;
    rep.E = E;
    rep.tol_rel = opt.tol_rel;
    rep.samples = int(points.size());
    rep.results.resize(points.size());
    const double horizon = opt.horizon > 0 ? opt.horizon : default_horizon(sys, E);
    parallel_for(points.size(), resolve_workers(opt.workers), [&](std::size_t i) {
        const auto& pt = points[i];
        double tol = opt.return_tol > 0 ? opt.return_tol : default_return_tol(pt.flat());
        rep.results[i] = SurveySample{pt, detect_period(sys, pt, opt.stepper, horizon, tol)};
    });
    aggregate(rep);
    return rep;
}

/// Samples the level set H = E and checks that every orbit through it
/// closes with a common period.
inline SurveyReport survey_periods(const SystemSpec& sys, double E, int count, std::uint64_t seed,
                                   const SurveyOptions& opt = {}) {
    return survey_points(sys, E, sample_energy_surface(sys, E, count, seed, opt.sampler), opt);
}

}  // namespace isoperiod
