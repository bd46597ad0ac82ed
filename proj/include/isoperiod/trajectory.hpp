#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "phase_point.hpp"

namespace isoperiod {

/// Time-stamped states on a uniform grid, with the energy record.
struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> states;
    double energy0 = 0.0;
    double max_drift = 0.0;
    /// Empty unless integration stopped early (domain exit).
    std::string exit_reason;

    std::size_t size() const { return states.size(); }
    bool truncated() const { return !exit_reason.empty(); }
};

}  // namespace isoperiod
