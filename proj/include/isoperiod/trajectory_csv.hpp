#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "csv.hpp"
#include "systems.hpp"
#include "trajectory.hpp"

namespace isoperiod {

/// Header `t,q1..qn,p1..pn,H`, one row per stored state.
inline void write_trajectory_csv(std::ostream& os, const SystemSpec& sys, const Trajectory& traj) {
    const Eigen::Index n = traj.states.empty() ? sys.dof() : traj.states.front().dof();
    os << "t";
    for (Eigen::Index i = 1; i <= n; ++i) os << ",q" << i;
    for (Eigen::Index i = 1; i <= n; ++i) os << ",p" << i;
    os << ",H\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& s = traj.states[k];
        os << fmt17(traj.times[k]);
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt17(s.q[i]);
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt17(s.p[i]);
        os << ',' << fmt17(eval_hamiltonian(sys, s)) << '\n';
    }
}

struct TrajectoryTable {
    Trajectory traj;
    std::vector<double> energies;
};

inline TrajectoryTable read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("trajectory csv: missing header");
    auto header = split(line, ',');
    if (header.size() < 4 || header.front() != "t" || header.back() != "H" || header.size() % 2 != 0)
        throw ConfigError("trajectory csv: header must be t,q1..qn,p1..pn,H");
    const std::size_t n = (header.size() - 2) / 2;
    TrajectoryTable out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != header.size()) throw ConfigError("trajectory csv: ragged row");
        Vec q(static_cast<Eigen::Index>(n)), p(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            q[Eigen::Index(i)] = parse_double(cells[1 + i]);
            p[Eigen::Index(i)] = parse_double(cells[1 + n + i]);
        }
        out.traj.times.push_back(parse_double(cells.front()));
        out.traj.states.emplace_back(q, p);
        out.energies.push_back(parse_double(cells.back()));
    }
    if (!out.energies.empty()) {
        out.traj.energy0 = out.energies.front();
        for (double e : out.energies)
            out.traj.max_drift = std::max(out.traj.max_drift, std::abs(e - out.traj.energy0));
    }
    return out;
}

}  // namespace isoperiod
