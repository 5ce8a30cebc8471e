#pragma once

#include <iosfwd>
#include <string>

#include "bangride/costate.hpp"
#include "bangride/model.hpp"

namespace bangride {

/// Header t,u,active,x1..xn,s1..sm; s_i is the activity quantity of constraint i
/// (s for mixed constraints and input bounds, h for state constraints).
/// Events follow as comment lines "# event,t,constraint,kind".
void write_trajectory_csv(std::ostream& out, const OCProblem& problem, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in, int state_dim);

/// Header t,sigma,mu,lambda1..lambdan.
void write_costate_csv(std::ostream& out, const CostateTrajectory& costate);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string trajectory_csv(const OCProblem& problem, const Trajectory& traj);
std::string costate_csv(const CostateTrajectory& costate);
Trajectory load_trajectory_csv(const std::string& path, int state_dim);

}  // namespace bangride
