#pragma once

#include "bangride/integrate.hpp"
#include "bangride/model.hpp"

namespace bangride {

/// Closed-loop law u = max D(x). Once past t = 0 an empty D(x) is reported as
/// RideDivergence carrying the time.
Policy hybrid_policy(const OCProblem& problem);

/// Maximum input until a path constraint binds, then ride it; equivalently the
/// closed loop under max_feasible_input.
Trajectory hybrid_simulate(const OCProblem& problem, SimOptions opts = {});

/// Solves sbar(x, u) = 0 on [u_lo, u_hi]. Needs sbar(x, u_lo) <= 0 <= sbar(x, u_hi)
/// (BracketError otherwise) and d sbar/du > 0 at the root (DegenerateSensitivity).
double ride_input(const Constraint& c, const SystemModel& system, const Vec& x, double u_lo, double u_hi);

}  // namespace bangride
