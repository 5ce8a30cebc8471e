#pragma once

#include <functional>
#include <vector>

#include "bangride/model.hpp"

namespace bangride {

using ControlLaw = std::function<double(double t, const Vec& x)>;

/// A feedback law together with the times where it may jump. Those times are
/// inserted into the simulation grid so no RK4 step straddles a jump.
struct Policy {
  ControlLaw control;
  std::vector<double> breakpoints;
};

struct SimOptions {
  double dt = 0.0;              // 0 selects 1e-3 * t_f
  double event_time_tol = 0.0;  // 0 selects 1e-7 * dt
  long max_steps = 10'000'000;
  bool locate_events = true;
};

/// Classical RK4 step; the control is re-evaluated at every stage. The final
/// stage uses the left limit at t + dt so a jump at the step end is not seen.
Vec rk4_step(const SystemModel& system, const Vec& x, const ControlLaw& u_of, double t, double dt);

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

/// Bisection on a sign change fun(lo) < 0 <= fun(hi) down to width <= tol.
Bracket bracket_event(const std::function<double(double)>& fun, double t_lo, double t_hi, double tol);

/// Upper end of the bisection bracket, the first time known to satisfy fun >= 0.
double locate_event(const std::function<double(double)>& fun, double t_lo, double t_hi, double tol);

/// Grid integration from x0 to t_f with event localization of constraint
/// activity changes. See Trajectory for the sample conventions.
Trajectory simulate(const OCProblem& problem, const Policy& policy, SimOptions opts = {});

/// Uniform grid of [0, t_f] refined with the given breakpoints.
std::vector<double> simulation_grid(double t_f, double dt, const std::vector<double>& breakpoints, long max_steps);

/// Resolved step size and event tolerance for a problem.
SimOptions resolve_options(const OCProblem& problem, SimOptions opts);

}  // namespace bangride
