#include "bangride/hybridsim.hpp"

#include <cmath>

#include "bangride/errors.hpp"

namespace bangride {

Policy hybrid_policy(const OCProblem& problem) {
  Policy p;
  p.control = [&problem](double t, const Vec& x) {
    try {
      return max_feasible_input(problem, x).u;
    } catch (const InfeasibleState& e) {
      if (t <= 0.0) throw;
      throw RideDivergence(std::string("ride input left the admissible range: ") + e.what(), t);
    }
  };
  return p;
}

Trajectory hybrid_simulate(const OCProblem& problem, SimOptions opts) {
  return simulate(problem, hybrid_policy(problem), opts);
}

double ride_input(const Constraint& c, const SystemModel& system, const Vec& x, double u_lo, double u_hi) {
  if (!(u_lo <= u_hi)) throw BracketError("ride bracket is reversed");
  const double s_hi = sbar_value(c, system, x, u_hi);
  const double s_lo = sbar_value(c, system, x, u_lo);
  double root;
  if (std::abs(s_hi) <= kTolRide) {
    root = u_hi;
  } else if (std::abs(s_lo) <= kTolRide) {
    root = u_lo;
  } else if (s_lo < 0.0 && s_hi > 0.0) {
    root = detail::bracketed_root(c, system, x, u_lo, u_hi, s_hi, false);
  } else {
    throw BracketError("constraint '" + c.name + "' does not change sign on the ride bracket");
  }
  if (!(sbar_du(c, system, x, root) > kTolDiv)) {
    throw DegenerateSensitivity("constraint '" + c.name + "' has no positive input sensitivity at the ride root");
  }
  return root;
}

}  // namespace bangride
