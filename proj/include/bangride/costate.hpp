#pragma once

#include <optional>
#include <vector>

#include "bangride/model.hpp"

namespace bangride {

/// Costate sampled on the forward grid. mu holds the multiplier of the
/// lowest-index active constraint (0 where nothing is active).
struct CostateTrajectory {
  std::vector<double> times;
  std::vector<Vec> lambda;
  std::vector<double> mu;
  std::vector<double> sigma;
  double lambda0 = -1.0;

  std::size_t size() const { return times.size(); }
};

struct TerminalCostate {
  Vec lambda;
  double lambda0 = -1.0;
};

/// lambda(t_f) = lambda0 phi_x + alpha^T z_x with lambda0 = -1.
TerminalCostate terminal_costate(const OCProblem& problem, const Vec& x_tf,
                                 const std::optional<Vec>& alpha = std::nullopt);

/// Backward RK4 on the forward grid. On an arc riding constraint i the costate
/// obeys lambda' = -lambda0 l_x - (F_x - g sbar_x / sbar_u)^T lambda; on other arcs
/// the sbar term drops. Inside a step x is a cubic Hermite interpolant and u is
/// rebuilt from the arc label (bound value, ride root, or the held input).
CostateTrajectory costate_integrate(const OCProblem& problem, const Trajectory& traj,
                                    const std::optional<Vec>& alpha = std::nullopt);

/// -(lambda^T g) / (d sbar/du).
double multiplier(const Constraint& c, const SystemModel& system, const Vec& lambda, const Vec& x, double u);

/// lambda^T g(x).
double switching_function(const Vec& lambda, const SystemModel& system, const Vec& x);

/// lambda0 l(x) + lambda^T F(x, u).
double hamiltonian(const OCProblem& problem, const Vec& x, double u, const Vec& lambda, double lambda0);

/// Label governing the open interval (t_k, t_{k+1}).
int interval_label(const Trajectory& traj, std::size_t k);

}  // namespace bangride
