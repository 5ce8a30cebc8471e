#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bangride/integrate.hpp"
#include "bangride/model.hpp"

namespace bangride {

/// Zero-order hold on N uniform segments of [0, t_f].
struct PiecewiseControl {
  std::vector<double> values;

  int segments() const { return static_cast<int>(values.size()); }
  static PiecewiseControl constant(int segments, double value) {
    return {std::vector<double>(static_cast<std::size_t>(segments), value)};
  }
};

struct OracleOptions {
  int steps_per_segment = 10;
};

struct CandidateResult {
  double objective = 0.0;
  bool feasible = true;
  double max_violation = 0.0;  // constraint excess of the raw segment values
};

/// phi(x(t_f)) + trapezoidal integral of l along a trajectory.
double trajectory_objective(const OCProblem& problem, const Trajectory& traj);

/// Applies min(segment value, max D(x)) so every candidate stays feasible.
Policy projected_policy(const OCProblem& problem, const PiecewiseControl& ctrl);

CandidateResult evaluate_candidate(const OCProblem& problem, const PiecewiseControl& ctrl, OracleOptions opts = {});

/// Projected trajectory of a candidate on the oracle grid, for export.
Trajectory candidate_trajectory(const OCProblem& problem, const PiecewiseControl& ctrl, OracleOptions opts = {});

struct SearchResult {
  PiecewiseControl best;
  double objective = 0.0;
  long evaluations = 0;
  int best_start = 0;
};

/// Multistart coordinate descent with shrinking steps. Starts: the hybrid
/// profile (u_max projected, which reproduces the closed loop), all u_min, and
/// four seeded random profiles. Stops early once every start has converged.
SearchResult direct_search(const OCProblem& problem, int segments, long budget, std::uint64_t seed,
                           OracleOptions opts = {});

enum class ArcKind { min, max, ride };

struct Arc {
  ArcKind kind = ArcKind::max;
  int constraint = -1;  // ride arcs only
};

struct SwitchSearchOptions {
  double dt = 0.0;  // 0 selects t_f / 1000
  int grid_points = 81;
};

struct SwitchResult {
  std::vector<double> switch_times;
  double objective = 0.0;
};

/// Best switch times for a fixed arc pattern (at most four arcs), searched over
/// [bounds.first, bounds.second] by a grid followed by golden-section refinement.
SwitchResult switch_time_search(const OCProblem& problem, const std::vector<Arc>& pattern,
                                std::pair<double, double> bounds, SwitchSearchOptions opts = {});

/// Objective of one fixed pattern with given switch times.
double pattern_objective(const OCProblem& problem, const std::vector<Arc>& pattern,
                         const std::vector<double>& switch_times, SwitchSearchOptions opts = {});

}  // namespace bangride
