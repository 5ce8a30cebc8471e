#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "bangride/costate.hpp"
#include "bangride/model.hpp"

namespace bangride {

enum class CheckStatus { pass, fail, skipped };
enum class Verdict { necessary_conditions_satisfied, violated, inconclusive };

/// Sufficient-structure families that can justify the maximum feasible input:
/// monotone_system (sign-monotone dynamics and constraints, either sign),
/// linear_ordering (diagonal linear dynamics with ordered rates and relative
/// sensitivities), special_linear (single positive terminal costate entry).
enum class Route { none, monotone_system, linear_ordering, special_linear };

const char* to_string(CheckStatus s);
const char* to_string(Verdict v);
const char* to_string(Route r);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::skipped;
  double margin = 0.0;  // signed: >= 0 means satisfied where meaningful
  double worst_time = 0.0;
  std::string message;

  bool passed() const { return status == CheckStatus::pass; }
  bool failed() const { return status == CheckStatus::fail; }
};

struct Certificate {
  std::vector<CheckResult> checks;
  Verdict verdict = Verdict::inconclusive;
  Route route = Route::none;
  double min_sigma = 0.0;
  double coverage = 0.0;
  double max_feasible_violation = 0.0;
  CostateTrajectory costate;

  /// nullptr when absent.
  const CheckResult* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

struct StructureReport {
  double coverage = 0.0;
  double max_feasible_violation = 0.0;
  double worst_time = 0.0;
};

/// Share of samples with an active constraint and max_k |u_k - max D(x_k)|.
StructureReport trajectory_structure(const OCProblem& problem, const Trajectory& traj);

/// Rank condition of the active constraint gradients, entry jumps of state
/// constraints and the absence of state constraint switching at 0 and t_f.
std::vector<CheckResult> check_regularity(const OCProblem& problem, const Trajectory& traj);

enum class SignMode { positive, flipped };

std::vector<CheckResult> check_monotonicity(const OCProblem& problem, const Trajectory& traj, SignMode mode);

/// Diagonal linear systems only (CapabilityError otherwise).
std::vector<CheckResult> check_linear_ordering(const OCProblem& problem, const Trajectory& traj,
                                               const CostateTrajectory& costate);

/// Diagonal linear systems only (CapabilityError otherwise).
std::vector<CheckResult> check_special_linear(const OCProblem& problem, const Trajectory& traj,
                                              const CostateTrajectory& costate);

/// Numerical rank of [b, Ab, ..., A^{n-1} b].
int kalman_rank(const Mat& a, const Vec& b);
int kalman_rank(const Vec& diagonal, const Vec& b);

/// Sign condition realized "almost everywhere": violations only next to logged
/// events and in fewer than 0.1% of the samples.
bool almost_everywhere(const Trajectory& traj, const std::vector<std::size_t>& violations);

Certificate certify_necessary_optimality(const OCProblem& problem, const Trajectory& traj,
                                         const std::optional<Vec>& alpha = std::nullopt);

}  // namespace bangride
