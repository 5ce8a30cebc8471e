#pragma once

// Problem definition: control-affine systems x' = f(x) + g(x) u with a scalar
// input, constraint lists, objectives and trajectories, plus the pointwise
// evaluations shared by the simulator and the certifier.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bangride {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Constraint activity threshold: s >= -kTolAct counts as active.
inline constexpr double kTolAct = 1e-9;
/// Residual accepted for a ride root, |s(x, u)| <= kTolRide.
inline constexpr double kTolRide = 1e-10;
/// Smallest |ds/du| accepted as a divisor.
inline constexpr double kTolDiv = 1e-12;

enum class SystemKind { generic_affine, linear_diagonal };

class SystemModel {
 public:
  using VectorField = std::function<Vec(const Vec&)>;
  using MatrixField = std::function<Mat(const Vec&)>;

  /// x' = diag(a) x + 1 u.
  static SystemModel linear_diagonal(Vec a);
  static SystemModel affine(int n, VectorField f, VectorField g, MatrixField f_jac, MatrixField g_jac);

  int n() const { return n_; }
  SystemKind kind() const { return kind_; }
  bool is_linear_diagonal() const { return kind_ == SystemKind::linear_diagonal; }
  /// Diagonal of A; throws CapabilityError for generic systems.
  const Vec& diagonal() const;

  Vec f(const Vec& x) const;
  Vec g(const Vec& x) const;
  Mat f_jac(const Vec& x) const;
  Mat g_jac(const Vec& x) const;

  /// F(x, u) without finiteness checks (hot path of the integrator).
  Vec rhs(const Vec& x, double u) const;
  /// F_x(x, u) = f_x(x) + g_x(x) u.
  Mat rhs_jac(const Vec& x, double u) const;

 private:
  int n_ = 0;
  SystemKind kind_ = SystemKind::generic_affine;
  Vec a_;
  VectorField f_, g_;
  MatrixField f_jac_, g_jac_;
};

/// F(x, u) = f(x) + g(x) u; throws NumericalError on a non-finite component.
Vec evaluate_rhs(const SystemModel& system, const Vec& x, double u);

enum class ConstraintKind { input_upper, input_lower, mixed, pure_state };

const char* to_string(ConstraintKind kind);

/// One entry of the combined constraint list. Mixed constraints read s(x, u) <= 0,
/// pure state constraints h(x) <= 0 (their certificate-level form is the rate
/// hdot(x, u) = h_x(x) F(x, u)), input bounds u - u_max <= 0 and u_min - u <= 0.
struct Constraint {
  using Scalar = std::function<double(const Vec&, double)>;
  using Gradient = std::function<Vec(const Vec&, double)>;

  std::string name;
  ConstraintKind kind = ConstraintKind::mixed;
  double bound = 0.0;  // input bounds only
  Scalar value;        // s(x,u), or h(x) for pure state constraints
  Gradient grad_x;     // s_x, or h_x
  Scalar grad_u;       // mixed only
  Gradient hdot_grad_x;  // optional, pure state only

  static Constraint input_upper(double u_max);
  static Constraint input_lower(double u_min);
  static Constraint mixed(std::string name, Scalar value, Gradient grad_x, Scalar grad_u);
  static Constraint pure_state(std::string name, std::function<double(const Vec&)> h,
                               std::function<Vec(const Vec&)> h_x,
                               Gradient hdot_grad_x = nullptr);

  bool is_path() const { return kind == ConstraintKind::mixed || kind == ConstraintKind::pure_state; }
  bool is_input_bound() const { return !is_path(); }
};

/// Value and partials of the combined constraint sbar at (x, u).
struct SbarEval {
  double value = 0.0;
  double du = 0.0;
  Vec dx;
  bool finite_difference = false;  // dx of a pure state constraint came from differencing
};

enum class DerivativeFallback { finite_difference, none };

SbarEval sbar_value_and_partials(const Constraint& c, const SystemModel& system, const Vec& x, double u,
                                 DerivativeFallback fallback = DerivativeFallback::finite_difference);
/// sbar(x, u) only: s, hdot, or the signed input bound.
double sbar_value(const Constraint& c, const SystemModel& system, const Vec& x, double u);
/// d sbar / du only.
double sbar_du(const Constraint& c, const SystemModel& system, const Vec& x, double u);

/// Quantity whose sign decides activity: s for mixed/input constraints, h for pure state ones.
double activity_value(const Constraint& c, const Vec& x, double u);
inline bool is_active(const Constraint& c, const Vec& x, double u) {
  return activity_value(c, x, u) >= -kTolAct;
}

/// p_{i,j} = (d sbar/du)^{-1} d sbar/dx_j; throws DegenerateSensitivity when |d sbar/du| <= kTolDiv.
double relative_sensitivity(const Constraint& c, const SystemModel& system, const Vec& x, double u, int j);

struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
};

/// Linear functional w^T x.
ScalarField linear_field(Vec w);

struct OCProblem {
  std::string name;
  SystemModel system;
  std::vector<Constraint> constraints;
  ScalarField phi;
  std::optional<ScalarField> stage_cost;
  std::vector<ScalarField> terminal_constraints;  // z(x(t_f)) >= 0
  double t_f = 0.0;
  Vec x0;
  double u_min = 0.0;
  double u_max = 1.0;

  int upper_index() const;
  int lower_index() const;
  bool has_pure_state() const;
  double stage_cost_value(const Vec& x) const;
  Vec stage_cost_grad(const Vec& x) const;
};

/// Builds a problem whose constraint list starts with input_upper (index 0) and
/// input_lower (index 1), followed by the given path constraints.
OCProblem make_problem(std::string name, SystemModel system, Vec x0, double t_f, double u_min, double u_max,
                       ScalarField phi, std::vector<Constraint> path_constraints = {},
                       std::optional<ScalarField> stage_cost = std::nullopt,
                       std::vector<ScalarField> terminal_constraints = {});

/// Throws ConfigError when the problem is malformed.
void validate(const OCProblem& problem);

enum class EventKind { activate, deactivate };

const char* to_string(EventKind kind);

struct Event {
  double time = 0.0;
  int constraint = -1;
  EventKind kind = EventKind::activate;
};

/// Sampled trajectory. inputs[k] is the left limit of u at times[k];
/// active[k] is the lowest-index active constraint, or -1.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> inputs;
  std::vector<int> active;
  std::vector<Event> events;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  const Vec& final_state() const { return states.back(); }
  /// True when some logged event sits exactly on sample k.
  bool is_event_sample(std::size_t k) const;
  /// True when sample k is within one sample of an event sample.
  bool near_event(std::size_t k) const;
};

/// Lowest-index active constraint at (x, u), or -1.
int active_label(const OCProblem& problem, const Vec& x, double u);

struct MaxFeasible {
  double u = 0.0;
  int binding = -1;
};

/// max D(x): the largest u in [u_min, u_max] that keeps every mixed constraint and
/// every pure state rate (for h >= -kTolAct) non-positive. Throws InfeasibleState
/// or NonMonotoneConstraint.
MaxFeasible max_feasible_input(const OCProblem& problem, const Vec& x);

namespace detail {

/// Safeguarded Newton/bisection for sbar(x, u) = 0 on [lo, hi] given
/// s_lo <= 0 < s_hi. Returns u with |sbar| <= kTolRide or the feasible end of a
/// collapsed bracket. With require_increasing, a non-positive du throws
/// NonMonotoneConstraint.
double bracketed_root(const Constraint& c, const SystemModel& system, const Vec& x, double lo, double hi,
                      double s_hi, bool require_increasing);

}  // namespace detail

}  // namespace bangride
