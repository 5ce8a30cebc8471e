#include "bangride/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bangride/errors.hpp"
#include "bangride/logging.hpp"

namespace bangride {

SystemModel SystemModel::linear_diagonal(Vec a) {
  SystemModel m;
  m.n_ = static_cast<int>(a.size());
  m.kind_ = SystemKind::linear_diagonal;
  m.a_ = std::move(a);
  if (m.n_ <= 0) throw ConfigError("linear_diagonal system needs at least one state");
  return m;
}

SystemModel SystemModel::affine(int n, VectorField f, VectorField g, MatrixField f_jac, MatrixField g_jac) {
  if (n <= 0) throw ConfigError("system dimension must be positive");
  if (!f || !g || !f_jac || !g_jac) throw ConfigError("affine system needs f, g and both Jacobians");
  SystemModel m;
  m.n_ = n;
  m.kind_ = SystemKind::generic_affine;
  m.f_ = std::move(f);
  m.g_ = std::move(g);
  m.f_jac_ = std::move(f_jac);
  m.g_jac_ = std::move(g_jac);
  return m;
}

const Vec& SystemModel::diagonal() const {
  if (kind_ != SystemKind::linear_diagonal) throw CapabilityError("system is not linear_diagonal");
  return a_;
}

Vec SystemModel::f(const Vec& x) const {
  if (kind_ == SystemKind::linear_diagonal) return a_.cwiseProduct(x);
  return f_(x);
}

Vec SystemModel::g(const Vec& x) const {
  if (kind_ == SystemKind::linear_diagonal) return Vec::Ones(n_);
  return g_(x);
}

Mat SystemModel::f_jac(const Vec& x) const {
  if (kind_ == SystemKind::linear_diagonal) return a_.asDiagonal();
  return f_jac_(x);
}

Mat SystemModel::g_jac(const Vec& x) const {
  if (kind_ == SystemKind::linear_diagonal) return Mat::Zero(n_, n_);
  return g_jac_(x);
}

Vec SystemModel::rhs(const Vec& x, double u) const {
  if (kind_ == SystemKind::linear_diagonal) return (a_.cwiseProduct(x).array() + u).matrix();
  return f_(x) + g_(x) * u;
}

Mat SystemModel::rhs_jac(const Vec& x, double u) const {
  if (kind_ == SystemKind::linear_diagonal) return a_.asDiagonal();
  return f_jac_(x) + g_jac_(x) * u;
}

Vec evaluate_rhs(const SystemModel& system, const Vec& x, double u) {
  if (x.size() != system.n()) throw ConfigError("state dimension mismatch in evaluate_rhs");
  Vec out = system.rhs(x, u);
  for (int i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) throw NumericalError("non-finite right-hand side", i);
  }
  return out;
}

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::input_upper: return "input_upper";
    case ConstraintKind::input_lower: return "input_lower";
    case ConstraintKind::mixed: return "mixed";
    case ConstraintKind::pure_state: return "pure_state";
  }
  return "?";
}

const char* to_string(EventKind kind) { return kind == EventKind::activate ? "activate" : "deactivate"; }

Constraint Constraint::input_upper(double u_max) {
  Constraint c;
  c.name = "input_upper";
  c.kind = ConstraintKind::input_upper;
  c.bound = u_max;
  return c;
}

Constraint Constraint::input_lower(double u_min) {
  Constraint c;
  c.name = "input_lower";
  c.kind = ConstraintKind::input_lower;
  c.bound = u_min;
  return c;
}

Constraint Constraint::mixed(std::string name, Scalar value, Gradient grad_x, Scalar grad_u) {
  if (!value || !grad_x || !grad_u) throw ConfigError("mixed constraint '" + name + "' needs value and both partials");
  Constraint c;
  c.name = std::move(name);
  c.kind = ConstraintKind::mixed;
  c.value = std::move(value);
  c.grad_x = std::move(grad_x);
  c.grad_u = std::move(grad_u);
  return c;
}

Constraint Constraint::pure_state(std::string name, std::function<double(const Vec&)> h,
                                  std::function<Vec(const Vec&)> h_x, Gradient hdot_grad_x) {
  if (!h || !h_x) throw ConfigError("state constraint '" + name + "' needs h and h_x");
  Constraint c;
  c.name = std::move(name);
  c.kind = ConstraintKind::pure_state;
  c.value = [h = std::move(h)](const Vec& x, double) { return h(x); };
  c.grad_x = [h_x = std::move(h_x)](const Vec& x, double) { return h_x(x); };
  c.hdot_grad_x = std::move(hdot_grad_x);
  return c;
}

double sbar_value(const Constraint& c, const SystemModel& system, const Vec& x, double u) {
  switch (c.kind) {
    case ConstraintKind::input_upper: return u - c.bound;
    case ConstraintKind::input_lower: return c.bound - u;
    case ConstraintKind::mixed: return c.value(x, u);
    case ConstraintKind::pure_state: return c.grad_x(x, u).dot(system.rhs(x, u));
  }
  return 0.0;
}

double sbar_du(const Constraint& c, const SystemModel& system, const Vec& x, double u) {
  switch (c.kind) {
    case ConstraintKind::input_upper: return 1.0;
    case ConstraintKind::input_lower: return -1.0;
    case ConstraintKind::mixed: return c.grad_u(x, u);
    case ConstraintKind::pure_state: return c.grad_x(x, u).dot(system.g(x));
  }
  return 0.0;
}

SbarEval sbar_value_and_partials(const Constraint& c, const SystemModel& system, const Vec& x, double u,
                                 DerivativeFallback fallback) {
  SbarEval out;
  const int n = system.n();
  switch (c.kind) {
    case ConstraintKind::input_upper:
      out.value = u - c.bound;
      out.du = 1.0;
      out.dx = Vec::Zero(n);
      break;
    case ConstraintKind::input_lower:
      out.value = c.bound - u;
      out.du = -1.0;
      out.dx = Vec::Zero(n);
      break;
    case ConstraintKind::mixed:
      out.value = c.value(x, u);
      out.du = c.grad_u(x, u);
      out.dx = c.grad_x(x, u);
      break;
    case ConstraintKind::pure_state: {
      const Vec hx = c.grad_x(x, u);
      out.value = hx.dot(system.rhs(x, u));
      out.du = hx.dot(system.g(x));
      if (c.hdot_grad_x) {
        out.dx = c.hdot_grad_x(x, u);
      } else if (fallback == DerivativeFallback::finite_difference) {
        out.dx.resize(n);
        Vec xp = x;
        for (int j = 0; j < n; ++j) {
          const double step = 1e-6 * (1.0 + std::abs(x[j]));
          xp[j] = x[j] + step;
          const double plus = c.grad_x(xp, u).dot(system.rhs(xp, u));
          xp[j] = x[j] - step;
          const double minus = c.grad_x(xp, u).dot(system.rhs(xp, u));
          xp[j] = x[j];
          out.dx[j] = (plus - minus) / (2.0 * step);
        }
        out.finite_difference = true;
      } else {
        throw CapabilityError("state constraint '" + c.name + "' has no hdot gradient and differencing is disabled");
      }
      break;
    }
  }
  return out;
}

double activity_value(const Constraint& c, const Vec& x, double u) {
  switch (c.kind) {
    case ConstraintKind::input_upper: return u - c.bound;
    case ConstraintKind::input_lower: return c.bound - u;
    case ConstraintKind::mixed:
    case ConstraintKind::pure_state: return c.value(x, u);
  }
  return 0.0;
}

double relative_sensitivity(const Constraint& c, const SystemModel& system, const Vec& x, double u, int j) {
  if (j < 0 || j >= system.n()) throw ConfigError("state index out of range in relative_sensitivity");
  const SbarEval e = sbar_value_and_partials(c, system, x, u);
  if (std::abs(e.du) <= kTolDiv) {
    throw DegenerateSensitivity("d sbar/du vanishes for constraint '" + c.name + "'");
  }
  return e.dx[j] / e.du;
}

ScalarField linear_field(Vec w) {
  ScalarField f;
  f.value = [w](const Vec& x) { return w.dot(x); };
  f.grad = [w](const Vec&) { return w; };
  return f;
}

int OCProblem::upper_index() const {
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (constraints[i].kind == ConstraintKind::input_upper) return static_cast<int>(i);
  }
  return -1;
}

int OCProblem::lower_index() const {
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (constraints[i].kind == ConstraintKind::input_lower) return static_cast<int>(i);
  }
  return -1;
}

bool OCProblem::has_pure_state() const {
  return std::any_of(constraints.begin(), constraints.end(),
                     [](const Constraint& c) { return c.kind == ConstraintKind::pure_state; });
}

double OCProblem::stage_cost_value(const Vec& x) const { return stage_cost ? stage_cost->value(x) : 0.0; }

Vec OCProblem::stage_cost_grad(const Vec& x) const {
  return stage_cost ? stage_cost->grad(x) : Vec::Zero(system.n());
}

OCProblem make_problem(std::string name, SystemModel system, Vec x0, double t_f, double u_min, double u_max,
                       ScalarField phi, std::vector<Constraint> path_constraints,
                       std::optional<ScalarField> stage_cost, std::vector<ScalarField> terminal_constraints) {
  OCProblem p{std::move(name), std::move(system), {}, std::move(phi), std::move(stage_cost),
              std::move(terminal_constraints), t_f, std::move(x0), u_min, u_max};
  p.constraints.reserve(path_constraints.size() + 2);
  p.constraints.push_back(Constraint::input_upper(u_max));
  p.constraints.push_back(Constraint::input_lower(u_min));
  for (auto& c : path_constraints) p.constraints.push_back(std::move(c));
  validate(p);
  return p;
}

void validate(const OCProblem& p) {
  if (!(p.u_min < p.u_max)) throw ConfigError("u_min must be smaller than u_max");
  if (!(p.t_f >= 0.0) || !std::isfinite(p.t_f)) throw ConfigError("t_f must be finite and non-negative");
  if (p.x0.size() != p.system.n()) throw ConfigError("x0 dimension does not match the system");
  if (!p.phi.value || !p.phi.grad) throw ConfigError("terminal objective needs value and gradient");
  const int up = p.upper_index();
  const int lo = p.lower_index();
  if (up < 0 || lo < 0) throw ConfigError("constraint list must contain input_upper and input_lower");
  if (p.constraints[up].bound != p.u_max || p.constraints[lo].bound != p.u_min) {
    throw ConfigError("input bound constraints disagree with u_min/u_max");
  }
  for (const auto& z : p.terminal_constraints) {
    if (!z.value || !z.grad) throw ConfigError("terminal constraint needs value and gradient");
  }
}

bool Trajectory::is_event_sample(std::size_t k) const {
  return std::any_of(events.begin(), events.end(), [&](const Event& e) { return e.time == times[k]; });
}

bool Trajectory::near_event(std::size_t k) const {
  for (std::size_t j = (k == 0 ? 0 : k - 1); j <= std::min(k + 1, size() - 1); ++j) {
    if (is_event_sample(j)) return true;
  }
  return false;
}

int active_label(const OCProblem& problem, const Vec& x, double u) {
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    if (is_active(problem.constraints[i], x, u)) return static_cast<int>(i);
  }
  return -1;
}

namespace detail {

double bracketed_root(const Constraint& c, const SystemModel& system, const Vec& x, double lo, double hi,
                      double s_hi, bool require_increasing) {
  double a = lo;
  double b = hi;
  double u = hi;
  double s = s_hi;
  for (int it = 0; it < 100; ++it) {
    const double du = sbar_du(c, system, x, u);
    if (require_increasing && !(du > 0.0)) {
      throw NonMonotoneConstraint("constraint '" + c.name + "' is not increasing in u on the bracket");
    }
    if (!std::isfinite(s) || !std::isfinite(du)) throw NumericalError("non-finite constraint value in root solve");
    if (std::abs(s) <= kTolRide) return u;
    if (s < 0.0) {
      a = u;
    } else {
      b = u;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(a) + std::abs(b))) return a;
    double next = (std::abs(du) > kTolDiv) ? u - s / du : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    u = next;
    s = sbar_value(c, system, x, u);
  }
  return a;
}

}  // namespace detail

MaxFeasible max_feasible_input(const OCProblem& problem, const Vec& x) {
  MaxFeasible best{problem.u_max, problem.upper_index()};
  bool path_binding = false;
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const Constraint& c = problem.constraints[i];
    if (!c.is_path()) continue;
    if (c.kind == ConstraintKind::pure_state && c.value(x, problem.u_max) < -kTolAct) continue;
    const double s_hi = sbar_value(c, problem.system, x, problem.u_max);
    if (!std::isfinite(s_hi)) throw NumericalError("non-finite value of constraint '" + c.name + "'");
    if (s_hi < -kTolAct) continue;
    double root = problem.u_max;
    if (s_hi > kTolAct) {
      const double s_lo = sbar_value(c, problem.system, x, problem.u_min);
      if (s_lo > kTolAct) {
        if (!(sbar_du(c, problem.system, x, problem.u_min) > 0.0)) {
          throw NonMonotoneConstraint("constraint '" + c.name + "' is not increasing in u");
        }
        throw InfeasibleState("constraint '" + c.name + "' is violated at u_min");
      }
      root = s_lo >= 0.0 ? problem.u_min
                         : detail::bracketed_root(c, problem.system, x, problem.u_min, problem.u_max, s_hi, true);
    }
    const double tie = kTolRide * (1.0 + std::abs(root));
    if (!path_binding || root < best.u - tie) {
      best = {root, static_cast<int>(i)};
      path_binding = true;
    } else if (std::abs(root - best.u) <= tie) {
      log::warn("constraints '", problem.constraints[best.binding].name, "' and '", c.name,
                "' bind simultaneously; reporting the lower index");
    }
  }
  best.u = std::clamp(best.u, problem.u_min, problem.u_max);
  return best;
}

}  // namespace bangride
