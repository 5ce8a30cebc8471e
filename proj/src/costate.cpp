#include "bangride/costate.hpp"

#include <cmath>

#include "bangride/errors.hpp"
#include "bangride/hybridsim.hpp"

namespace bangride {

TerminalCostate terminal_costate(const OCProblem& problem, const Vec& x_tf, const std::optional<Vec>& alpha) {
  TerminalCostate out;
  out.lambda0 = -1.0;
  out.lambda = out.lambda0 * problem.phi.grad(x_tf);
  if (!problem.terminal_constraints.empty()) {
    if (!alpha) throw CapabilityError("terminal constraints need user-supplied multipliers alpha");
    if (alpha->size() != static_cast<long>(problem.terminal_constraints.size())) {
      throw ConfigError("alpha has the wrong length");
    }
    for (std::size_t i = 0; i < problem.terminal_constraints.size(); ++i) {
      if ((*alpha)[static_cast<long>(i)] < 0.0) throw ConfigError("alpha must be non-negative");
      out.lambda += (*alpha)[static_cast<long>(i)] * problem.terminal_constraints[i].grad(x_tf);
    }
  }
  return out;
}

double multiplier(const Constraint& c, const SystemModel& system, const Vec& lambda, const Vec& x, double u) {
  const double du = sbar_du(c, system, x, u);
  if (std::abs(du) <= kTolDiv) throw DegenerateSensitivity("d sbar/du vanishes for constraint '" + c.name + "'");
  const double sigma = switching_function(lambda, system, x);
  if (sigma == 0.0) return 0.0;
  return -sigma / du;
}

double switching_function(const Vec& lambda, const SystemModel& system, const Vec& x) {
  return lambda.dot(system.g(x));
}

double hamiltonian(const OCProblem& problem, const Vec& x, double u, const Vec& lambda, double lambda0) {
  return lambda0 * problem.stage_cost_value(x) + lambda.dot(problem.system.rhs(x, u));
}

int interval_label(const Trajectory& traj, std::size_t k) {
  const int left = traj.active[k];
  const int right = traj.active[k + 1];
  if (left == right) return left;
  return traj.is_event_sample(k + 1) ? left : right;
}

namespace {

/// Input on an arc, rebuilt from its label at an interpolated state.
double arc_input(const OCProblem& problem, int label, const Vec& x, double held) {
  if (label < 0) return held;
  const Constraint& c = problem.constraints[static_cast<std::size_t>(label)];
  if (c.kind == ConstraintKind::input_upper || c.kind == ConstraintKind::input_lower) return c.bound;
  try {
    return ride_input(c, problem.system, x, problem.u_min, problem.u_max);
  } catch (const Error&) {
    return held;
  }
}

struct StagePoint {
  Mat jac_t;  // (F_x - g sbar_x / sbar_u)^T
  Vec forcing;  // -lambda0 l_x
};

StagePoint stage_point(const OCProblem& problem, int label, const Vec& x, double u, double lambda0) {
  StagePoint sp;
  Mat m = problem.system.rhs_jac(x, u);
  if (label >= 0) {
    const Constraint& c = problem.constraints[static_cast<std::size_t>(label)];
    if (c.is_path()) {
      const SbarEval e = sbar_value_and_partials(c, problem.system, x, u);
      if (std::abs(e.du) <= kTolDiv) {
        throw DegenerateSensitivity("d sbar/du vanishes on the active arc of '" + c.name + "'");
      }
      m -= problem.system.g(x) * (e.dx.transpose() / e.du);
    }
  }
  sp.jac_t = m.transpose();
  sp.forcing = -lambda0 * problem.stage_cost_grad(x);
  return sp;
}

}  // namespace

CostateTrajectory costate_integrate(const OCProblem& problem, const Trajectory& traj, const std::optional<Vec>& alpha) {
  if (traj.empty()) throw ConfigError("costate integration needs a non-empty trajectory");
  const std::size_t n_samples = traj.size();
  const TerminalCostate term = terminal_costate(problem, traj.final_state(), alpha);

  CostateTrajectory out;
  out.lambda0 = term.lambda0;
  out.times = traj.times;
  out.lambda.assign(n_samples, Vec());
  out.lambda[n_samples - 1] = term.lambda;

  for (std::size_t k = n_samples - 1; k-- > 0;) {
    const double h = traj.times[k + 1] - traj.times[k];
    const int label = interval_label(traj, k);
    const double held = traj.inputs[k + 1];
    const Vec& x0 = traj.states[k];
    const Vec& x1 = traj.states[k + 1];
    const double u0 = arc_input(problem, label, x0, held);
    const double u1 = arc_input(problem, label, x1, held);
    const Vec f0 = problem.system.rhs(x0, u0);
    const Vec f1 = problem.system.rhs(x1, u1);
    const Vec x_mid = 0.5 * (x0 + x1) + (h / 8.0) * (f0 - f1);
    const double u_mid = arc_input(problem, label, x_mid, held);

    const StagePoint end = stage_point(problem, label, x1, u1, out.lambda0);
    const StagePoint mid = stage_point(problem, label, x_mid, u_mid, out.lambda0);
    const StagePoint start = stage_point(problem, label, x0, u0, out.lambda0);

    // In reversed time s = -t the costate obeys dlambda/ds = jac_t lambda - forcing.
    auto rate = [](const StagePoint& sp, const Vec& lam) -> Vec { return sp.jac_t * lam - sp.forcing; };
    const Vec& lam = out.lambda[k + 1];
    const Vec k1 = rate(end, lam);
    const Vec k2 = rate(mid, lam + 0.5 * h * k1);
    const Vec k3 = rate(mid, lam + 0.5 * h * k2);
    const Vec k4 = rate(start, lam + h * k3);
    Vec next = lam + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (int i = 0; i < next.size(); ++i) {
      if (!std::isfinite(next[i])) throw NumericalError("non-finite costate", i);
    }
    out.lambda[k] = std::move(next);
  }

  out.sigma.resize(n_samples);
  out.mu.resize(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    out.sigma[k] = switching_function(out.lambda[k], problem.system, traj.states[k]);
    const int label = traj.active[k];
    out.mu[k] = label < 0 ? 0.0
                          : multiplier(problem.constraints[static_cast<std::size_t>(label)], problem.system,
                                       out.lambda[k], traj.states[k], traj.inputs[k]);
  }
  return out;
}

}  // namespace bangride
