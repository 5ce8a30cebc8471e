#include "bangride/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bangride/errors.hpp"
#include "bangride/logging.hpp"

namespace bangride {

namespace {

constexpr int kMaxEventsPerStep = 16;

double left_limit(double t, double from) { return std::nextafter(t, from); }

void check_finite(const Vec& x) {
  for (int i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw NumericalError("non-finite state in integration", i);
  }
}

std::vector<char> activity(const OCProblem& problem, const Vec& x, double u) {
  std::vector<char> out(problem.constraints.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = is_active(problem.constraints[i], x, u) ? 1 : 0;
  return out;
}

int lowest_active(const std::vector<char>& act) {
  for (std::size_t i = 0; i < act.size(); ++i) {
    if (act[i]) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

Vec rk4_step(const SystemModel& system, const Vec& x, const ControlLaw& u_of, double t, double dt) {
  if (!(dt > 0.0)) throw ConfigError("rk4_step needs dt > 0");
  const double t_mid = t + 0.5 * dt;
  const double t_end = left_limit(t + dt, t);
  const Vec k1 = system.rhs(x, u_of(t, x));
  const Vec x2 = x + 0.5 * dt * k1;
  const Vec k2 = system.rhs(x2, u_of(t_mid, x2));
  const Vec x3 = x + 0.5 * dt * k2;
  const Vec k3 = system.rhs(x3, u_of(t_mid, x3));
  const Vec x4 = x + dt * k3;
  const Vec k4 = system.rhs(x4, u_of(t_end, x4));
  Vec out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  check_finite(out);
  return out;
}

Bracket bracket_event(const std::function<double(double)>& fun, double t_lo, double t_hi, double tol) {
  if (!(t_lo < t_hi)) throw BracketError("event bracket is empty");
  if (!(tol > 0.0)) throw ConfigError("event tolerance must be positive");
  const double f_lo = fun(t_lo);
  const double f_hi = fun(t_hi);
  if (!(f_lo < 0.0 && f_hi >= 0.0)) throw BracketError("no sign change on the event bracket");
  Bracket b{t_lo, t_hi};
  // Fixed iteration count keeps the result reproducible.
  const int iters = static_cast<int>(std::ceil(std::log2((t_hi - t_lo) / tol)));
  for (int i = 0; i < std::max(iters, 0); ++i) {
    const double mid = 0.5 * (b.lo + b.hi);
    if (mid <= b.lo || mid >= b.hi) break;
    if (fun(mid) < 0.0) {
      b.lo = mid;
    } else {
      b.hi = mid;
    }
  }
  return b;
}

double locate_event(const std::function<double(double)>& fun, double t_lo, double t_hi, double tol) {
  return bracket_event(fun, t_lo, t_hi, tol).hi;
}

std::vector<double> simulation_grid(double t_f, double dt, const std::vector<double>& breakpoints, long max_steps) {
  if (t_f == 0.0) return {0.0};
  const double ratio = t_f / dt;
  const long n = std::max(1L, static_cast<long>(std::ceil(ratio - 1e-9 * ratio)));
  if (n > max_steps) throw ConfigError("step count exceeds max_steps");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n) + 1 + breakpoints.size());
  for (long k = 0; k < n; ++k) grid.push_back(t_f * static_cast<double>(k) / static_cast<double>(n));
  grid.push_back(t_f);
  const double merge_tol = 1e-12 * t_f;
  for (double b : breakpoints) {
    if (!(b > merge_tol && b < t_f - merge_tol)) continue;
    auto it = std::lower_bound(grid.begin(), grid.end(), b);
    if (std::abs(*it - b) <= merge_tol || std::abs(*std::prev(it) - b) <= merge_tol) continue;
    grid.insert(it, b);
  }
  return grid;
}

SimOptions resolve_options(const OCProblem& problem, SimOptions opts) {
  if (opts.dt == 0.0) opts.dt = problem.t_f > 0.0 ? 1e-3 * problem.t_f : 1.0;
  if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) throw ConfigError("dt must be positive");
  if (opts.event_time_tol == 0.0) opts.event_time_tol = 1e-7 * opts.dt;
  if (!(opts.event_time_tol > 0.0 && opts.event_time_tol < opts.dt)) {
    throw ConfigError("event_time_tol must lie in (0, dt)");
  }
  if (opts.max_steps <= 0) throw ConfigError("max_steps must be positive");
  return opts;
}

Trajectory simulate(const OCProblem& problem, const Policy& policy, SimOptions opts) {
  if (!policy.control) throw ConfigError("policy has no control law");
  opts = resolve_options(problem, opts);
  const std::vector<double> grid = simulation_grid(problem.t_f, opts.dt, policy.breakpoints, opts.max_steps);
  const ControlLaw& law = policy.control;

  Trajectory traj;
  traj.times.reserve(grid.size());
  traj.states.reserve(grid.size());
  traj.inputs.reserve(grid.size());
  traj.active.reserve(grid.size());

  auto push = [&](double t, const Vec& x, double u, const std::vector<char>& act) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.inputs.push_back(u);
    traj.active.push_back(lowest_active(act));
  };
  auto log_changes = [&](double t, const std::vector<char>& before, const std::vector<char>& after) {
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (before[i] != after[i]) {
        traj.events.push_back({t, static_cast<int>(i), after[i] ? EventKind::activate : EventKind::deactivate});
        log::debug("event at t=", t, ": ", problem.constraints[i].name, " ", after[i] ? "activates" : "deactivates");
      }
    }
  };

  Vec x = problem.x0;
  check_finite(x);
  double u0 = law(0.0, x);
  std::vector<char> act_left = activity(problem, x, u0);
  push(0.0, x, u0, act_left);

  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t_next = grid[k + 1];
    double t = grid[k];
    std::vector<char> act_start = activity(problem, x, law(t, x));
    if (k > 0) log_changes(t, act_left, act_start);  // policy jump at a grid point
    int events_here = 0;
    while (true) {
      Vec x_end = rk4_step(problem.system, x, law, t, t_next - t);
      const double u_end = law(left_limit(t_next, t), x_end);
      std::vector<char> act_end = activity(problem, x_end, u_end);
      if (!opts.locate_events || act_end == act_start || events_here >= kMaxEventsPerStep) {
        if (events_here >= kMaxEventsPerStep && act_end != act_start) {
          log::warn("event cap reached in step ending at t=", t_next, "; activity change not localized");
        }
        x = std::move(x_end);
        push(t_next, x, u_end, act_end);
        act_left = std::move(act_end);
        break;
      }
      // Localize the earliest activity change among the constraints that flipped.
      const Vec x_start = x;
      const double t_start = t;
      auto state_at = [&](double tau) { return rk4_step(problem.system, x_start, law, t_start, tau - t_start); };
      Bracket first{t_next, t_next};
      for (std::size_t i = 0; i < act_start.size(); ++i) {
        if (act_start[i] == act_end[i]) continue;
        const Constraint& c = problem.constraints[i];
        const char was = act_start[i];
        auto indicator = [&](double tau) {
          if (tau <= t_start) return -1.0;
          const Vec xs = state_at(tau);
          const double ut = law(tau >= t_next ? left_limit(t_next, t_start) : tau, xs);
          return (is_active(c, xs, ut) ? 1 : 0) != was ? 1.0 : -1.0;
        };
        const Bracket b = bracket_event(indicator, t_start, t_next, opts.event_time_tol);
        if (b.hi < first.hi) first = b;
      }
      if (first.hi >= t_next) {
        log_changes(t_next, act_start, act_end);
        x = std::move(x_end);
        push(t_next, x, u_end, act_end);
        act_left = std::move(act_end);
        break;
      }
      if (first.lo > t_start) {
        const Vec x_lo = state_at(first.lo);
        const double u_lo = law(first.lo, x_lo);
        push(first.lo, x_lo, u_lo, activity(problem, x_lo, u_lo));
      }
      const Vec x_tau = state_at(first.hi);
      const double u_tau_left = law(left_limit(first.hi, t_start), x_tau);
      const double u_tau = law(first.hi, x_tau);
      std::vector<char> act_tau = activity(problem, x_tau, u_tau);
      log_changes(first.hi, act_start, act_tau);
      push(first.hi, x_tau, u_tau_left, activity(problem, x_tau, u_tau_left));
      x = x_tau;
      t = first.hi;
      act_start = std::move(act_tau);
      ++events_here;
    }
  }
  return traj;
}

}  // namespace bangride
