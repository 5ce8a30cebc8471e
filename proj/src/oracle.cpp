#include "bangride/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "bangride/errors.hpp"
#include "bangride/hybridsim.hpp"
#include "bangride/logging.hpp"

namespace bangride {

namespace {

constexpr int kRandomStarts = 4;

double projected(const OCProblem& problem, double value, const Vec& x) {
  return std::min(value, max_feasible_input(problem, x).u);
}

/// Projected piecewise-constant simulation that keeps the states at segment
/// boundaries, so changing segment j only re-integrates from j onwards.
class SegmentEvaluator {
 public:
  SegmentEvaluator(const OCProblem& problem, int segments, int steps)
      : problem_(problem),
        segments_(segments),
        steps_(steps),
        h_(problem.t_f / (static_cast<double>(segments) * steps)),
        states_(static_cast<std::size_t>(segments) + 1),
        cost_(static_cast<std::size_t>(segments) + 1, 0.0) {
    states_[0] = problem.x0;
  }

  double evaluate(const std::vector<double>& values, int changed_from) {
    const int start = std::min(valid_upto_, changed_from);
    for (int j = start; j < segments_; ++j) advance(j, values[static_cast<std::size_t>(j)]);
    valid_upto_ = segments_;
    return problem_.phi.value(states_.back()) + cost_.back();
  }

  /// Boundary states after segment j no longer match the accepted profile.
  void invalidate(int from) { valid_upto_ = std::min(valid_upto_, from); }

 private:
  void advance(int j, double value) {
    Vec x = states_[static_cast<std::size_t>(j)];
    double cost = cost_[static_cast<std::size_t>(j)];
    if (h_ > 0.0) {
      const ControlLaw law = [&](double, const Vec& s) { return projected(problem_, value, s); };
      const double t0 = problem_.t_f * j / segments_;
      for (int s = 0; s < steps_; ++s) {
        Vec next = rk4_step(problem_.system, x, law, t0 + s * h_, h_);
        if (problem_.stage_cost) cost += 0.5 * h_ * (problem_.stage_cost_value(x) + problem_.stage_cost_value(next));
        x = std::move(next);
      }
    }
    states_[static_cast<std::size_t>(j) + 1] = std::move(x);
    cost_[static_cast<std::size_t>(j) + 1] = cost;
  }

  const OCProblem& problem_;
  int segments_;
  int steps_;
  double h_;
  std::vector<Vec> states_;
  std::vector<double> cost_;
  int valid_upto_ = 0;
};

void check_control(const OCProblem& problem, const PiecewiseControl& ctrl) {
  if (ctrl.values.empty()) throw ConfigError("piecewise control needs at least one segment");
  for (double v : ctrl.values) {
    if (!(v >= problem.u_min && v <= problem.u_max)) throw ConfigError("piecewise control value outside [u_min, u_max]");
  }
}

double arc_control(const OCProblem& problem, const Arc& arc, const Vec& x) {
  switch (arc.kind) {
    case ArcKind::min: return projected(problem, problem.u_min, x);
    case ArcKind::max: return max_feasible_input(problem, x).u;
    case ArcKind::ride: {
      const double cap = max_feasible_input(problem, x).u;
      try {
        const Constraint& c = problem.constraints.at(static_cast<std::size_t>(arc.constraint));
        return std::min(ride_input(c, problem.system, x, problem.u_min, problem.u_max), cap);
      } catch (const BracketError&) {
        return cap;
      }
    }
  }
  return problem.u_max;
}

/// Golden-section minimization of f on [lo, hi].
template <class F>
std::pair<double, double> golden(F&& f, double lo, double hi, double tol) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - ratio * (hi - lo);
  double d = lo + ratio * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - ratio * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + ratio * (hi - lo);
      fd = f(d);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

/// Grid search then golden refinement of one coordinate on [lo, hi].
template <class F>
std::pair<double, double> line_search(F&& f, double lo, double hi, int points, double tol) {
  if (!(hi > lo)) return {lo, f(lo)};
  double best_t = lo, best_f = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < points; ++i) {
    const double t = lo + (hi - lo) * i / (points - 1);
    const double v = f(t);
    if (v < best_f) {
      best_f = v;
      best_t = t;
      best_i = i;
    }
  }
  const double step = (hi - lo) / (points - 1);
  const double a = std::max(lo, lo + (best_i - 1) * step);
  const double b = std::min(hi, lo + (best_i + 1) * step);
  const auto [t, v] = golden(f, a, b, tol);
  if (v < best_f) return {t, v};
  return {best_t, best_f};
}

}  // namespace

double trajectory_objective(const OCProblem& problem, const Trajectory& traj) {
  double cost = 0.0;
  if (problem.stage_cost) {
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
      cost += 0.5 * (traj.times[k + 1] - traj.times[k]) *
              (problem.stage_cost_value(traj.states[k]) + problem.stage_cost_value(traj.states[k + 1]));
    }
  }
  return problem.phi.value(traj.final_state()) + cost;
}

Policy projected_policy(const OCProblem& problem, const PiecewiseControl& ctrl) {
  check_control(problem, ctrl);
  const int n = ctrl.segments();
  Policy p;
  std::vector<double> bounds;
  for (int j = 1; j < n; ++j) bounds.push_back(problem.t_f * j / n);
  p.breakpoints = bounds;
  p.control = [&problem, values = ctrl.values, bounds](double t, const Vec& x) {
    const auto j = static_cast<std::size_t>(std::upper_bound(bounds.begin(), bounds.end(), t) - bounds.begin());
    return projected(problem, values[j], x);
  };
  return p;
}

Trajectory candidate_trajectory(const OCProblem& problem, const PiecewiseControl& ctrl, OracleOptions opts) {
  SimOptions sim;
  sim.dt = problem.t_f > 0.0 ? problem.t_f / (static_cast<double>(ctrl.segments()) * opts.steps_per_segment) : 1.0;
  sim.locate_events = problem.has_pure_state();
  return simulate(problem, projected_policy(problem, ctrl), sim);
}

CandidateResult evaluate_candidate(const OCProblem& problem, const PiecewiseControl& ctrl, OracleOptions opts) {
  const Trajectory traj = candidate_trajectory(problem, ctrl, opts);
  CandidateResult r;
  r.objective = trajectory_objective(problem, traj);
  const int n = ctrl.segments();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    // Segment of the held value that produced this sample (left limit).
    const double pos = problem.t_f > 0.0 ? std::ceil(t / problem.t_f * n) - 1.0 : 0.0;
    const int j = static_cast<int>(std::clamp(pos, 0.0, static_cast<double>(n - 1)));
    const double raw = ctrl.values[static_cast<std::size_t>(j)];
    for (const auto& c : problem.constraints) {
      if (!c.is_path()) continue;
      if (c.kind == ConstraintKind::pure_state && c.value(traj.states[k], raw) < -kTolAct) continue;
      r.max_violation = std::max(r.max_violation, sbar_value(c, problem.system, traj.states[k], raw));
    }
  }
  return r;
}

SearchResult direct_search(const OCProblem& problem, int segments, long budget, std::uint64_t seed,
                           OracleOptions opts) {
  if (segments < 1) throw ConfigError("direct_search needs at least one segment");
  if (budget < 1) throw ConfigError("direct_search needs a positive budget");
  const double range = problem.u_max - problem.u_min;
  const double floor = 1e-4 * range;

  std::vector<std::vector<double>> starts;
  starts.emplace_back(static_cast<std::size_t>(segments), problem.u_max);
  starts.emplace_back(static_cast<std::size_t>(segments), problem.u_min);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pick(problem.u_min, problem.u_max);
  for (int r = 0; r < kRandomStarts; ++r) {
    std::vector<double> v(static_cast<std::size_t>(segments));
    for (auto& e : v) e = pick(rng);
    starts.push_back(std::move(v));
  }

  SearchResult result;
  result.objective = std::numeric_limits<double>::infinity();
  long remaining = budget;
  const int n_starts = static_cast<int>(starts.size());
  for (int s = 0; s < n_starts && remaining > 0; ++s) {
    const long alloc = std::max(1L, remaining / (n_starts - s));
    long used = 0;
    std::vector<double> values = starts[static_cast<std::size_t>(s)];
    SegmentEvaluator eval(problem, segments, opts.steps_per_segment);
    double best = eval.evaluate(values, 0);
    ++used;
    double step = 0.5 * range;
    while (step >= floor && used < alloc) {
      bool improved = false;
      for (int j = 0; j < segments && used < alloc; ++j) {
        auto& v = values[static_cast<std::size_t>(j)];
        for (double dir : {1.0, -1.0}) {
          if (used >= alloc) break;
          const double cand = std::clamp(v + dir * step, problem.u_min, problem.u_max);
          if (cand == v) continue;
          const double old = v;
          v = cand;
          const double f = eval.evaluate(values, j);
          ++used;
          if (f < best) {
            best = f;
            improved = true;
            break;
          }
          v = old;
          eval.invalidate(j);
        }
      }
      if (!improved) step *= 0.5;
    }
    remaining -= used;
    result.evaluations += used;
    log::debug("direct_search start ", s, ": objective ", best, " after ", used, " evaluations");
    if (best < result.objective) {
      result.objective = best;
      result.best = PiecewiseControl{values};
      result.best_start = s;
    }
  }
  // Report the value of the exported candidate trajectory rather than the
  // cached segment sums, which differ from it by rounding.
  result.objective = evaluate_candidate(problem, result.best, opts).objective;
  return result;
}

double pattern_objective(const OCProblem& problem, const std::vector<Arc>& pattern,
                         const std::vector<double>& switch_times, SwitchSearchOptions opts) {
  if (pattern.empty() || pattern.size() > 4) throw ConfigError("arc pattern must have between 1 and 4 arcs");
  if (switch_times.size() + 1 != pattern.size()) throw ConfigError("pattern needs one switch time per arc boundary");
  Policy p;
  p.breakpoints = switch_times;
  p.control = [&problem, &pattern, times = switch_times](double t, const Vec& x) {
    const auto i = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    return arc_control(problem, pattern[i], x);
  };
  SimOptions sim;
  sim.dt = opts.dt > 0.0 ? opts.dt : (problem.t_f > 0.0 ? problem.t_f / 1000.0 : 1.0);
  sim.locate_events = false;
  return trajectory_objective(problem, simulate(problem, p, sim));
}

SwitchResult switch_time_search(const OCProblem& problem, const std::vector<Arc>& pattern,
                                std::pair<double, double> bounds, SwitchSearchOptions opts) {
  if (pattern.empty() || pattern.size() > 4) throw ConfigError("arc pattern must have between 1 and 4 arcs");
  auto [lo, hi] = bounds;
  lo = std::max(lo, 0.0);
  hi = std::min(hi, problem.t_f);
  if (!(lo <= hi)) throw ConfigError("switch time bounds are empty");
  const std::size_t n_switch = pattern.size() - 1;
  SwitchResult r;
  if (n_switch == 0) {
    r.objective = pattern_objective(problem, pattern, {}, opts);
    return r;
  }
  const double tol = 1e-6 * std::max(hi - lo, 1e-300);
  std::vector<double> times(n_switch);
  for (std::size_t i = 0; i < n_switch; ++i) times[i] = lo + (hi - lo) * (i + 1) / (n_switch + 1);
  if (n_switch == 1) {
    auto f = [&](double t) { return pattern_objective(problem, pattern, {t}, opts); };
    const auto [t, v] = line_search(f, lo, hi, opts.grid_points, tol);
    r.switch_times = {t};
    r.objective = v;
    return r;
  }
  double best = pattern_objective(problem, pattern, times, opts);
  const int coarse = std::max(5, opts.grid_points / 4);
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (std::size_t i = 0; i < n_switch; ++i) {
      const double a = i == 0 ? lo : times[i - 1];
      const double b = i + 1 == n_switch ? hi : times[i + 1];
      auto f = [&](double t) {
        std::vector<double> trial = times;
        trial[i] = t;
        return pattern_objective(problem, pattern, trial, opts);
      };
      const auto [t, v] = line_search(f, a, b, coarse, tol);
      if (v < best) {
        best = v;
        times[i] = t;
      }
    }
  }
  r.switch_times = times;
  r.objective = best;
  return r;
}

}  // namespace bangride
