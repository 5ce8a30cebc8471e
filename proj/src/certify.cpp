#include "bangride/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bangride/errors.hpp"
#include "bangride/logging.hpp"

namespace bangride {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRankRelTol = 1e-9;
constexpr double kMetzlerTol = 1e-12;
constexpr double kMaxFeasibleTol = 1e-6;
constexpr double kAeFraction = 1e-3;

/// Accumulates a per-sample margin (>= 0 satisfied) and the violating samples.
class SampleCheck {
 public:
  explicit SampleCheck(std::string name) : name_(std::move(name)) {}

  void observe(std::size_t k, double t, double margin) {
    seen_ = true;
    if (margin < worst_) {
      worst_ = margin;
      worst_time_ = t;
    }
    if (margin < 0.0) bad_.push_back(k);
  }

  bool seen() const { return seen_; }
  const std::vector<std::size_t>& violations() const { return bad_; }

  CheckResult finish(const Trajectory& traj, bool allow_ae, const std::string& what) const {
    CheckResult r;
    r.name = name_;
    if (!seen_) {
      r.status = CheckStatus::pass;
      r.margin = 0.0;
      r.worst_time = std::numeric_limits<double>::quiet_NaN();
      r.message = "vacuous: no samples to check";
      return r;
    }
    r.margin = worst_;
    r.worst_time = worst_time_;
    const bool ok = bad_.empty() || (allow_ae && almost_everywhere(traj, bad_));
    r.status = ok ? CheckStatus::pass : CheckStatus::fail;
    std::ostringstream msg;
    msg << what;
    if (!bad_.empty()) msg << "; violated at " << bad_.size() << " sample(s)" << (ok ? " next to events" : "");
    r.message = msg.str();
    return r;
  }

 private:
  std::string name_;
  bool seen_ = false;
  double worst_ = kInf;
  double worst_time_ = 0.0;
  std::vector<std::size_t> bad_;
};

CheckResult make_check(std::string name, bool ok, double margin, double worst_time, std::string message) {
  return {std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, margin, worst_time, std::move(message)};
}

CheckResult skipped(std::string name, std::string message) {
  return {std::move(name), CheckStatus::skipped, std::numeric_limits<double>::quiet_NaN(),
          std::numeric_limits<double>::quiet_NaN(), std::move(message)};
}

/// Path constraint labelling sample k, if any.
const Constraint* active_path(const OCProblem& problem, const Trajectory& traj, std::size_t k) {
  const int label = traj.active[k];
  if (label < 0) return nullptr;
  const Constraint& c = problem.constraints[static_cast<std::size_t>(label)];
  return c.is_path() ? &c : nullptr;
}

double partial_scale(const SbarEval& e) { return std::abs(e.du) + e.dx.cwiseAbs().maxCoeff(); }

bool all_pass(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.failed(); });
}

void append(std::vector<CheckResult>& into, std::vector<CheckResult> more) {
  for (auto& c : more) into.push_back(std::move(c));
}

/// Tie tolerance for comparing terminal costate entries.
double lambda_tie(const Vec& lam) { return 1e-12 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300); }

/// Pairs (k, j) with lambda_k >= lambda_j under the tie tolerance.
bool lambda_geq(const Vec& lam, int k, int j, double tie) { return lam[k] - lam[j] >= -tie; }

void require_linear_diagonal(const OCProblem& problem, const char* what) {
  if (!problem.system.is_linear_diagonal()) {
    throw CapabilityError(std::string(what) + " needs a linear_diagonal system");
  }
}

std::string pair_text(int k, int j) {
  std::ostringstream os;
  os << "(" << k + 1 << "," << j + 1 << ")";
  return os.str();
}

}  // namespace

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::necessary_conditions_satisfied: return "necessary_conditions_satisfied";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(Route r) {
  switch (r) {
    case Route::none: return "none";
    case Route::monotone_system: return "monotone_system";
    case Route::linear_ordering: return "linear_ordering";
    case Route::special_linear: return "special_linear";
  }
  return "?";
}

const CheckResult* Certificate::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

nlohmann::json Certificate::to_json() const {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json out;
  out["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    out["checks"].push_back({{"name", c.name},
                             {"status", to_string(c.status)},
                             {"margin", num(c.margin)},
                             {"worst_time", num(c.worst_time)},
                             {"message", c.message}});
  }
  out["verdict"] = to_string(verdict);
  out["route"] = to_string(route);
  out["min_sigma"] = num(min_sigma);
  out["coverage"] = num(coverage);
  return out;
}

bool almost_everywhere(const Trajectory& traj, const std::vector<std::size_t>& violations) {
  if (violations.empty()) return true;
  if (!std::all_of(violations.begin(), violations.end(), [&](std::size_t k) { return traj.near_event(k); })) {
    return false;
  }
  // Samples far closer together than a nominal step (an event sample and its
  // pre-event companion) describe one switching instant and count once.
  const double nominal = (traj.times.back() - traj.times.front()) / static_cast<double>(std::max<std::size_t>(traj.size() - 1, 1));
  const double merge = 1e-5 * nominal;
  std::size_t instants = 0;
  double last = -std::numeric_limits<double>::infinity();
  for (std::size_t k : violations) {
    if (traj.times[k] - last > merge) ++instants;
    last = traj.times[k];
  }
  return static_cast<double>(instants) < kAeFraction * static_cast<double>(traj.size());
}

StructureReport trajectory_structure(const OCProblem& problem, const Trajectory& traj) {
  StructureReport r;
  if (traj.empty()) return r;
  std::size_t covered = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (traj.active[k] >= 0) ++covered;
    double gap;
    try {
      gap = std::abs(traj.inputs[k] - max_feasible_input(problem, traj.states[k]).u);
    } catch (const Error&) {
      gap = kInf;
    }
    if (gap > r.max_feasible_violation) {
      r.max_feasible_violation = gap;
      r.worst_time = traj.times[k];
    }
  }
  r.coverage = static_cast<double>(covered) / static_cast<double>(traj.size());
  return r;
}

std::vector<CheckResult> check_regularity(const OCProblem& problem, const Trajectory& traj) {
  std::vector<CheckResult> out;
  const auto& cons = problem.constraints;
  std::vector<std::size_t> pure, other;
  for (std::size_t i = 0; i < cons.size(); ++i) {
    (cons[i].kind == ConstraintKind::pure_state ? pure : other).push_back(i);
  }
  const long rows = static_cast<long>(cons.size());
  const long cols = 1 + rows;

  // Rank of [hdot_u diag(hdot) 0; s_u 0 diag(s)] with unit rows.
  SampleCheck rank("regularity_rank");
  std::size_t full = 0;
  Mat m(rows, cols);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vec& x = traj.states[k];
    const double u = traj.inputs[k];
    m.setZero();
    long r = 0;
    for (std::size_t i : pure) {
      m(r, 0) = sbar_du(cons[i], problem.system, x, u);
      m(r, 1 + r) = sbar_value(cons[i], problem.system, x, u);
      ++r;
    }
    for (std::size_t i : other) {
      m(r, 0) = sbar_du(cons[i], problem.system, x, u);
      m(r, 1 + r) = sbar_value(cons[i], problem.system, x, u);
      ++r;
    }
    for (long i = 0; i < rows; ++i) {
      const double norm = m.row(i).norm();
      if (norm > 0.0) m.row(i) /= norm;
    }
    const Vec sv = Eigen::JacobiSVD<Mat>(m).singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    const long rk = (sv.array() > kRankRelTol * smax).count();
    if (rk == rows) ++full;
    rank.observe(k, traj.times[k], rk == rows ? 0.0 : -1.0);
  }
  CheckResult rank_res = rank.finish(traj, true, "active constraint gradients");
  rank_res.margin = traj.empty() ? 1.0 : static_cast<double>(full) / static_cast<double>(traj.size());
  rank_res.message += "; margin is the full-rank sample fraction";
  out.push_back(std::move(rank_res));

  if (pure.empty()) {
    out.push_back(skipped("state_constraint_entry_jump", "no pure state constraints"));
    out.push_back(skipped("state_constraint_boundary_switching", "no pure state constraints"));
  } else {
    const double jump_tol = 1e-6 * (problem.u_max - problem.u_min);
    double worst = kInf;
    double worst_t = std::numeric_limits<double>::quiet_NaN();
    bool any = false;
    bool boundary_ok = true;
    double boundary_t = std::numeric_limits<double>::quiet_NaN();
    for (const Event& e : traj.events) {
      const Constraint& c = cons[static_cast<std::size_t>(e.constraint)];
      if (c.kind != ConstraintKind::pure_state) continue;
      if (e.time <= traj.times.front() || e.time >= traj.times.back()) {
        boundary_ok = false;
        boundary_t = e.time;
      }
      if (e.kind != EventKind::activate) continue;
      auto it = std::lower_bound(traj.times.begin(), traj.times.end(), e.time);
      if (it == traj.times.end()) continue;
      const auto k = static_cast<std::size_t>(it - traj.times.begin());
      const double before = traj.inputs[k == 0 ? 0 : k - 1];
      const double after = traj.inputs[std::min(k + 1, traj.size() - 1)];
      const double jump = std::abs(after - before);
      any = true;
      if (jump - jump_tol < worst) {
        worst = jump - jump_tol;
        worst_t = e.time;
      }
    }
    if (any) {
      out.push_back(make_check("state_constraint_entry_jump", worst >= 0.0, worst, worst_t,
                               "input jump at state constraint entry times"));
    } else {
      out.push_back(make_check("state_constraint_entry_jump", true, 0.0, worst_t, "vacuous: no entry times"));
    }
    out.push_back(make_check("state_constraint_boundary_switching", boundary_ok, boundary_ok ? 0.0 : -1.0, boundary_t,
                             boundary_ok ? "no state constraint switching at 0 or t_f"
                                         : "state constraint switches at the horizon boundary"));
  }

  if (problem.terminal_constraints.empty()) {
    out.push_back(skipped("terminal_regularity", "no terminal constraints"));
  } else {
    const Vec& xf = traj.final_state();
    std::vector<Vec> grads;
    for (const auto& z : problem.terminal_constraints) {
      if (z.value(xf) <= kTolAct) grads.push_back(z.grad(xf));
    }
    bool ok = true;
    if (!grads.empty()) {
      Mat g(static_cast<long>(grads.size()), problem.system.n());
      for (std::size_t i = 0; i < grads.size(); ++i) {
        const double norm = grads[i].norm();
        g.row(static_cast<long>(i)) = norm > 0.0 ? Vec(grads[i] / norm) : grads[i];
      }
      const Vec sv = Eigen::JacobiSVD<Mat>(g).singularValues();
      const long rk = (sv.array() > kRankRelTol * (sv.size() ? sv[0] : 0.0)).count();
      ok = rk == static_cast<long>(grads.size());
    }
    out.push_back(make_check("terminal_regularity", ok, ok ? 0.0 : -1.0, traj.times.back(),
                             "active terminal constraint gradients"));
  }
  return out;
}

std::vector<CheckResult> check_monotonicity(const OCProblem& problem, const Trajectory& traj, SignMode mode) {
  const double sign = mode == SignMode::positive ? 1.0 : -1.0;
  const std::string prefix = mode == SignMode::positive ? "monotone_positive." : "monotone_flipped.";
  const int n = problem.system.n();

  SampleCheck gain(prefix + "input_gain");
  SampleCheck metzler(prefix + "metzler");
  SampleCheck cost(prefix + "stage_cost");
  SampleCheck path_u(prefix + "path_input_sensitivity");
  SampleCheck path_x(prefix + "path_state_sensitivity");

  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vec& x = traj.states[k];
    const double u = traj.inputs[k];
    const double t = traj.times[k];
    gain.observe(k, t, (sign * problem.system.g(x)).minCoeff());
    if (problem.system.is_linear_diagonal()) {
      metzler.observe(k, t, kMetzlerTol);
    } else {
      const Mat fx = problem.system.rhs_jac(x, u);
      double off = kInf;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j) off = std::min(off, fx(i, j));
        }
      }
      metzler.observe(k, t, n > 1 ? off + kMetzlerTol : kMetzlerTol);
    }
    if (problem.stage_cost) cost.observe(k, t, -(sign * problem.stage_cost->grad(x)).maxCoeff());
    if (const Constraint* c = active_path(problem, traj, k)) {
      const SbarEval e = sbar_value_and_partials(*c, problem.system, x, u);
      path_u.observe(k, t, e.du);
      path_x.observe(k, t, -(sign * e.dx).maxCoeff() + 1e-12 * partial_scale(e));
    }
  }

  std::vector<CheckResult> out;
  out.push_back(gain.finish(traj, true, mode == SignMode::positive ? "g(x) > 0" : "g(x) < 0"));
  {
    CheckResult r = metzler.finish(traj, false, "off-diagonal entries of F_x non-negative");
    if (r.status == CheckStatus::fail) {
      r.margin -= kMetzlerTol;
    }
    out.push_back(std::move(r));
  }
  out.push_back(cost.finish(traj, true, mode == SignMode::positive ? "l_x <= 0" : "l_x >= 0"));
  out.push_back(path_u.finish(traj, true, "d sbar/du > 0 on active path arcs"));
  out.push_back(path_x.finish(traj, true,
                              mode == SignMode::positive ? "d sbar/dx <= 0 on active path arcs"
                                                         : "d sbar/dx >= 0 on active path arcs"));

  // Terminal components with a non-zero multiplier: the objective always, each
  // terminal constraint when it is active at t_f.
  const Vec& xf = traj.final_state();
  double term_margin = -(sign * problem.phi.grad(xf)).maxCoeff();
  const double scale = std::max(problem.phi.grad(xf).cwiseAbs().maxCoeff(), 1.0);
  for (const auto& z : problem.terminal_constraints) {
    if (z.value(xf) <= kTolAct) term_margin = std::min(term_margin, -(sign * z.grad(xf)).maxCoeff());
  }
  term_margin += 1e-12 * scale;
  out.push_back(make_check(prefix + "terminal", term_margin >= 0.0, term_margin, traj.times.back(),
                           mode == SignMode::positive ? "terminal gradients <= 0" : "terminal gradients >= 0"));
  return out;
}

std::vector<CheckResult> check_linear_ordering(const OCProblem& problem, const Trajectory& traj,
                                               const CostateTrajectory& costate) {
  require_linear_diagonal(problem, "check_linear_ordering");
  const Vec& a = problem.system.diagonal();
  const Vec& lam = costate.lambda.back();
  const int n = problem.system.n();
  const double tie = lambda_tie(lam);
  const double tf = traj.times.back();
  std::vector<CheckResult> out;

  // (a) some strictly ordered pair in both lambda(t_f) and the rates.
  {
    double best = -kInf;
    int bk = -1, bj = -1;
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        if (k == j) continue;
        const double m = std::min(lam[k] - lam[j] - tie, a[k] - a[j]);
        if (m > best) {
          best = m;
          bk = k;
          bj = j;
        }
      }
    }
    const bool ok = best > 0.0;
    out.push_back(make_check("linear_ordering.strict_pair", ok, n > 1 ? best : -kInf, tf,
                             ok ? "strict pair " + pair_text(bk, bj) : "no pair with lambda_k > lambda_j and a_k > a_j"));
  }

  // (b) a_k >= a_j whenever lambda_k >= lambda_j.
  {
    double worst = kInf;
    int wk = -1, wj = -1;
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        if (k == j || !lambda_geq(lam, k, j, tie)) continue;
        const double m = a[k] - a[j];
        if (m < worst) {
          worst = m;
          wk = k;
          wj = j;
        }
      }
    }
    const bool ok = worst >= 0.0;
    std::string msg = "rates ordered like lambda(t_f)";
    if (!ok) {
      std::ostringstream os;
      os << "violating pair " << pair_text(wk, wj) << ": lambda_" << wk + 1 << " = " << lam[wk] << " >= lambda_"
         << wj + 1 << " = " << lam[wj] << " but a_" << wk + 1 << " = " << a[wk] << " < a_" << wj + 1 << " = "
         << a[wj];
      msg = os.str();
    }
    out.push_back(make_check("linear_ordering.rate_order", ok, n > 1 ? worst : 0.0, tf, msg));
  }

  // (c) on active path arcs: d sbar/du > 0 and p_k <= p_j whenever lambda_k >= lambda_j.
  SampleCheck input_sens("linear_ordering.input_sensitivity");
  SampleCheck rel_sens("linear_ordering.relative_sensitivity");
  std::string first_pair;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Constraint* c = active_path(problem, traj, k);
    if (!c) continue;
    const SbarEval e = sbar_value_and_partials(*c, problem.system, traj.states[k], traj.inputs[k]);
    input_sens.observe(k, traj.times[k], e.du);
    if (!(std::abs(e.du) > kTolDiv)) {
      rel_sens.observe(k, traj.times[k], -kInf);
      continue;
    }
    const Vec p = e.dx / e.du;
    const double ptol = 1e-10 * std::max(p.cwiseAbs().maxCoeff(), 1e-300);
    double worst = kInf;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j || !lambda_geq(lam, i, j, tie)) continue;
        const double m = p[j] - p[i] + ptol;
        if (m < worst) {
          worst = m;
          if (m < 0.0 && first_pair.empty()) {
            std::ostringstream os;
            os << "first violating pair " << pair_text(i, j) << " at t = " << traj.times[k];
            first_pair = os.str();
          }
        }
      }
    }
    if (worst < kInf) rel_sens.observe(k, traj.times[k], worst);
  }
  out.push_back(input_sens.finish(traj, true, "d sbar/du > 0 on active path arcs"));
  out.push_back(rel_sens.finish(traj, true,
                                first_pair.empty() ? "relative sensitivities ordered against lambda(t_f)" : first_pair));
  return out;
}

std::vector<CheckResult> check_special_linear(const OCProblem& problem, const Trajectory& traj,
                                              const CostateTrajectory& costate) {
  require_linear_diagonal(problem, "check_special_linear");
  const Vec& a = problem.system.diagonal();
  const Vec& lam = costate.lambda.back();
  const int n = problem.system.n();
  const double tie = lambda_tie(lam);
  const double tf = traj.times.back();
  std::vector<CheckResult> out;

  // (a) exactly one positive entry, the rest zero.
  int lead = -1;
  int positives = 0;
  double zero_margin = kInf;
  for (int j = 0; j < n; ++j) {
    if (lam[j] > tie) {
      ++positives;
      lead = j;
    }
  }
  for (int j = 0; j < n; ++j) {
    if (j != lead) zero_margin = std::min(zero_margin, tie - std::abs(lam[j]));
  }
  const bool a_ok = positives == 1 && (n == 1 || zero_margin >= 0.0);
  {
    std::ostringstream os;
    if (a_ok) {
      os << "lambda_" << lead + 1 << "(t_f) = " << lam[lead] << " > 0, other entries zero";
    } else {
      os << positives << " positive entries in lambda(t_f)";
    }
    out.push_back(make_check("special_linear.terminal_costate", a_ok, a_ok ? lam[lead] : -1.0, tf, os.str()));
  }

  // (b) the lead state has the largest rate, strictly larger than a state the
  // constraint is sensitive to on the last active arc.
  if (!a_ok) {
    out.push_back(skipped("special_linear.dominant_rate", "no single positive terminal costate entry"));
    out.push_back(skipped("special_linear.strict_rate", "no single positive terminal costate entry"));
  } else {
    double worst = kInf;
    int wj = -1;
    for (int j = 0; j < n; ++j) {
      if (j == lead) continue;
      if (a[lead] - a[j] < worst) {
        worst = a[lead] - a[j];
        wj = j;
      }
    }
    const bool dom_ok = n == 1 || worst >= 0.0;
    std::string msg = "a_lead >= a_j for all j";
    if (!dom_ok) {
      std::ostringstream os;
      os << "a_" << lead + 1 << " = " << a[lead] << " < a_" << wj + 1 << " = " << a[wj];
      msg = os.str();
    }
    out.push_back(make_check("special_linear.dominant_rate", dom_ok, n == 1 ? 0.0 : worst, tf, msg));

    // Last maximal run of samples riding a path constraint over a non-zero interval.
    std::size_t begin = 0, end = 0;
    bool arc_ok = false;
    for (std::size_t k = 0; k < traj.size();) {
      if (!active_path(problem, traj, k)) {
        ++k;
        continue;
      }
      const std::size_t b = k;
      while (k < traj.size() && active_path(problem, traj, k)) ++k;
      if (traj.times[k - 1] > traj.times[b]) {
        begin = b;
        end = k;
        arc_ok = true;
      }
    }
    std::vector<char> sensitive(static_cast<std::size_t>(n), 1);
    if (arc_ok) {
      for (std::size_t k = begin; k < end; ++k) {
        const Constraint* c = active_path(problem, traj, k);
        const SbarEval e = sbar_value_and_partials(*c, problem.system, traj.states[k], traj.inputs[k]);
        const double floor = 1e-12 * partial_scale(e);
        for (int j = 0; j < n; ++j) {
          if (!(e.dx[j] > floor)) sensitive[static_cast<std::size_t>(j)] = 0;
        }
      }
    }
    int strict = -1;
    bool any_sensitive = false;
    if (arc_ok) {
      for (int j = 0; j < n; ++j) {
        if (j == lead || !sensitive[static_cast<std::size_t>(j)]) continue;
        any_sensitive = true;
        if (a[lead] > a[j]) {
          strict = j;
          break;
        }
      }
    }
    if (!arc_ok || !any_sensitive) {
      out.push_back(make_check("special_linear.strict_rate", true, 0.0, std::numeric_limits<double>::quiet_NaN(),
                               "vacuous: no state with positive constraint sensitivity on the last active arc"));
    } else if (strict >= 0) {
      std::ostringstream os;
      os << "strict pair a_" << lead + 1 << " = " << a[lead] << " > a_" << strict + 1 << " = " << a[strict];
      out.push_back(make_check("special_linear.strict_rate", true, a[lead] - a[strict], traj.times[begin], os.str()));
    } else {
      out.push_back(make_check("special_linear.strict_rate", false, -1.0, traj.times[begin],
                               "no sensitive state on the last active arc has a rate below the lead rate"));
    }
  }

  // (c) d sbar/du > 0 and d sbar/dx >= 0 on active path arcs.
  SampleCheck mono("special_linear.path_monotone");
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Constraint* c = active_path(problem, traj, k);
    if (!c) continue;
    const SbarEval e = sbar_value_and_partials(*c, problem.system, traj.states[k], traj.inputs[k]);
    mono.observe(k, traj.times[k], std::min(e.du, e.dx.minCoeff() + 1e-12 * partial_scale(e)));
  }
  out.push_back(mono.finish(traj, true, "d sbar/du > 0 and d sbar/dx >= 0 on active path arcs"));
  return out;
}

int kalman_rank(const Mat& a, const Vec& b) {
  const long n = b.size();
  if (a.rows() != n || a.cols() != n) throw ConfigError("kalman_rank: dimension mismatch");
  if (n == 0) return 0;
  Mat ctrb(n, n);
  Vec col = b;
  for (long j = 0; j < n; ++j) {
    ctrb.col(j) = col;
    col = a * col;
  }
  const Vec sv = Eigen::JacobiSVD<Mat>(ctrb).singularValues();
  const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * sv[0];
  return static_cast<int>((sv.array() > tol).count());
}

int kalman_rank(const Vec& diagonal, const Vec& b) { return kalman_rank(Mat(diagonal.asDiagonal()), b); }

Certificate certify_necessary_optimality(const OCProblem& problem, const Trajectory& traj,
                                         const std::optional<Vec>& alpha) {
  if (traj.empty()) throw ConfigError("cannot certify an empty trajectory");
  Certificate cert;
  cert.costate = costate_integrate(problem, traj, alpha);
  const StructureReport st = trajectory_structure(problem, traj);
  cert.coverage = st.coverage;
  cert.max_feasible_violation = st.max_feasible_violation;

  {
    SampleCheck cov("bang_ride_coverage");
    for (std::size_t k = 0; k < traj.size(); ++k) cov.observe(k, traj.times[k], traj.active[k] >= 0 ? 0.0 : -1.0);
    CheckResult r = cov.finish(traj, true, "samples with an active constraint");
    r.margin = st.coverage;
    cert.checks.push_back(std::move(r));
  }
  const bool mf_ok = st.max_feasible_violation <= kMaxFeasibleTol;
  cert.checks.push_back(make_check("max_feasible_input", mf_ok, kMaxFeasibleTol - st.max_feasible_violation,
                                   st.worst_time, "max_k |u_k - max D(x_k)| <= 1e-6"));

  SampleCheck sig("switching_function_positive");
  double min_all = kInf, min_ae = kInf;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double s = cert.costate.sigma[k];
    sig.observe(k, traj.times[k], s > 0.0 ? s : -1.0);  // sigma = 0 counts as a violation
    min_all = std::min(min_all, s);
    if (!traj.near_event(k)) min_ae = std::min(min_ae, s);
  }
  const CheckResult sigma_res = [&] {
    CheckResult r = sig.finish(traj, true, "lambda^T g > 0");
    r.margin = min_all;
    return r;
  }();
  const bool sigma_ok = sigma_res.passed();
  cert.min_sigma = (sigma_ok && min_ae < kInf) ? min_ae : min_all;
  cert.checks.push_back(sigma_res);

  const std::vector<CheckResult> regularity = check_regularity(problem, traj);
  append(cert.checks, regularity);
  const bool regular = all_pass(regularity);

  if (problem.system.is_linear_diagonal()) {
    const int rk = kalman_rank(problem.system.diagonal(), Vec::Ones(problem.system.n()));
    std::ostringstream os;
    os << "controllability rank " << rk << " of " << problem.system.n() << " (informational)";
    cert.checks.push_back(make_check("controllability_rank", rk == problem.system.n(),
                                     static_cast<double>(rk - problem.system.n()), 0.0, os.str()));
  } else {
    cert.checks.push_back(skipped("controllability_rank", "only evaluated for linear_diagonal systems"));
  }

  Route chosen = Route::none;
  const auto positive = check_monotonicity(problem, traj, SignMode::positive);
  const auto flipped = check_monotonicity(problem, traj, SignMode::flipped);
  append(cert.checks, positive);
  append(cert.checks, flipped);
  if (regular && (all_pass(positive) || all_pass(flipped))) chosen = Route::monotone_system;

  if (problem.system.is_linear_diagonal()) {
    const auto ordering = check_linear_ordering(problem, traj, cert.costate);
    const auto special = check_special_linear(problem, traj, cert.costate);
    append(cert.checks, ordering);
    append(cert.checks, special);
    if (chosen == Route::none && regular && all_pass(ordering)) chosen = Route::linear_ordering;
    if (chosen == Route::none && regular && all_pass(special)) chosen = Route::special_linear;
  } else {
    for (const char* name : {"linear_ordering", "special_linear"}) {
      cert.checks.push_back(skipped(std::string(name), "needs a linear_diagonal system"));
    }
  }

  {
    SampleCheck mu("multiplier_sign");
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (traj.active[k] >= 0) mu.observe(k, traj.times[k], kTolAct - cert.costate.mu[k]);
    }
    CheckResult r = mu.finish(traj, true, "mu <= 0 on active arcs (reported only)");
    cert.checks.push_back(std::move(r));
  }

  {
    std::vector<std::string> fd;
    for (const auto& c : problem.constraints) {
      if (c.kind == ConstraintKind::pure_state && !c.hdot_grad_x) fd.push_back(c.name);
    }
    if (fd.empty()) {
      cert.checks.push_back(skipped("finite_difference_fallback", "all constraint gradients analytic"));
    } else {
      std::string names;
      for (const auto& s : fd) names += (names.empty() ? "" : ", ") + s;
      cert.checks.push_back(make_check("finite_difference_fallback", true, 0.0, 0.0,
                                       "hdot gradient by central differences for: " + names));
    }
  }

  cert.route = chosen;
  if (chosen == Route::none) {
    cert.verdict = Verdict::inconclusive;
  } else if (sigma_ok && mf_ok && cert.min_sigma > 0.0) {
    cert.verdict = Verdict::necessary_conditions_satisfied;
  } else {
    cert.verdict = Verdict::violated;
  }
  log::info("certificate: ", to_string(cert.verdict), " via ", to_string(cert.route), ", min sigma ", cert.min_sigma);
  return cert;
}

}  // namespace bangride
