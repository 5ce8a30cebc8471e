// Acceptance suite: one PASS/FAIL line per criterion, followed by the
// individual measurements. Tolerances are pinned below and never relaxed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bangride/battery.hpp"
#include "bangride/certify.hpp"
#include "bangride/errors.hpp"
#include "bangride/hybridsim.hpp"
#include "bangride/oracle.hpp"
#include "bangride/problems.hpp"

using namespace bangride;

namespace {

// Criterion 1
constexpr double kActivationTarget = 2.5405;
constexpr double kActivationTol = 5e-3;
constexpr double kRideResidualTol = 1e-8;
constexpr double kCaseAOracleGap = 1e-2;
constexpr double kCaseARuntime = 5.0;
// Criterion 2
constexpr double kCaseBHybridTarget = -0.34;
constexpr double kCaseBHybridTol = 0.02;
constexpr double kCaseBOracleBound = -0.90;
constexpr double kSwitchLo = 13.0;
constexpr double kSwitchHi = 17.0;
constexpr double kCaseBRuntime = 60.0;
// Criterion 3
constexpr double kVoltageTol = 1e-6;
constexpr double kSpmOracleGap = 1e-3;
constexpr double kSpmRuntime = 120.0;
// Criteria 4 to 7
constexpr int kRandomProblems = 100;
constexpr double kAdjointRelTol = 1e-6;
constexpr double kOrderTol = 1e-8;
constexpr double kSelectorTol = 1e-8;
constexpr int kVoltageSamples = 1000;
// Oracle settings shared by criteria 1 to 3
constexpr int kSegments = 40;
constexpr long kBudget = 100000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v, int digits = 9) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)), start_(Clock::now()) {}

  void check(bool ok, const std::string& what) {
    ok_ = ok_ && ok;
    lines_.push_back(std::string(ok ? "      ok    " : "      FAIL  ") + what);
  }
  void note(const std::string& what) { lines_.push_back("      info  " + what); }
  double elapsed() const { return seconds_since(start_); }

  bool finish() {
    std::printf("%s [%d] %s (%.2f s)\n", ok_ ? "PASS" : "FAIL", id_, title_.c_str(), elapsed());
    for (const auto& l : lines_) std::printf("%s\n", l.c_str());
    std::fflush(stdout);
    return ok_;
  }

  /// Runs body, turning an exception into a failed check.
  template <class F>
  void guarded(F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      check(false, std::string("unexpected exception: ") + e.what());
    }
  }

 private:
  int id_;
  std::string title_;
  Clock::time_point start_;
  bool ok_ = true;
  std::vector<std::string> lines_;
};

double path_activation_time(const OCProblem& p, const Trajectory& traj) {
  for (const Event& e : traj.events) {
    if (e.kind == EventKind::activate && p.constraints[static_cast<std::size_t>(e.constraint)].is_path()) return e.time;
  }
  return std::nan("");
}

// ---------------------------------------------------------------- criterion 1

bool case_a() {
  Criterion c(1, "benchmark a=(0,-1): max input, then ride; certified; oracle agrees");
  c.guarded([&] {
    const OCProblem p = example1_a();
    const Trajectory traj = hybrid_simulate(p);
    const double dt = traj.times[1] - traj.times[0];
    c.check(dt <= 1e-3 * p.t_f * (1 + 1e-12), "step " + num(dt) + " <= 1e-3 t_f with t_f = " + num(p.t_f));

    const double t_act = path_activation_time(p, traj);
    c.check(std::abs(t_act - kActivationTarget) <= kActivationTol,
            "activation at t = " + num(t_act, 12) + ", target " + num(kActivationTarget) + " +- " + num(kActivationTol));

    bool bang = true;
    double residual = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (traj.times[k] < t_act) {
        bang = bang && traj.inputs[k] == p.u_max;
      } else if (traj.times[k] > t_act) {
        const Vec& x = traj.states[k];
        residual = std::max(residual, std::abs((x[0] + x[1]) * traj.inputs[k] - 4.0));
      }
    }
    c.check(bang, "u = 1 on every sample before the activation");
    c.check(residual <= kRideResidualTol, "ride residual max |(x1+x2)u - 4| = " + num(residual, 3) + " <= " +
                                              num(kRideResidualTol));

    const Certificate cert = certify_necessary_optimality(p, traj);
    c.check(cert.verdict == Verdict::necessary_conditions_satisfied,
            std::string("verdict ") + to_string(cert.verdict));
    c.check(cert.route == Route::linear_ordering, std::string("route ") + to_string(cert.route));
    c.check(cert.min_sigma > 0.0, "min sigma = " + num(cert.min_sigma) + " > 0");

    const double hybrid = trajectory_objective(p, traj);
    const SearchResult search = direct_search(p, kSegments, kBudget, 0);
    const double gain = hybrid - search.objective;
    c.check(gain < kCaseAOracleGap, "oracle improvement " + num(gain, 3) + " < " + num(kCaseAOracleGap) +
                                        " (hybrid " + num(hybrid) + ", oracle " + num(search.objective) + ", " +
                                        std::to_string(search.evaluations) + " evaluations)");
  });
  c.check(c.elapsed() < kCaseARuntime, "runtime " + num(c.elapsed(), 3) + " s < " + num(kCaseARuntime) + " s");
  return c.finish();
}

// ---------------------------------------------------------------- criterion 2

bool case_b() {
  Criterion c(2, "benchmark a=(-1,0): hybrid suboptimal, oracle and switch search find the better profile");
  c.guarded([&] {
    const OCProblem p = example1_b();
    const Trajectory traj = hybrid_simulate(p);
    const double hybrid = trajectory_objective(p, traj);
    c.check(std::abs(hybrid - kCaseBHybridTarget) <= kCaseBHybridTol,
            "hybrid objective " + num(hybrid) + ", target " + num(kCaseBHybridTarget) + " +- " + num(kCaseBHybridTol));

    const SearchResult search = direct_search(p, kSegments, kBudget, 0);
    c.check(search.objective <= kCaseBOracleBound, "oracle objective " + num(search.objective) +
                                                       " <= " + num(kCaseBOracleBound) + " (" +
                                                       std::to_string(search.evaluations) + " evaluations)");

    const std::vector<Arc> pattern{Arc{ArcKind::min}, Arc{ArcKind::max}};
    const SwitchResult sw = switch_time_search(p, pattern, {0.0, p.t_f});
    const double t_sw = sw.switch_times.at(0);
    c.check(t_sw >= kSwitchLo && t_sw <= kSwitchHi, "best [min, selector] switch time " + num(t_sw) + " in [" +
                                                        num(kSwitchLo) + ", " + num(kSwitchHi) + "], objective " +
                                                        num(sw.objective));
    c.note("objective with the switch at 15: " + num(pattern_objective(p, pattern, {15.0})) + ", at 17: " +
           num(pattern_objective(p, pattern, {17.0})));

    const Certificate cert = certify_necessary_optimality(p, traj);
    c.check(cert.verdict != Verdict::necessary_conditions_satisfied,
            std::string("verdict ") + to_string(cert.verdict) + " (must not be satisfied)");
    const CheckResult* rate = cert.find("linear_ordering.rate_order");
    const bool named = rate && rate->failed() && rate->message.find("(1,2)") != std::string::npos &&
                       cert.costate.lambda.back()[0] > cert.costate.lambda.back()[1] &&
                       p.system.diagonal()[0] < p.system.diagonal()[1];
    c.check(named, "ordering check names the pair: " + (rate ? rate->message : std::string("missing")));
  });
  c.check(c.elapsed() < kCaseBRuntime, "runtime " + num(c.elapsed(), 3) + " s < " + num(kCaseBRuntime) + " s");
  return c.finish();
}

// ---------------------------------------------------------------- criterion 3

bool spm() {
  Criterion c(3, "single-particle fast charging: CC then CV, certified, oracle agrees");
  c.guarded([&] {
    const auto table = battery::OcpTable::load_default();
    const OCProblem p = battery::build_charging_problem(battery::ChargingScenario::load_default(), table);
    const Trajectory traj = hybrid_simulate(p);

    // arcs = runs of the active label away from the switching instants
    std::vector<int> arcs;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (traj.near_event(k)) continue;
      if (arcs.empty() || arcs.back() != traj.active[k]) arcs.push_back(traj.active[k]);
    }
    const bool two_arcs = arcs.size() == 2 && arcs[0] == p.upper_index() && arcs[1] == 2;
    std::string labels;
    for (int a : arcs) labels += (labels.empty() ? "" : " -> ") + p.constraints[static_cast<std::size_t>(a)].name;
    c.check(two_arcs, "arc sequence " + labels);

    const double t_cv = path_activation_time(p, traj);
    bool cc = true, non_increasing = true, soc_rising = true;
    double v_err = 0.0, prev_i = p.u_max, prev_soc = -1.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const auto conc = battery::concentrations(traj.states[k]);
      const double s = battery::soc(conc.pos_average);
      if (k > 0) soc_rising = soc_rising && s > prev_soc;
      prev_soc = s;
      if (traj.times[k] < t_cv) {
        cc = cc && traj.inputs[k] == p.u_max;
      } else if (traj.times[k] > t_cv) {
        v_err = std::max(v_err, std::abs(battery::voltage(conc.pos_surface, conc.neg_surface, traj.inputs[k], table) -
                                         battery::kDefaultMaxVoltage));
        non_increasing = non_increasing && traj.inputs[k] <= prev_i;
      }
      prev_i = traj.inputs[k];
    }
    c.check(cc, "I = 300 A on every sample before t = " + num(t_cv, 6) + " s");
    c.check(v_err <= kVoltageTol, "CV arc max |V - 4.5| = " + num(v_err, 3) + " <= " + num(kVoltageTol));
    c.check(non_increasing, "current non-increasing on the CV arc (final " + num(traj.inputs.back(), 6) + " A)");
    c.check(soc_rising, "SOC strictly increasing, final " + num(prev_soc, 6));

    const Certificate cert = certify_necessary_optimality(p, traj);
    const auto special = check_special_linear(p, traj, cert.costate);
    bool special_ok = true;
    for (const auto& r : special) {
      special_ok = special_ok && r.passed();
      if (!r.passed()) c.note(r.name + ": " + r.message);
    }
    c.check(special_ok, "special linear suite passes");
    const CheckResult* strict = cert.find("special_linear.strict_rate");
    const Vec& a = p.system.diagonal();
    c.check(strict && strict->passed() && a[0] == 0.0 && a[1] == -0.0514,
            "strict pair: " + (strict ? strict->message : std::string("missing")));
    c.check(cert.min_sigma > 0.0, "min sigma = " + num(cert.min_sigma, 4) + " > 0");
    c.note(std::string("verdict ") + to_string(cert.verdict) + " via " + to_string(cert.route));

    const double hybrid = trajectory_objective(p, traj);
    const SearchResult search = direct_search(p, kSegments, kBudget, 0);
    const double gain = hybrid - search.objective;
    c.check(gain < kSpmOracleGap, "oracle SOC improvement " + num(gain, 3) + " < " + num(kSpmOracleGap) +
                                      " (hybrid SOC " + num(-hybrid, 8) + ", oracle SOC " + num(-search.objective, 8) +
                                      ")");
  });
  c.check(c.elapsed() < kSpmRuntime, "runtime " + num(c.elapsed(), 3) + " s < " + num(kSpmRuntime) + " s");
  return c.finish();
}

// ---------------------------------------------------------------- criterion 4

bool adjoint_closed_form() {
  Criterion c(4, "costate of unconstrained diagonal systems matches the matrix exponential");
  c.guarded([&] {
    std::mt19937_64 rng(20240401);
    std::uniform_int_distribution<int> dim(1, 5);
    std::uniform_real_distribution<double> rate(-2.0, 1.0), weight(-1.0, 1.0), horizon(0.5, 5.0), unit(0.0, 1.0);
    double worst = 0.0;
    int failures = 0;
    for (int trial = 0; trial < kRandomProblems; ++trial) {
      const int n = dim(rng);
      Vec a(n), w(n), x0(n);
      for (int j = 0; j < n; ++j) {
        a[j] = rate(rng);
        do w[j] = weight(rng);
        while (std::abs(w[j]) < 1e-3);
        x0[j] = weight(rng);
      }
      const double t_f = horizon(rng);
      const OCProblem p =
          make_problem("adjoint", SystemModel::linear_diagonal(a), x0, t_f, -1.0, 1.0, linear_field(-w));
      const double u = 2.0 * unit(rng) - 1.0;
      const Trajectory traj = simulate(p, Policy{[u](double, const Vec&) { return u; }, {}});
      const CostateTrajectory ct = costate_integrate(p, traj);
      double trial_worst = 0.0;
      for (std::size_t k = 0; k < ct.size(); ++k) {
        for (int j = 0; j < n; ++j) {
          const double exact = std::exp(a[j] * (t_f - ct.times[k])) * w[j];
          trial_worst = std::max(trial_worst, std::abs(ct.lambda[k][j] - exact) / std::abs(exact));
        }
      }
      worst = std::max(worst, trial_worst);
      if (!(trial_worst <= kAdjointRelTol)) ++failures;
    }
    c.check(failures == 0, std::to_string(kRandomProblems - failures) + "/" + std::to_string(kRandomProblems) +
                               " problems within " + num(kAdjointRelTol) + " relative, worst " + num(worst, 3));
  });
  return c.finish();
}

// ---------------------------------------------------------------- criterion 5

bool order_preservation() {
  Criterion c(5, "costate order is preserved under the ordering hypotheses");
  c.guarded([&] {
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<int> dim(2, 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int accepted = 0, attempts = 0, violations = 0, certified = 0, nonneg_violations = 0, broken_problems = 0;
    double worst = 0.0;
    while (accepted < kRandomProblems && attempts < 20 * kRandomProblems) {
      ++attempts;
      const int n = dim(rng);
      // rates and terminal costate both decreasing in the index, with a1 = 0
      Vec a(n), lam_f(n), v(n), x0(n);
      a[0] = 0.0;
      lam_f[0] = 1.0;
      v[0] = 0.0;
      for (int j = 1; j < n; ++j) {
        a[j] = a[j - 1] - (0.3 + 1.2 * unit(rng));
        lam_f[j] = lam_f[j - 1] * (0.2 + 0.7 * unit(rng));
        v[j] = v[j - 1] + 0.05 * unit(rng);
      }
      for (int j = 0; j < n; ++j) x0[j] = 0.5 * unit(rng);
      // c (sum x) u + v^T x - B <= 0: relative sensitivities increase with the index
      const double gain = 0.5 + 1.5 * unit(rng);
      const double level = 2.0 + 4.0 * unit(rng);
      const double t_f = 10.0 + 10.0 * unit(rng);
      const OCProblem p = make_problem("ordered", SystemModel::linear_diagonal(a), x0, t_f, 0.0, 1.0,
                                       linear_field(-lam_f),
                                       {bilinear_constraint("ordered", Vec::Constant(n, gain), v, -level)});
      Trajectory traj;
      try {
        traj = hybrid_simulate(p);
      } catch (const Error&) {
        continue;
      }
      if (std::none_of(traj.active.begin(), traj.active.end(), [](int l) { return l == 2; })) continue;
      ++accepted;
      const Certificate cert = certify_necessary_optimality(p, traj);
      if (cert.route == Route::linear_ordering) ++certified;
      const int before = violations;
      for (std::size_t k = 0; k < cert.costate.size(); ++k) {
        const Vec& l = cert.costate.lambda[k];
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            if (i == j || lam_f[i] < lam_f[j]) continue;
            const double gap = l[j] - l[i];
            worst = std::max(worst, gap);
            if (gap > kOrderTol) {
              ++violations;
              if (l[j] >= 0.0) ++nonneg_violations;
            }
          }
        }
      }
      if (violations > before) ++broken_problems;
    }
    c.check(accepted == kRandomProblems, std::to_string(accepted) + " problems with an active ride arc (" +
                                             std::to_string(attempts) + " drawn)");
    c.check(violations == 0, std::to_string(violations) + " samples with lambda_j - lambda_k > " + num(kOrderTol) +
                                 ", worst " + num(worst, 3));
    c.note(std::to_string(certified) + " of them certified through the ordering route");
    c.note(std::to_string(broken_problems) + " problems lose the order, " + std::to_string(nonneg_violations) +
           " violating samples have a nonnegative larger costate");
  });
  return c.finish();
}

// ---------------------------------------------------------------- criterion 6

// Explicit two-mode simulation for one bilinear constraint (w^T x) u + v^T x + b <= 0:
// full input until the constraint is reached, then the closed-form ride input,
// back to full input once the ride input exceeds u_max. Switches are located by
// bisection on the sub-step length.
struct ModeSwitchingSim {
  Vec a, w, v;
  double b = 0.0, u_max = 1.0;

  double ride(const Vec& x) const { return -(v.dot(x) + b) / w.dot(x); }
  double s_max(const Vec& x) const { return w.dot(x) * u_max + v.dot(x) + b; }

  Vec step(const Vec& x, double h, bool riding) const {
    auto rhs = [&](const Vec& y) -> Vec {
      const double u = riding ? ride(y) : u_max;
      return a.cwiseProduct(y) + Vec::Constant(y.size(), u);
    };
    const Vec k1 = rhs(x);
    const Vec k2 = rhs(x + 0.5 * h * k1);
    const Vec k3 = rhs(x + 0.5 * h * k2);
    const Vec k4 = rhs(x + h * k3);
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // Crossing of the switching surface of the current mode.
  bool crossed(const Vec& x, bool riding) const { return riding ? ride(x) > u_max : s_max(x) > 0.0; }

  struct Result {
    std::vector<Vec> states;  // on the uniform grid
    std::vector<double> inputs;
    int switches = 0;
  };

  Result run(const Vec& x0, double t_f, int steps) const {
    Result r;
    Vec x = x0;
    bool riding = s_max(x) >= -kTolAct;
    const double h = t_f / steps;
    r.states.push_back(x);
    r.inputs.push_back(riding ? ride(x) : u_max);
    for (int k = 0; k < steps; ++k) {
      double remaining = h;
      for (int guard = 0; guard < 4; ++guard) {
        const Vec x_end = step(x, remaining, riding);
        if (!crossed(x_end, riding)) {
          x = x_end;
          break;
        }
        double lo = 0.0, hi = remaining;
        while (hi - lo > 1e-14 * h) {
          const double mid = 0.5 * (lo + hi);
          (crossed(step(x, mid, riding), riding) ? hi : lo) = mid;
        }
        x = step(x, hi, riding);
        remaining -= hi;
        riding = !riding;
        ++r.switches;
      }
      r.states.push_back(x);
      r.inputs.push_back(riding ? std::min(ride(x), u_max) : u_max);
    }
    return r;
  }
};

bool selector_equivalence() {
  Criterion c(6, "hybrid selector equals explicit mode switching");
  c.guarded([&] {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<int> dim(1, 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int accepted = 0, attempts = 0, mismatched = 0, with_ride = 0, with_exit = 0;
    double worst = 0.0;
    while (accepted < kRandomProblems && attempts < 20 * kRandomProblems) {
      ++attempts;
      const int n = dim(rng);
      ModeSwitchingSim ref;
      ref.a = Vec(n);
      ref.w = Vec(n);
      ref.v = Vec(n);
      Vec x0(n);
      for (int j = 0; j < n; ++j) {
        ref.a[j] = -1.5 + 2.0 * unit(rng);
        ref.w[j] = 0.2 + 1.3 * unit(rng);
        ref.v[j] = -0.2 + 0.4 * unit(rng);
        x0[j] = 0.1 + unit(rng);
      }
      ref.u_max = 0.5 + 1.5 * unit(rng);
      ref.b = -(1.0 + 5.0 * unit(rng));
      const double t_f = 2.0 + 8.0 * unit(rng);
      const OCProblem p = make_problem("selector", SystemModel::linear_diagonal(ref.a), x0, t_f, 0.0, ref.u_max,
                                       linear_field(-Vec::Ones(n)),
                                       {bilinear_constraint("bilinear", ref.w, ref.v, ref.b)});
      Trajectory traj;
      try {
        traj = hybrid_simulate(p);
      } catch (const Error&) {
        continue;  // empty control set along the way; not a comparable problem
      }
      const int steps = 1000;
      const auto expected = ref.run(x0, t_f, steps);
      ++accepted;
      if (expected.switches > 0) ++with_ride;
      if (expected.switches > 1) ++with_exit;
      double trial = 0.0;
      for (std::size_t k = 0; k < traj.size(); ++k) {
        const double pos = traj.times[k] / t_f * steps;
        const long idx = std::lround(pos);
        if (std::abs(pos - static_cast<double>(idx)) > 1e-9) continue;  // event samples
        const Vec& xe = expected.states[static_cast<std::size_t>(idx)];
        const double scale = std::max(1.0, xe.cwiseAbs().maxCoeff());
        trial = std::max(trial, (traj.states[k] - xe).cwiseAbs().maxCoeff() / scale);
        trial = std::max(trial, std::abs(traj.inputs[k] - expected.inputs[static_cast<std::size_t>(idx)]));
      }
      worst = std::max(worst, trial);
      if (!(trial <= kSelectorTol)) ++mismatched;
    }
    c.check(accepted == kRandomProblems,
            std::to_string(accepted) + " comparable problems (" + std::to_string(attempts) + " drawn)");
    c.check(mismatched == 0, std::to_string(accepted - mismatched) + "/" + std::to_string(accepted) +
                                 " agree sample-wise within " + num(kSelectorTol) + ", worst " + num(worst, 3));
    c.note(std::to_string(with_ride) + " problems ride the constraint, " + std::to_string(with_exit) +
           " also leave it again");
  });
  return c.finish();
}

// ---------------------------------------------------------------- criterion 7

bool voltage_signs() {
  Criterion c(7, "finite-difference voltage sensitivities have the expected signs");
  c.guarded([&] {
    const auto table = battery::OcpTable::load_default();
    std::mt19937_64 rng(99);
    const auto [p_lo, p_hi] = table.plus.valid_theta();
    const auto [n_lo, n_hi] = table.minus.valid_theta();
    std::uniform_real_distribution<double> theta_p(p_lo, p_hi), theta_n(n_lo, n_hi),
        current(0.0, battery::kDefaultMaxCurrent);
    int bad_ps = 0, bad_ns = 0, bad_i = 0;
    for (int s = 0; s < kVoltageSamples; ++s) {
      const double cps = theta_p(rng) * battery::kPosMaxConcentration;
      const double cns = theta_n(rng) * battery::kNegMaxConcentration;
      const double i = current(rng);
      const double hc = 1e-3, hi = 1e-3;
      auto v = [&](double a, double b, double cur) { return battery::voltage(a, b, cur, table); };
      if (!((v(cps + hc, cns, i) - v(cps - hc, cns, i)) / (2 * hc) < 0.0)) ++bad_ps;
      if (!((v(cps, cns + hc, i) - v(cps, cns - hc, i)) / (2 * hc) > 0.0)) ++bad_ns;
      if (!((v(cps, cns, i + hi) - v(cps, cns, i - hi)) / (2 * hi) > 0.0)) ++bad_i;
    }
    c.check(bad_ps == 0, "dV/dc_ps < 0 at " + std::to_string(kVoltageSamples - bad_ps) + "/" +
                             std::to_string(kVoltageSamples) + " points");
    c.check(bad_ns == 0, "dV/dc_ns > 0 at " + std::to_string(kVoltageSamples - bad_ns) + "/" +
                             std::to_string(kVoltageSamples) + " points");
    c.check(bad_i == 0, "dV/dI > 0 at " + std::to_string(kVoltageSamples - bad_i) + "/" +
                            std::to_string(kVoltageSamples) + " points");
  });
  return c.finish();
}

// ---------------------------------------------------------------- criterion 8

bool kalman() {
  Criterion c(8, "controllability ranks");
  c.guarded([&] {
    const int r1 = kalman_rank((Vec(2) << 0.0, -1.0).finished(), Vec::Ones(2));
    const int r2 = kalman_rank((Vec(2) << -1.0, -1.0).finished(), Vec::Ones(2));
    const int r3 = kalman_rank(battery::modes(), Vec::Ones(5));
    c.check(r1 == 2, "a=(0,-1): rank " + std::to_string(r1) + ", expected 2");
    c.check(r2 == 1, "a=(-1,-1): rank " + std::to_string(r2) + ", expected 1");
    c.check(r3 == 5, "battery modes: rank " + std::to_string(r3) + ", expected 5");
  });
  return c.finish();
}

}  // namespace

int main() {
  const std::vector<std::function<bool()>> criteria{case_a, case_b, spm, adjoint_closed_form,
                                                    order_preservation, selector_equivalence, voltage_signs, kalman};
  int failed = 0;
  for (const auto& run : criteria) failed += run() ? 0 : 1;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
