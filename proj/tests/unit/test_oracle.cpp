#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bangride/errors.hpp"
#include "bangride/hybridsim.hpp"
#include "bangride/oracle.hpp"
#include "bangride/problems.hpp"

using namespace bangride;

namespace {

double hybrid_objective(const OCProblem& p) { return trajectory_objective(p, hybrid_simulate(p)); }

}  // namespace

TEST_CASE("projected maximum input reproduces the hybrid run") {
  const OCProblem p = example1_a();
  OracleOptions fine;
  fine.steps_per_segment = 1000;  // same step as the default simulation grid
  const CandidateResult r = evaluate_candidate(p, PiecewiseControl::constant(1, p.u_max), fine);
  CHECK(r.feasible);
  CHECK(std::abs(r.objective - hybrid_objective(p)) <= 1e-6);
  // the raw value 1 violates the ride constraint once x1 + x2 > 4
  CHECK(r.max_violation > 1.0);
}

TEST_CASE("minimum input leaves x1 at its initial value") {
  const OCProblem p = example1_a();
  const CandidateResult r = evaluate_candidate(p, PiecewiseControl::constant(40, 0.0));
  CHECK(r.objective == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(r.max_violation <= 0.0);
}

TEST_CASE("zero horizon candidate is the terminal cost at x0") {
  const OCProblem p = example1_a(0.0);
  CHECK(evaluate_candidate(p, PiecewiseControl::constant(5, 0.3)).objective == doctest::Approx(-0.5));
}

TEST_CASE("candidates outside the input range are rejected") {
  const OCProblem p = example1_a();
  CHECK_THROWS_AS(evaluate_candidate(p, PiecewiseControl::constant(4, 1.5)), ConfigError);
  CHECK_THROWS_AS(evaluate_candidate(p, PiecewiseControl{}), ConfigError);
  CHECK_THROWS_AS(direct_search(p, 0, 10, 0), ConfigError);
  CHECK_THROWS_AS(direct_search(p, 10, 0, 0), ConfigError);
}

TEST_CASE("a single evaluation returns the hybrid start") {
  const OCProblem p = example1_b();
  const SearchResult r = direct_search(p, 40, 1, 7);
  CHECK(r.evaluations == 1);
  CHECK(r.best_start == 0);
  const double hybrid_profile = evaluate_candidate(p, PiecewiseControl::constant(40, p.u_max)).objective;
  CHECK(r.objective <= hybrid_profile);
}

TEST_CASE("direct search is reproducible for a seed") {
  const OCProblem p = example1_b();
  const SearchResult a = direct_search(p, 12, 3000, 42);
  const SearchResult b = direct_search(p, 12, 3000, 42);
  CHECK(a.objective == b.objective);
  CHECK(a.best.values == b.best.values);
  CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("direct search does not beat the optimal hybrid run of case a") {
  const OCProblem p = example1_a();
  const SearchResult r = direct_search(p, 40, 20000, 0);
  CHECK(r.evaluations <= 20000);
  CHECK(std::abs(r.objective - hybrid_objective(p)) < 1e-2);
}

TEST_CASE("degenerate switch pattern is the hybrid run") {
  const OCProblem p = example1_a();
  const SwitchResult r = switch_time_search(p, {Arc{ArcKind::max}}, {0.0, p.t_f});
  CHECK(r.switch_times.empty());
  CHECK(std::abs(r.objective - hybrid_objective(p)) <= 1e-6);
}

TEST_CASE("delaying the maximum input hurts in case a") {
  const OCProblem p = example1_a();
  const SwitchResult r = switch_time_search(p, {Arc{ArcKind::min}, Arc{ArcKind::max}}, {0.0, p.t_f});
  REQUIRE(r.switch_times.size() == 1);
  CHECK(r.switch_times[0] <= 0.25);
}

TEST_CASE("switch search on case b") {
  const OCProblem p = example1_b();
  const std::vector<Arc> pattern{Arc{ArcKind::min}, Arc{ArcKind::max}};
  const SwitchResult r = switch_time_search(p, pattern, {0.0, p.t_f});
  REQUIRE(r.switch_times.size() == 1);
  CHECK(r.objective <= -0.92);
  CHECK(pattern_objective(p, pattern, r.switch_times) == doctest::Approx(r.objective));
  // a local minimum in the switch time
  for (double shift : {-0.5, 0.5}) {
    CHECK(pattern_objective(p, pattern, {r.switch_times[0] + shift}) > r.objective);
  }
  // consistent with the piecewise constant search
  CHECK(direct_search(p, 40, 100000, 0).objective <= r.objective + 0.02);
}
