#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "bangride/battery.hpp"
#include "bangride/errors.hpp"
#include "bangride/hybridsim.hpp"
#include "bangride/oracle.hpp"
#include "bangride/problems.hpp"

using namespace bangride;

namespace {

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }

nlohmann::json scenario() {
  return {{"a", {0.0, -1.0}},
          {"x0", {0.5, 0.5}},
          {"u_min", 0.0},
          {"u_max", 1.0},
          {"t_f", 20.0},
          {"objective", {-1.0, 0.0}},
          {"path_constraints", {{{"name", "bilinear"}, {"w", {1.0, 1.0}}, {"v", {0.0, 0.0}}, {"b", -4.0}}}}};
}

}  // namespace

TEST_CASE("benchmark problems") {
  const OCProblem a = example1_a();
  CHECK(a.system.diagonal() == vec2(0, -1));
  CHECK(a.x0 == vec2(0.5, 0.5));
  CHECK(a.t_f == 20.0);
  CHECK(a.u_min == 0.0);
  CHECK(a.u_max == 1.0);
  CHECK(a.phi.value(vec2(3, 1)) == -3.0);
  CHECK(example1_b().system.diagonal() == vec2(-1, 0));
  CHECK(example1_a(7.0).t_f == 7.0);
}

TEST_CASE("bilinear constraint") {
  const Constraint c = bilinear_constraint("c", vec2(1, 2), vec2(3, 0), -1.0);
  const Vec x = vec2(1, 1);
  CHECK(c.value(x, 2.0) == doctest::Approx(3.0 * 2.0 + 3.0 - 1.0));
  CHECK(c.grad_u(x, 2.0) == doctest::Approx(3.0));
  CHECK(c.grad_x(x, 2.0) == vec2(5, 4));
  CHECK_THROWS_AS(bilinear_constraint("bad", vec2(1, 2), Vec::Zero(3), 0.0), ConfigError);
}

TEST_CASE("scenario JSON reproduces the built-in benchmark") {
  const OCProblem from_json = linear_diagonal_from_json(scenario());
  const OCProblem builtin = example1_a();
  const double a = trajectory_objective(from_json, hybrid_simulate(from_json));
  const double b = trajectory_objective(builtin, hybrid_simulate(builtin));
  CHECK(a == b);
  CHECK(from_json.constraints.size() == 3);
}

TEST_CASE("malformed scenarios are rejected") {
  auto j = scenario();
  j["x0"] = {0.5};
  CHECK_THROWS_AS(linear_diagonal_from_json(j), ConfigError);
  j = scenario();
  j.erase("t_f");
  CHECK_THROWS_AS(linear_diagonal_from_json(j), ConfigError);
  j = scenario();
  j["u_min"] = 2.0;
  CHECK_THROWS_AS(linear_diagonal_from_json(j), ConfigError);
}

TEST_CASE("problem registry") {
  const auto names = builtin_problem_names();
  for (const char* n : {"example1_a", "example1_b", "spm_charging"}) {
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
    CHECK_NOTHROW(problem_by_name(n));
  }
  CHECK(problem_by_name("spm_charging").system.n() == 5);
  CHECK(problem_by_name(battery::data_path("example1_a.json")).system.n() == 2);
  CHECK_THROWS_AS(problem_by_name("no_such_problem"), UnknownProblem);
  CHECK_THROWS_AS(problem_by_name("/nonexistent/problem.json"), UnknownProblem);
}
