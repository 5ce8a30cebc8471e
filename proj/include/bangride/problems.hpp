#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "bangride/errors.hpp"
#include "bangride/model.hpp"

namespace bangride {

/// Requested problem name is neither built in nor a readable file.
class UnknownProblem : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// (w^T x) u + v^T x + b <= 0.
Constraint bilinear_constraint(std::string name, Vec w, Vec v, double b);

/// Two-state benchmark: minimize -x1(t_f) for x' = diag(a) x + 1 u, x0 = (0.5, 0.5),
/// u in [0, 1], subject to (x1 + x2) u - 4 <= 0.
OCProblem example1(const Vec& a, double t_f = 20.0, std::string name = "example1");
OCProblem example1_a(double t_f = 20.0);  // a = (0, -1)
OCProblem example1_b(double t_f = 20.0);  // a = (-1, 0)

/// Linear diagonal scenario:
/// {name?, a, x0, u_min, u_max, t_f, objective (weights w, phi = w^T x),
///  path_constraints: [{name, w, v, b}]}.
OCProblem linear_diagonal_from_json(const nlohmann::json& j);
OCProblem load_problem_file(const std::string& path);

std::vector<std::string> builtin_problem_names();

/// Built-in name (example1_a, example1_b, spm_charging) or a JSON scenario path.
/// ocp_path overrides the OCP table used by spm_charging.
OCProblem problem_by_name(const std::string& name, const std::optional<std::string>& ocp_path = std::nullopt);

}  // namespace bangride
