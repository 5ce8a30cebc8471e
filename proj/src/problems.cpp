#include "bangride/problems.hpp"

#include <filesystem>
#include <fstream>

#include "bangride/battery.hpp"

namespace bangride {

namespace {

Vec vec_field(const nlohmann::json& j, const char* key, long n = -1) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(std::string("scenario needs array '") + key + "'");
  const auto values = j.at(key).get<std::vector<double>>();
  if (n >= 0 && static_cast<long>(values.size()) != n) {
    throw ConfigError(std::string("array '") + key + "' has the wrong length");
  }
  Vec out(static_cast<long>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out[static_cast<long>(i)] = values[i];
  return out;
}

double num_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ConfigError(std::string("scenario needs number '") + key + "'");
  return j.at(key).get<double>();
}

}  // namespace

Constraint bilinear_constraint(std::string name, Vec w, Vec v, double b) {
  if (w.size() != v.size()) throw ConfigError("bilinear constraint weights differ in length");
  auto value = [w, v, b](const Vec& x, double u) { return w.dot(x) * u + v.dot(x) + b; };
  auto grad_x = [w, v](const Vec&, double u) -> Vec { return w * u + v; };
  auto grad_u = [w](const Vec& x, double) { return w.dot(x); };
  return Constraint::mixed(std::move(name), value, grad_x, grad_u);
}

OCProblem example1(const Vec& a, double t_f, std::string name) {
  std::vector<Constraint> path;
  path.push_back(bilinear_constraint("bilinear", Vec::Ones(2), Vec::Zero(2), -4.0));
  return make_problem(std::move(name), SystemModel::linear_diagonal(a), Vec::Constant(2, 0.5), t_f, 0.0, 1.0,
                      linear_field((Vec(2) << -1.0, 0.0).finished()), std::move(path));
}

OCProblem example1_a(double t_f) { return example1((Vec(2) << 0.0, -1.0).finished(), t_f, "example1_a"); }

OCProblem example1_b(double t_f) { return example1((Vec(2) << -1.0, 0.0).finished(), t_f, "example1_b"); }

OCProblem linear_diagonal_from_json(const nlohmann::json& j) {
  try {
    const Vec a = vec_field(j, "a");
    const long n = a.size();
    std::vector<Constraint> path;
    if (j.contains("path_constraints")) {
      for (const auto& c : j.at("path_constraints")) {
        path.push_back(bilinear_constraint(c.value("name", "path"), vec_field(c, "w", n), vec_field(c, "v", n),
                                           num_field(c, "b")));
      }
    }
    return make_problem(j.value("name", "scenario"), SystemModel::linear_diagonal(a), vec_field(j, "x0", n),
                        num_field(j, "t_f"), num_field(j, "u_min"), num_field(j, "u_max"),
                        linear_field(vec_field(j, "objective", n)), std::move(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
}

OCProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnknownProblem("cannot open problem file '" + path + "'");
  try {
    return linear_diagonal_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed problem file '" + path + "': " + e.what());
  }
}

std::vector<std::string> builtin_problem_names() { return {"example1_a", "example1_b", "spm_charging"}; }

OCProblem problem_by_name(const std::string& name, const std::optional<std::string>& ocp_path) {
  if (name == "example1_a") return example1_a();
  if (name == "example1_b") return example1_b();
  if (name == "spm_charging") {
    const auto ocp = ocp_path ? battery::OcpTable::load(*ocp_path) : battery::OcpTable::load_default();
    return battery::build_charging_problem(battery::ChargingScenario::load_default(), ocp);
  }
  if (name.size() > 5 && name.ends_with(".json") && std::filesystem::exists(name)) return load_problem_file(name);
  std::string known;
  for (const auto& n : builtin_problem_names()) known += (known.empty() ? "" : ", ") + n;
  throw UnknownProblem("unknown problem '" + name + "' (built-in: " + known + ", or a .json scenario file)");
}

}  // namespace bangride
