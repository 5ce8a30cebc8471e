#include "bangride/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "bangride/battery.hpp"
#include "bangride/certify.hpp"
#include "bangride/csv_io.hpp"
#include "bangride/errors.hpp"
#include "bangride/hybridsim.hpp"
#include "bangride/integrate.hpp"
#include "bangride/oracle.hpp"
#include "bangride/problems.hpp"

namespace bangride::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<Vec> parse_alpha(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<double> values;
  std::istringstream is(text);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw UsageError("--alpha expects comma-separated numbers");
    }
  }
  Vec a(static_cast<long>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) a[static_cast<long>(i)] = values[i];
  return a;
}

PiecewiseControl load_piecewise(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy file '" + path + "'");
  try {
    const auto j = nlohmann::json::parse(in);
    return PiecewiseControl{j.at("values").get<std::vector<double>>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("policy file needs {\"values\": [...]}: " + std::string(e.what()));
  }
}

Policy make_policy(const OCProblem& problem, const std::string& kind, const std::string& file) {
  if (kind == "hybrid") return hybrid_policy(problem);
  if (kind == "max" || kind == "min") {
    const double u = kind == "max" ? problem.u_max : problem.u_min;
    return Policy{[u](double, const Vec&) { return u; }, {}};
  }
  if (kind == "file") {
    if (file.empty()) throw UsageError("--policy file needs --policy-file");
    const PiecewiseControl ctrl = load_piecewise(file);
    if (ctrl.values.empty()) throw ConfigError("policy file has no values");
    const int n = ctrl.segments();
    std::vector<double> bounds;
    for (int j = 1; j < n; ++j) bounds.push_back(problem.t_f * j / n);
    return Policy{[values = ctrl.values, bounds](double t, const Vec&) {
                    return values[static_cast<std::size_t>(std::upper_bound(bounds.begin(), bounds.end(), t) -
                                                           bounds.begin())];
                  },
                  bounds};
  }
  throw UsageError("unknown policy '" + kind + "' (hybrid, max, min, file)");
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << std::fixed << v;
  return os.str();
}

void table_row(std::ostream& out, const std::string& key, const std::string& value) {
  out << "  " << std::left << std::setw(34) << key << value << '\n';
}

struct ReproOptions {
  std::string which;
  std::uint64_t seed = 0;
  long budget = 100000;
  int segments = 40;
  std::string ocp;
};

int repro(const ReproOptions& o, std::ostream& out) {
  std::optional<std::string> ocp = o.ocp.empty() ? std::nullopt : std::optional<std::string>(o.ocp);
  OCProblem problem = [&] {
    if (o.which == "example1a") return example1_a();
    if (o.which == "example1b") return example1_b();
    if (o.which == "spm") return problem_by_name("spm_charging", ocp);
    throw UsageError("unknown case '" + o.which + "' (example1a, example1b, spm)");
  }();
  const auto start = std::chrono::steady_clock::now();
  const Trajectory traj = hybrid_simulate(problem);
  const double hybrid = trajectory_objective(problem, traj);
  const Certificate cert = certify_necessary_optimality(problem, traj);
  const SearchResult search = direct_search(problem, o.segments, o.budget, o.seed);

  out << "case " << o.which << " (" << problem.name << ", t_f = " << problem.t_f << ")\n";
  table_row(out, "hybrid objective", fixed(hybrid));
  table_row(out, "oracle objective", fixed(search.objective));
  table_row(out, "oracle improvement over hybrid", fixed(hybrid - search.objective));
  table_row(out, "oracle evaluations", std::to_string(search.evaluations));
  table_row(out, "certificate verdict", to_string(cert.verdict));
  table_row(out, "certificate route", to_string(cert.route));
  table_row(out, "min switching function", fixed(cert.min_sigma, 9));
  table_row(out, "bang-ride coverage", fixed(cert.coverage, 4));
  for (const auto& c : cert.checks) {
    if (c.failed()) table_row(out, "failed check", c.name + ": " + c.message);
  }
  if (o.which == "example1b") {
    const SwitchResult sw =
        switch_time_search(problem, {Arc{ArcKind::min}, Arc{ArcKind::max}}, {0.0, problem.t_f});
    table_row(out, "switch search [min, selector] time", fixed(sw.switch_times.at(0), 4));
    table_row(out, "switch search objective", fixed(sw.objective));
  }
  if (o.which == "spm") {
    table_row(out, "hybrid final SOC", fixed(-hybrid));
    table_row(out, "oracle final SOC", fixed(-search.objective));
    for (const auto& e : traj.events) {
      if (e.kind == EventKind::activate && problem.constraints[static_cast<std::size_t>(e.constraint)].is_path()) {
        table_row(out, "constant-voltage phase starts at", fixed(e.time, 3) + " s");
        break;
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  table_row(out, "wall time", fixed(secs, 2) + " s");
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"bang-ride optimal control toolkit", "bangride"};
  app.require_subcommand(1);

  std::string problem_name, policy_kind = "hybrid", policy_file, out_path, traj_path, alpha_text, costate_out,
                                 scenario_path, ocp_path;
  double dt = 0.0;
  int segments = 40;
  long budget = 100000;
  std::uint64_t seed = 0;
  ReproOptions repro_opts;

  auto* sim = app.add_subcommand("simulate", "simulate a problem under a policy and write a trajectory CSV");
  sim->add_option("--problem", problem_name, "built-in problem or scenario JSON")->required();
  sim->add_option("--policy", policy_kind, "hybrid | max | min | file");
  sim->add_option("--policy-file", policy_file, "JSON {\"values\": [...]} for --policy file");
  sim->add_option("--dt", dt, "step size (default 1e-3 t_f)");
  sim->add_option("--ocp", ocp_path, "OCP table for spm_charging");
  sim->add_option("--out", out_path, "trajectory CSV")->required();

  auto* cer = app.add_subcommand("certify", "check necessary optimality conditions on a trajectory");
  cer->add_option("--problem", problem_name)->required();
  cer->add_option("--traj", traj_path, "trajectory CSV")->required();
  cer->add_option("--out", out_path, "certificate JSON")->required();
  cer->add_option("--alpha", alpha_text, "terminal constraint multipliers, comma separated");
  cer->add_option("--costate-out", costate_out, "costate CSV");
  cer->add_option("--ocp", ocp_path);

  auto* ora = app.add_subcommand("oracle", "direct search baseline over piecewise constant inputs");
  ora->add_option("--problem", problem_name)->required();
  ora->add_option("--segments", segments)->check(CLI::PositiveNumber);
  ora->add_option("--budget", budget)->check(CLI::PositiveNumber);
  ora->add_option("--seed", seed);
  ora->add_option("--ocp", ocp_path);
  ora->add_option("--out", out_path, "best candidate trajectory CSV")->required();

  auto* bat = app.add_subcommand("battery", "hybrid charging run of the single-particle model");
  bat->add_option("--scenario", scenario_path, "scenario JSON {soc0, t_f, I_max, V_max}");
  bat->add_option("--ocp", ocp_path);
  bat->add_option("--dt", dt);
  bat->add_option("--out", out_path, "trajectory CSV")->required();

  auto* rep = app.add_subcommand("repro", "hybrid simulation, certificate and oracle for one benchmark case");
  rep->add_option("--case", repro_opts.which, "example1a | example1b | spm")->required();
  rep->add_option("--seed", repro_opts.seed);
  rep->add_option("--budget", repro_opts.budget)->check(CLI::PositiveNumber);
  rep->add_option("--segments", repro_opts.segments)->check(CLI::PositiveNumber);
  rep->add_option("--ocp", repro_opts.ocp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  const std::optional<std::string> ocp = ocp_path.empty() ? std::nullopt : std::optional<std::string>(ocp_path);
  try {
    if (sim->parsed()) {
      const OCProblem problem = problem_by_name(problem_name, ocp);
      SimOptions opts;
      opts.dt = dt;
      const Trajectory traj = simulate(problem, make_policy(problem, policy_kind, policy_file), opts);
      write_file_atomic(out_path, trajectory_csv(problem, traj));
      out << "objective " << std::setprecision(12) << trajectory_objective(problem, traj) << ", " << traj.size()
          << " samples, " << traj.events.size() << " events\n";
      return 0;
    }
    if (cer->parsed()) {
      const OCProblem problem = problem_by_name(problem_name, ocp);
      const Trajectory traj = load_trajectory_csv(traj_path, problem.system.n());
      const Certificate cert = certify_necessary_optimality(problem, traj, parse_alpha(alpha_text));
      write_file_atomic(out_path, cert.to_json().dump(2) + "\n");
      if (!costate_out.empty()) write_file_atomic(costate_out, costate_csv(cert.costate));
      out << to_string(cert.verdict) << " (route " << to_string(cert.route) << ")\n";
      return 0;
    }
    if (ora->parsed()) {
      const OCProblem problem = problem_by_name(problem_name, ocp);
      const SearchResult r = direct_search(problem, segments, budget, seed);
      write_file_atomic(out_path, trajectory_csv(problem, candidate_trajectory(problem, r.best)));
      nlohmann::json summary{{"objective", r.objective}, {"evaluations", r.evaluations}, {"seed", seed}};
      out << summary.dump() << "\n";
      return 0;
    }
    if (bat->parsed()) {
      const auto scenario = scenario_path.empty() ? battery::ChargingScenario::load_default()
                                                  : battery::ChargingScenario::load(scenario_path);
      const auto table = ocp ? battery::OcpTable::load(*ocp) : battery::OcpTable::load_default();
      const OCProblem problem = battery::build_charging_problem(scenario, table);
      SimOptions opts;
      opts.dt = dt;
      const Trajectory traj = hybrid_simulate(problem, opts);
      write_file_atomic(out_path, trajectory_csv(problem, traj));
      out << "final SOC " << std::setprecision(6) << -trajectory_objective(problem, traj) << ", " << traj.size()
          << " samples\n";
      return 0;
    }
    if (rep->parsed()) return repro(repro_opts, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownProblem& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace bangride::cli
