#include "bangride/csv_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "bangride/errors.hpp"

namespace bangride {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() && s.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("trajectory CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const OCProblem& problem, const Trajectory& traj) {
  const int n = problem.system.n();
  const std::size_t m = problem.constraints.size();
  out << "t,u,active";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= m; ++i) out << ",s" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << fmt(traj.times[k]) << ',' << fmt(traj.inputs[k]) << ',' << traj.active[k];
    for (int i = 0; i < n; ++i) out << ',' << fmt(traj.states[k][i]);
    for (const auto& c : problem.constraints) out << ',' << fmt(activity_value(c, traj.states[k], traj.inputs[k]));
    out << '\n';
  }
  for (const auto& e : traj.events) {
    out << "# event," << fmt(e.time) << ',' << e.constraint << ',' << to_string(e.kind) << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in, int state_dim) {
  Trajectory traj;
  std::string line;
  std::size_t line_no = 0;
  int x_cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# event,", 0) == 0) {
      const auto f = split(line.substr(8), ',');
      if (f.size() != 3) throw ConfigError("trajectory CSV line " + std::to_string(line_no) + ": malformed event");
      Event e;
      e.time = parse_double(f[0], line_no);
      e.constraint = static_cast<int>(parse_double(f[1], line_no));
      if (f[2] == "activate") {
        e.kind = EventKind::activate;
      } else if (f[2] == "deactivate") {
        e.kind = EventKind::deactivate;
      } else {
        throw ConfigError("trajectory CSV line " + std::to_string(line_no) + ": unknown event kind");
      }
      traj.events.push_back(e);
      continue;
    }
    if (line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (x_cols < 0) {
      if (cells.size() < 3 || cells[0] != "t" || cells[1] != "u" || cells[2] != "active") {
        throw ConfigError("trajectory CSV must start with the header t,u,active,...");
      }
      x_cols = 0;
      for (std::size_t i = 3; i < cells.size() && !cells[i].empty() && cells[i][0] == 'x'; ++i) ++x_cols;
      if (x_cols != state_dim) throw ConfigError("trajectory CSV state dimension does not match the problem");
      continue;
    }
    if (cells.size() < static_cast<std::size_t>(3 + x_cols)) {
      throw ConfigError("trajectory CSV line " + std::to_string(line_no) + ": too few columns");
    }
    traj.times.push_back(parse_double(cells[0], line_no));
    traj.inputs.push_back(parse_double(cells[1], line_no));
    traj.active.push_back(static_cast<int>(parse_double(cells[2], line_no)));
    Vec x(x_cols);
    for (int i = 0; i < x_cols; ++i) x[i] = parse_double(cells[static_cast<std::size_t>(3 + i)], line_no);
    traj.states.push_back(std::move(x));
  }
  if (x_cols < 0) throw ConfigError("trajectory CSV has no header");
  if (traj.empty()) throw ConfigError("trajectory CSV has no samples");
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (!(traj.times[k] > traj.times[k - 1])) throw ConfigError("trajectory CSV times must strictly increase");
  }
  return traj;
}

void write_costate_csv(std::ostream& out, const CostateTrajectory& costate) {
  const long n = costate.lambda.empty() ? 0 : costate.lambda.front().size();
  out << "t,sigma,mu";
  for (long i = 1; i <= n; ++i) out << ",lambda" << i;
  out << '\n';
  for (std::size_t k = 0; k < costate.size(); ++k) {
    out << fmt(costate.times[k]) << ',' << fmt(costate.sigma[k]) << ',' << fmt(costate.mu[k]);
    for (long i = 0; i < n; ++i) out << ',' << fmt(costate.lambda[k][i]);
    out << '\n';
  }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw ConfigError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("cannot move output into '" + path + "': " + ec.message());
  }
}

std::string trajectory_csv(const OCProblem& problem, const Trajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, problem, traj);
  return os.str();
}

std::string costate_csv(const CostateTrajectory& costate) {
  std::ostringstream os;
  write_costate_csv(os, costate);
  return os.str();
}

Trajectory load_trajectory_csv(const std::string& path, int state_dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory '" + path + "'");
  return read_trajectory_csv(in, state_dim);
}

}  // namespace bangride
