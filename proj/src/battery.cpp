#include "bangride/battery.hpp"

#include <cmath>
#include <fstream>
#include <memory>

#include "bangride/errors.hpp"

#ifndef BANGRIDE_DATA_DIR
#define BANGRIDE_DATA_DIR "data"
#endif

namespace bangride::battery {

namespace {

constexpr int kValidationSamples = 400;

double checked(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ConfigError(where + ": missing numeric field '" + key + "'");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": field '" + key + "' is not finite");
  return v;
}

std::vector<OcpTerm> parse_terms(const nlohmann::json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) throw ConfigError(where + ": expected a non-empty list of terms");
  std::vector<OcpTerm> out;
  for (const auto& t : arr) {
    OcpTerm term;
    const std::string kind = t.value("kind", "power");
    term.coef = checked(t, "coef", where);
    if (kind == "power") {
      term.kind = OcpTerm::Kind::power;
      term.power = checked(t, "power", where);
    } else if (kind == "exp") {
      term.kind = OcpTerm::Kind::exp;
      term.rate = checked(t, "rate", where);
      term.offset = t.contains("offset") ? checked(t, "offset", where) : 0.0;
    } else {
      throw ConfigError(where + ": unknown term kind '" + kind + "'");
    }
    out.push_back(term);
  }
  return out;
}

double sum_value(const std::vector<OcpTerm>& terms, double theta) {
  double s = 0.0;
  for (const auto& t : terms) s += t.value(theta);
  return s;
}

double sum_derivative(const std::vector<OcpTerm>& terms, double theta) {
  double s = 0.0;
  for (const auto& t : terms) s += t.derivative(theta);
  return s;
}

void validate_curve(const OcpCurve& curve, const std::string& label) {
  const auto [lo, hi] = curve.valid_theta();
  for (int i = 0; i <= kValidationSamples; ++i) {
    const double c = curve.c_max() * (lo + (hi - lo) * i / kValidationSamples);
    const double u = curve.value(c);
    const double du = curve.derivative(c);
    if (!std::isfinite(u) || !std::isfinite(du)) {
      throw ConfigError(label + ": open-circuit potential is not finite at c = " + std::to_string(c));
    }
    if (!(du < 0.0)) {
      throw ConfigError(label + ": open-circuit potential is not decreasing at c = " + std::to_string(c));
    }
  }
}

/// d i0 / dc for i0 = k sqrt(1000 c (c_max - c)).
double exchange_slope(double k, double c, double c_max, double i0) {
  return k * k * 1000.0 * (c_max - 2.0 * c) / (2.0 * i0);
}

}  // namespace

double OcpTerm::value(double theta) const {
  if (kind == Kind::power) return coef * std::pow(theta, power);
  return coef * std::exp(rate * theta + offset);
}

double OcpTerm::derivative(double theta) const {
  if (kind == Kind::power) return power == 0.0 ? 0.0 : coef * power * std::pow(theta, power - 1.0);
  return coef * rate * std::exp(rate * theta + offset);
}

OcpCurve::OcpCurve(Representation rep, double c_max, std::vector<OcpTerm> numerator,
                   std::vector<OcpTerm> denominator, std::pair<double, double> valid_theta)
    : rep_(rep), c_max_(c_max), num_(std::move(numerator)), den_(std::move(denominator)), valid_(valid_theta) {
  if (!(c_max_ > 0.0)) throw ConfigError("OCP c_max must be positive");
  if (num_.empty()) throw ConfigError("OCP needs at least one term");
  if (rep_ == Representation::rational && den_.empty()) throw ConfigError("rational OCP needs a denominator");
  if (!(valid_.first > 0.0 && valid_.first < valid_.second && valid_.second < 1.0)) {
    throw ConfigError("OCP valid range must satisfy 0 < lo < hi < 1");
  }
}

double OcpCurve::value(double c) const {
  const double theta = c / c_max_;
  if (rep_ == Representation::sum) return sum_value(num_, theta);
  return sum_value(num_, theta) / sum_value(den_, theta);
}

double OcpCurve::derivative(double c) const {
  const double theta = c / c_max_;
  double d;
  if (rep_ == Representation::sum) {
    d = sum_derivative(num_, theta);
  } else {
    const double n = sum_value(num_, theta);
    const double q = sum_value(den_, theta);
    d = (sum_derivative(num_, theta) * q - n * sum_derivative(den_, theta)) / (q * q);
  }
  return d / c_max_;
}

OcpCurve OcpCurve::from_json(const nlohmann::json& j, const std::string& label) {
  if (!j.is_object()) throw ConfigError(label + ": expected an object");
  const std::string rep = j.value("representation", "");
  const double c_max = checked(j, "c_max", label);
  if (!j.contains("valid_range") || !j.at("valid_range").is_array() || j.at("valid_range").size() != 2) {
    throw ConfigError(label + ": valid_range must be [theta_lo, theta_hi]");
  }
  const std::pair<double, double> range{j.at("valid_range")[0].get<double>(), j.at("valid_range")[1].get<double>()};
  if (rep == "sum") {
    if (!j.contains("terms")) throw ConfigError(label + ": sum representation needs 'terms'");
    return OcpCurve(Representation::sum, c_max, parse_terms(j.at("terms"), label), {}, range);
  }
  if (rep == "rational") {
    if (!j.contains("numerator") || !j.contains("denominator")) {
      throw ConfigError(label + ": rational representation needs 'numerator' and 'denominator'");
    }
    return OcpCurve(Representation::rational, c_max, parse_terms(j.at("numerator"), label),
                    parse_terms(j.at("denominator"), label), range);
  }
  throw ConfigError(label + ": unknown representation '" + rep + "'");
}

OcpTable OcpTable::from_json(const nlohmann::json& j) {
  if (!j.contains("U_plus") || !j.contains("U_minus")) throw ConfigError("OCP config needs U_plus and U_minus");
  OcpTable t{OcpCurve::from_json(j.at("U_plus"), "U_plus"), OcpCurve::from_json(j.at("U_minus"), "U_minus")};
  validate_curve(t.plus, "U_plus");
  validate_curve(t.minus, "U_minus");
  return t;
}

OcpTable OcpTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open OCP config '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed OCP config '" + path + "': " + e.what());
  }
}

OcpTable OcpTable::load_default() { return load(data_path("ocp_lco_graphite.json")); }

std::string data_path(const std::string& file) { return std::string(BANGRIDE_DATA_DIR) + "/" + file; }

double soc(double c_ave) { return (c_ave / kPosMaxConcentration - kSocOffset) / kSocSpan; }

double soc_slope() { return 1.0 / (kPosMaxConcentration * kSocSpan); }

double average_concentration_from_soc(double soc_value) {
  return kPosMaxConcentration * (kSocOffset + kSocSpan * soc_value);
}

double negative_offset() {
  const double x1_full = average_concentration_from_soc(1.0) / row_pos_average()[0];
  return kNegStoichiometryFull * kNegMaxConcentration - row_neg_average()[0] * x1_full;
}

ExchangeCurrents exchange_currents(double c_ps, double c_ns) {
  if (!(c_ps > 0.0 && c_ps < kPosMaxConcentration)) {
    throw DomainError("positive surface concentration " + std::to_string(c_ps) + " outside (0, 51554)");
  }
  if (!(c_ns > 0.0 && c_ns < kNegMaxConcentration)) {
    throw DomainError("negative surface concentration " + std::to_string(c_ns) + " outside (0, 30555)");
  }
  return {kPosRateConstant * std::sqrt(1000.0 * c_ps * (kPosMaxConcentration - c_ps)),
          kNegRateConstant * std::sqrt(1000.0 * c_ns * (kNegMaxConcentration - c_ns))};
}

VoltagePartials voltage_with_partials(double c_ps, double c_ns, double current, const OcpTable& ocp) {
  const ExchangeCurrents i0 = exchange_currents(c_ps, c_ns);
  const double z = current / (kPosCurrentScale * i0.plus);
  const double w = -current / (kNegCurrentScale * i0.minus);
  const double dz = 1.0 / std::sqrt(1.0 + z * z);
  const double dw = 1.0 / std::sqrt(1.0 + w * w);
  const double tau = kThermalVoltage;

  VoltagePartials v;
  v.value = tau * std::asinh(z) - tau * std::asinh(w) + ocp.plus.value(c_ps) - ocp.minus.value(c_ns) +
            kFilmResistance * current;
  const double di0p = exchange_slope(kPosRateConstant, c_ps, kPosMaxConcentration, i0.plus);
  const double di0n = exchange_slope(kNegRateConstant, c_ns, kNegMaxConcentration, i0.minus);
  v.d_c_ps = tau * dz * (-z / i0.plus) * di0p + ocp.plus.derivative(c_ps);
  v.d_c_ns = -tau * dw * (-w / i0.minus) * di0n - ocp.minus.derivative(c_ns);
  v.d_current = tau * dz / (kPosCurrentScale * i0.plus) + tau * dw / (kNegCurrentScale * i0.minus) + kFilmResistance;
  return v;
}

double voltage(double c_ps, double c_ns, double current, const OcpTable& ocp) {
  return voltage_with_partials(c_ps, c_ns, current, ocp).value;
}

Vec initial_state_from_soc(double soc0) {
  Vec x = Vec::Zero(5);
  x[0] = average_concentration_from_soc(soc0) / row_pos_average()[0];
  return x;
}

Concentrations concentrations(const Vec& x) {
  const double d = negative_offset();
  return {row_pos_surface().dot(x), row_neg_surface().dot(x) + d, row_pos_average().dot(x),
          row_neg_average().dot(x) + d};
}

ChargingScenario ChargingScenario::from_json(const nlohmann::json& j) {
  ChargingScenario s;
  s.soc0 = checked(j, "soc0", "scenario");
  s.t_f = checked(j, "t_f", "scenario");
  if (j.contains("I_max")) s.max_current = checked(j, "I_max", "scenario");
  if (j.contains("V_max")) s.max_voltage = checked(j, "V_max", "scenario");
  if (!(s.soc0 >= 0.0 && s.soc0 < 1.0)) throw ConfigError("scenario soc0 must lie in [0, 1)");
  if (!(s.t_f >= 0.0)) throw ConfigError("scenario t_f must be non-negative");
  if (!(s.max_current > 0.0)) throw ConfigError("scenario I_max must be positive");
  return s;
}

ChargingScenario ChargingScenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed scenario '" + path + "': " + e.what());
  }
}

ChargingScenario ChargingScenario::load_default() { return load(data_path("spm_default_scenario.json")); }

OCProblem build_charging_problem(double soc0, double t_f, const OcpTable& ocp, double max_current,
                                 double max_voltage) {
  if (!(soc0 >= 0.0 && soc0 < 1.0)) throw ConfigError("soc0 must lie in [0, 1)");
  auto table = std::make_shared<const OcpTable>(ocp);
  const double d = negative_offset();

  auto value = [table, d, max_voltage](const Vec& x, double current) {
    return voltage(row_pos_surface().dot(x), row_neg_surface().dot(x) + d, current, *table) - max_voltage;
  };
  auto grad_x = [table, d](const Vec& x, double current) -> Vec {
    const VoltagePartials v = voltage_with_partials(row_pos_surface().dot(x), row_neg_surface().dot(x) + d, current, *table);
    return v.d_c_ps * row_pos_surface() + v.d_c_ns * row_neg_surface();
  };
  auto grad_u = [table, d](const Vec& x, double current) {
    return voltage_with_partials(row_pos_surface().dot(x), row_neg_surface().dot(x) + d, current, *table).d_current;
  };

  ScalarField phi;
  phi.value = [](const Vec& x) { return -soc(row_pos_average().dot(x)); };
  phi.grad = [](const Vec&) -> Vec { return -soc_slope() * row_pos_average(); };

  std::vector<Constraint> path;
  path.push_back(Constraint::mixed("voltage", value, grad_x, grad_u));
  return make_problem("spm_charging", SystemModel::linear_diagonal(modes()), initial_state_from_soc(soc0), t_f, 0.0,
                      max_current, std::move(phi), std::move(path));
}

OCProblem build_charging_problem(const ChargingScenario& scenario, const OcpTable& ocp) {
  return build_charging_problem(scenario.soc0, scenario.t_f, ocp, scenario.max_current, scenario.max_voltage);
}

}  // namespace bangride::battery
