#pragma once

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "bangride/model.hpp"

namespace bangride::battery {

// Reduced single-particle model: five modes, x' = diag(a) x + 1 I.
inline const Vec& modes() {
  static const Vec a = (Vec(5) << 0.0, -0.0514, -0.4211, -0.2006, -1.6422).finished();
  return a;
}
inline const Vec& row_pos_surface() {
  static const Vec r = (Vec(5) << -0.1639, -0.1193, -0.8643, 0.0, 0.0).finished();
  return r;
}
inline const Vec& row_pos_average() {
  static const Vec r = (Vec(5) << -0.1639, 0.0, 0.0, 0.0, 0.0).finished();
  return r;
}
inline const Vec& row_neg_surface() {
  static const Vec r = (Vec(5) << 0.1183, 0.0, 0.0, 0.0861, 0.6237).finished();
  return r;
}
inline const Vec& row_neg_average() {
  static const Vec r = (Vec(5) << 0.1183, 0.0, 0.0, 0.0, 0.0).finished();
  return r;
}

inline constexpr double kPosMaxConcentration = 51554.0;  // mol/m^3
inline constexpr double kNegMaxConcentration = 30555.0;  // mol/m^3
inline constexpr double kSocOffset = 0.9917;
inline constexpr double kSocSpan = -0.4962;
/// Anode stoichiometry at full charge; fixes the offset of the negative concentrations.
inline constexpr double kNegStoichiometryFull = 0.8551;
inline constexpr double kThermalVoltage = 1.236e-8;  // tau
inline constexpr double kFilmResistance = 0.0022;    // ohm
inline constexpr double kPosCurrentScale = 221.69;
inline constexpr double kNegCurrentScale = 189.6681;
inline constexpr double kPosRateConstant = 5.031e-11;
inline constexpr double kNegRateConstant = 2.334e-11;
inline constexpr double kDefaultMaxCurrent = 300.0;  // A
inline constexpr double kDefaultMaxVoltage = 4.5;    // V

/// Offset d so that c_{-,s} = C_{-,s} x + d and c_{-,ave} = C_{-,ave} x + d.
double negative_offset();

/// One additive term of an OCP expression in the stoichiometry theta = c / c_max:
/// power: coef * theta^power; exp: coef * exp(rate * theta + offset).
struct OcpTerm {
  enum class Kind { power, exp };
  Kind kind = Kind::power;
  double coef = 0.0;
  double power = 0.0;
  double rate = 0.0;
  double offset = 0.0;

  double value(double theta) const;
  double derivative(double theta) const;
};

/// Open-circuit potential U(c) as a sum of terms or a ratio of two sums.
class OcpCurve {
 public:
  enum class Representation { sum, rational };

  OcpCurve() = default;
  OcpCurve(Representation rep, double c_max, std::vector<OcpTerm> numerator, std::vector<OcpTerm> denominator,
           std::pair<double, double> valid_theta);

  double value(double c) const;
  /// dU/dc.
  double derivative(double c) const;
  double c_max() const { return c_max_; }
  std::pair<double, double> valid_theta() const { return valid_; }

  static OcpCurve from_json(const nlohmann::json& j, const std::string& label);

 private:
  Representation rep_ = Representation::sum;
  double c_max_ = 1.0;
  std::vector<OcpTerm> num_, den_;
  std::pair<double, double> valid_{0.0, 1.0};
};

/// Positive and negative electrode OCP curves. Loading checks that both are
/// finite with dU/dc < 0 across their valid ranges and refuses the file otherwise.
struct OcpTable {
  OcpCurve plus;
  OcpCurve minus;

  static OcpTable from_json(const nlohmann::json& j);
  static OcpTable load(const std::string& path);
  /// Table shipped in the data directory.
  static OcpTable load_default();
};

/// Path of a file in the installed data directory.
std::string data_path(const std::string& file);

/// (c_ave / 51554 - 0.9917) / (-0.4962); values outside [0, 1] are returned unchanged.
double soc(double c_ave);
inline bool soc_out_of_range(double value) { return value < 0.0 || value > 1.0; }
/// d soc / d c_ave.
double soc_slope();
/// Average positive concentration for a given state of charge.
double average_concentration_from_soc(double soc_value);

struct ExchangeCurrents {
  double plus = 0.0;
  double minus = 0.0;
};

/// Throws DomainError unless 0 < c_ps < 51554 and 0 < c_ns < 30555.
ExchangeCurrents exchange_currents(double c_ps, double c_ns);

struct VoltagePartials {
  double value = 0.0;
  double d_c_ps = 0.0;
  double d_c_ns = 0.0;
  double d_current = 0.0;
};

double voltage(double c_ps, double c_ns, double current, const OcpTable& ocp);
VoltagePartials voltage_with_partials(double c_ps, double c_ns, double current, const OcpTable& ocp);

/// Rest state: x1 from the inverted SOC map, decaying modes at zero.
Vec initial_state_from_soc(double soc0);

struct Concentrations {
  double pos_surface = 0.0;
  double neg_surface = 0.0;
  double pos_average = 0.0;
  double neg_average = 0.0;
};

Concentrations concentrations(const Vec& x);

struct ChargingScenario {
  double soc0 = 0.1;
  double t_f = 420.0;
  double max_current = kDefaultMaxCurrent;
  double max_voltage = kDefaultMaxVoltage;

  static ChargingScenario from_json(const nlohmann::json& j);
  static ChargingScenario load(const std::string& path);
  static ChargingScenario load_default();
};

/// Maximize SOC at t_f subject to 0 <= I <= I_max and V(x, I) <= V_max.
OCProblem build_charging_problem(double soc0, double t_f, const OcpTable& ocp,
                                 double max_current = kDefaultMaxCurrent, double max_voltage = kDefaultMaxVoltage);
OCProblem build_charging_problem(const ChargingScenario& scenario, const OcpTable& ocp);

}  // namespace bangride::battery
