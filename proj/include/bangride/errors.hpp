#pragma once

#include <stdexcept>
#include <string>

namespace bangride {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state, input or derivative evaluated to NaN/Inf.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, int component = -1)
      : Error(component >= 0 ? what + " (component " + std::to_string(component) + ")" : what),
        component_(component) {}
  int component() const { return component_; }

 private:
  int component_;
};

/// An operation needs information the problem does not provide.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// The input sensitivity of a constraint vanished where it is divided by.
class DegenerateSensitivity : public Error {
 public:
  using Error::Error;
};

/// The control set D(x) is empty.
class InfeasibleState : public Error {
 public:
  using Error::Error;
};

/// A constraint that must increase in u does not.
class NonMonotoneConstraint : public Error {
 public:
  using Error::Error;
};

/// A root search was started on an interval without a sign change.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// The ride input left [u_min, u_max] during a hybrid simulation.
class RideDivergence : public Error {
 public:
  RideDivergence(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Argument outside the domain of a physical model function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or rejected configuration / input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bangride
