#pragma once

#include <stdexcept>
#include <string>

namespace sphvisc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Velocity m/rho was requested at a vacuum state.
class VacuumError : public Error {
 public:
  using Error::Error;
};

/// The density became non-positive during a run.
class PositivityError : public Error {
 public:
  PositivityError(const std::string& what, std::size_t node, double x, double t)
      : Error(what), node_(node), x_(x), t_(t) {}
  std::size_t node() const { return node_; }
  double x() const { return x_; }
  double t() const { return t_; }

 private:
  std::size_t node_;
  double x_;
  double t_;
};

/// The requested time step exceeds the stability limit.
class CflError : public Error {
 public:
  using Error::Error;
};

/// A coefficient callback returned a non-finite value.
class CoefficientError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sphvisc
