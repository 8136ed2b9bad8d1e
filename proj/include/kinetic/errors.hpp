#pragma once

#include <stdexcept>
#include <string>

namespace kinetic {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid phase point or geometric degeneracy.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a closed-form constant.
class MathDomainError : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected during parsing or validation.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Nonlinear iteration failure (smallness violated, blow-up, coupling failed).
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double measured)
      : Error(what), measured_(measured) {}
  double measured() const { return measured_; }

 private:
  double measured_;
};

}  // namespace kinetic
