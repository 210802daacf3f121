#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pbsmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inertia not symmetric positive definite, input map singular, or a
/// dimension mismatch between a state and its model.
class ModelInvalid : public Error {
 public:
  using Error::Error;
};

/// Non-positive-definite inertia; carries the offending eigenvalue.
class FactorizationError : public ModelInvalid {
 public:
  FactorizationError(const std::string& what, double offending_eigenvalue)
      : ModelInvalid(what), eigenvalue_(offending_eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// Sliding map with a singular (or ill-conditioned) Jacobian.
class MapInvalid : public Error {
 public:
  using Error::Error;
};

/// A sampled certification found a point where an assumption fails.
class AssumptionViolated : public Error {
 public:
  AssumptionViolated(const std::string& what, Eigen::VectorXd witness)
      : Error(what), witness_(std::move(witness)) {}
  const Eigen::VectorXd& witness() const { return witness_; }

 private:
  Eigen::VectorXd witness_;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class TrajectoryError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key = {},
              std::optional<int> line = std::nullopt)
      : Error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  std::optional<int> line() const { return line_; }

 private:
  std::string key_;
  std::optional<int> line_;
};

}  // namespace pbsmc
