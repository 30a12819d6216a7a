#pragma once

#include <stdexcept>
#include <string>

namespace ruinlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration, detected before any computation.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A modelling hypothesis required by the requested computation does not hold.
///
/// `condition()` is one of the stable identifiers "SafLoaCon", "mu_si_0",
/// "cond_tau", "tau_infi", "EK_positive", "claim_moment".
class HypothesisViolation : public Error {
 public:
  HypothesisViolation(std::string condition, const std::string& message)
      : Error(condition + ": " + message), condition_(std::move(condition)) {}

  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

/// A numerical procedure could not produce a result (no bracket, degenerate estimate).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ruinlab
