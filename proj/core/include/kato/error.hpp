#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kato {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario configuration; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a structural requirement (dimensions, ranges).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An age, time or duration that does not fall on the age grid.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an ordering or range contract (e.g. sigma > a, p <= 1).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Input state is outside the domain an operation requires (e.g. not in Y).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The per-step renewal system is singular at the current age step.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// An iterative limit did not settle; carries the observed gap history.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> gaps)
      : Error(what), gaps_(std::move(gaps)) {}
  const std::vector<double>& gaps() const noexcept { return gaps_; }

 private:
  std::vector<double> gaps_;
};

}  // namespace kato
