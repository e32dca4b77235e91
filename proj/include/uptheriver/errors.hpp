#pragma once

#include <stdexcept>
#include <string>

namespace uptheriver {

/// Argument outside the domain of a function (non-positive time, a >= b, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke an API contract (unsorted snapshot, over-budget allocation).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Initial configuration violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A density profile produced an invalid value.
class ProfileError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The record lacks data an operation needs (e.g. no drift log).
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The value exists but is not yet meaningful (e.g. run stopped before t = 1).
class AdvisoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or command line.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature or series failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved error " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// The moving-boundary solver could not advance.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double t)
      : std::runtime_error(what + " at t=" + std::to_string(t)), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

}  // namespace uptheriver
