#pragma once

#include <stdexcept>
#include <string>

namespace cable {

/// Invalid argument or out-of-range query (nonpositive tension, point outside grid, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Explicit time stepping requested beyond its stability limit.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical invariant the code relies on was violated (e.g. a nonpositive
/// eigenvalue of a coercive form).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The requested operation is not supported for this input (e.g. the
/// characteristic equation for more than one support).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative search failed to produce a meaningful answer.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid configuration; carries the 1-based source line when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace cable
