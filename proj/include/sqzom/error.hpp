#pragma once

#include <stdexcept>
#include <string>

namespace sqzom {

// Base of every error the library throws. kind() is a stable, machine-parsable
// tag used by the CLI when it reports failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Input outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

// A value that should satisfy a documented invariant does not.
class InvariantViolation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invariant"; }
};

// Dynamical instability (negative total damping, diverging trajectory).
class InstabilityError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "instability"; }
};

class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported"; }
};

class FitError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "fit"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

}  // namespace sqzom
