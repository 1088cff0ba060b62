#pragma once

#include <stdexcept>
#include <string>

namespace issl2 {

/// Argument outside the mathematical domain of an operation (negative
/// argument, non-positive scale, dimension mismatch, wrong certificate kind).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A value could not be bracketed inside the saturation range.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// A documented precondition (usually a K-infinity certification) failed.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerically constructed object (bound envelope, transform) could not be
/// certified.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration aborted because the state left the simulation envelope or the
/// vector field returned a non-finite value.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace issl2
