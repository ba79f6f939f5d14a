#pragma once

#include <stdexcept>
#include <string>

namespace fwlab {

/// Invalid parameters, malformed configuration, or a violated precondition.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a closed-form evaluator (t <= 0, tau >= t, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A whole-line surrogate is not negligible near the edge of the periodic box.
class DomainTruncationError : public std::runtime_error {
 public:
  DomainTruncationError(const std::string& what, double t)
      : std::runtime_error(what), time(t) {}
  double time;
};

/// Non-finite or runaway amplitude during time integration.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double t, double amp)
      : std::runtime_error(what), time(t), amplitude(amp) {}
  double time;
  double amplitude;
};

/// Quadrature or fit failed to reach its tolerance.
class ToleranceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A time integral over [0, inf) whose fitted tail t^s has s >= -1.
class NonIntegrableTailError : public ToleranceError {
 public:
  NonIntegrableTailError(const std::string& what, double slope)
      : ToleranceError(what), slope(slope) {}
  double slope;
};

/// Input data inconsistent with a required identity (e.g. nonzero mass defect).
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fwlab
