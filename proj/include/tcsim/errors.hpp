#pragma once

#include <stdexcept>
#include <string>

namespace tcsim {

enum class ErrorKind {
  Domain,
  Pole,
  Node,
  Resonance,
  BifurcationPoint,
  InfinitePeriod,
  DivisionByZero,
  StepUnderflow,
  NonFiniteState,
  InsufficientData,
  FitFailure,
  Truncation,
  Config,
  InvariantViolation
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Pole: return "pole error";
    case ErrorKind::Node: return "node error";
    case ErrorKind::Resonance: return "resonance error";
    case ErrorKind::BifurcationPoint: return "bifurcation-point error";
    case ErrorKind::InfinitePeriod: return "infinite-period error";
    case ErrorKind::DivisionByZero: return "division-by-zero error";
    case ErrorKind::StepUnderflow: return "step-size underflow";
    case ErrorKind::NonFiniteState: return "non-finite state";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::FitFailure: return "fit failure";
    case ErrorKind::Truncation: return "truncation error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::InvariantViolation: return "invariant violation";
  }
  return "error";
}

// Single exception type; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the integrator; carries the time at which it gave up.
class IntegrationError : public Error {
 public:
  IntegrationError(ErrorKind kind, double t, const std::string& what)
      : Error(kind, what + " at t=" + std::to_string(t)), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace tcsim
