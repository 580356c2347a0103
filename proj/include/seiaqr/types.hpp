#pragma once

#include <Eigen/Core>

#include <complex>
#include <stdexcept>
#include <string>

namespace seiaqr {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using ComplexVector6 = Eigen::Matrix<std::complex<double>, 6, 1>;

/// Compartment order used by every Vector6 in the library.
enum class Compartment : int { S = 0, E = 1, I = 2, A = 3, Q = 4, R = 5 };

Compartment compartment_from_name(const std::string& name);
std::string to_string(Compartment c);

/// Named view of one point of the state space, in persons.
struct State {
  double S = 0, E = 0, I = 0, A = 0, Q = 0, R = 0;

  Vector6 vec() const {
    return (Vector6() << S, E, I, A, Q, R).finished();
  }
  static State from_vec(const Vector6& v) {
    return State{v[0], v[1], v[2], v[3], v[4], v[5]};
  }
};

/// Which right-hand side a computation uses: the full demographic model,
/// the same model with the incidence denominator frozen at S0 = lambda/d,
/// or the closed-population model (lambda = d = 0).
enum class ModelKind { LongTerm, Limiting, ShortTerm };

std::string to_string(ModelKind kind);

enum class ErrorCode {
  InvalidParameter,
  NonFiniteInput,
  ZeroPopulation,
  InvalidFraction,
  DegenerateRc,
  NoEndemicEquilibrium,
  InvalidTheta,
  NotAnEquilibrium,
  DomainError,
  NegativeStateBlowup,
  StepSizeUnderflow,
  NoConvergence,
  ParseError,
  GapError,
  ConsistencyError,
  UnknownParameter,
  UnknownCompartment,
  IoError,
  UsageError,
};

std::string to_string(ErrorCode code);

/// Library-wide exception: a stable machine-readable code plus a human
/// message. The CLI maps these to {"error": code, "message": text} payloads.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace seiaqr
