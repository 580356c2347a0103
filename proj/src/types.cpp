#include "seiaqr/types.hpp"

namespace seiaqr {

Compartment compartment_from_name(const std::string& name) {
  if (name == "S") return Compartment::S;
  if (name == "E") return Compartment::E;
  if (name == "I") return Compartment::I;
  if (name == "A") return Compartment::A;
  if (name == "Q") return Compartment::Q;
  if (name == "R") return Compartment::R;
  raise(ErrorCode::UnknownCompartment,
        "unknown compartment '" + name + "'; expected one of S,E,I,A,Q,R");
}

std::string to_string(Compartment c) {
  switch (c) {
    case Compartment::S: return "S";
    case Compartment::E: return "E";
    case Compartment::I: return "I";
    case Compartment::A: return "A";
    case Compartment::Q: return "Q";
    case Compartment::R: return "R";
  }
  raise(ErrorCode::UnknownCompartment, "compartment index out of range");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LongTerm: return "long_term";
    case ModelKind::Limiting: return "limiting";
    case ModelKind::ShortTerm: return "short_term";
  }
  raise(ErrorCode::DomainError, "model kind out of range");
}

std::string to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::NonFiniteInput: return "non-finite-input";
    case ErrorCode::ZeroPopulation: return "zero-population";
    case ErrorCode::InvalidFraction: return "invalid-fraction";
    case ErrorCode::DegenerateRc: return "degenerate-rc";
    case ErrorCode::NoEndemicEquilibrium: return "no-endemic-equilibrium";
    case ErrorCode::InvalidTheta: return "invalid-theta";
    case ErrorCode::NotAnEquilibrium: return "not-an-equilibrium";
    case ErrorCode::DomainError: return "domain-error";
    case ErrorCode::NegativeStateBlowup: return "negative-state-blowup";
    case ErrorCode::StepSizeUnderflow: return "step-size-underflow";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::GapError: return "gap-error";
    case ErrorCode::ConsistencyError: return "consistency-error";
    case ErrorCode::UnknownParameter: return "unknown-parameter";
    case ErrorCode::UnknownCompartment: return "unknown-compartment";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::UsageError: return "usage-error";
  }
  return "unknown-error";
}

}  // namespace seiaqr
