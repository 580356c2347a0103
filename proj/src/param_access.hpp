#pragma once

#include <string>

#include "seiaqr/model.hpp"

// By-name access to the rate constants of Params, shared by the JSON
// schema, the calibration free-parameter machinery, and the CLI sweeps.
namespace seiaqr::detail {

inline constexpr const char* kRateNames[12] = {"lambda", "d",  "beta", "a",
                                               "b",      "c",  "p",    "q1",
                                               "q2",     "r1", "r2",   "r3"};

inline double& rate_field(Params& p, int i) {
  double* fields[12] = {&p.lambda, &p.d,  &p.beta, &p.a,  &p.b,  &p.c,
                        &p.p,      &p.q1, &p.q2,   &p.r1, &p.r2, &p.r3};
  return *fields[i];
}

inline double rate_field(const Params& p, int i) {
  return rate_field(const_cast<Params&>(p), i);
}

/// Index of a rate-constant name, or -1 when unrecognized.
inline int rate_index(const std::string& name) {
  for (int i = 0; i < 12; ++i)
    if (name == kRateNames[i]) return i;
  return -1;
}

/// Index of an initial-condition name (S0..R0), or -1 when unrecognized.
inline int initial_index(const std::string& name) {
  constexpr const char* kInitialNames[6] = {"S0", "E0", "I0", "A0", "Q0", "R0"};
  for (int i = 0; i < 6; ++i)
    if (name == kInitialNames[i]) return i;
  return -1;
}

}  // namespace seiaqr::detail
