#pragma once

#include "seiaqr/types.hpp"

#include <optional>
#include <string>

namespace seiaqr {

/// Long-term vs closed-population parameterization. Long mode requires
/// lambda > 0 and d > 0; Short mode requires lambda = d = 0.
enum class Mode { Long, Short };

std::string to_string(Mode mode);

/// All rate constants of the SEIAQR models. The short-term model is the
/// lambda = d = 0 restriction of the long-term one.
struct Params {
  double lambda = 0;  ///< recruitment, persons/day
  double d = 0;       ///< natural death rate, 1/day
  double beta = 0;    ///< transmission rate, 1/day
  double a = 0;       ///< exposed-infectivity factor, dimensionless
  double b = 0;       ///< asymptomatic-infectivity factor, dimensionless
  double c = 0;       ///< exit rate from the exposed compartment, 1/day
  double p = 0;       ///< probability of the symptomatic path, in [0,1]
  double q1 = 0;      ///< quarantine rate of symptomatic infected, 1/day
  double q2 = 0;      ///< quarantine rate of asymptomatic infected, 1/day
  double r1 = 0;      ///< recovery rate of symptomatic infected, 1/day
  double r2 = 0;      ///< recovery rate of asymptomatic infected, 1/day
  double r3 = 0;      ///< recovery rate of quarantined, 1/day
  Mode mode = Mode::Long;

  // Computed on demand rather than stored so they can never go stale.
  double B1() const { return q1 + r1 + d; }
  double B2() const { return q2 + r2 + d; }
  /// Demographic carrying capacity S0 = lambda/d (long mode only).
  double s0() const { return lambda / d; }

  /// Throws InvalidParameter / NonFiniteInput on any violated invariant.
  void validate() const;
};

/// Natural ModelKind for a parameter set: LongTerm for Mode::Long,
/// ShortTerm for Mode::Short.
ModelKind default_kind(Mode mode);
inline ModelKind default_kind(const Params& params) {
  return default_kind(params.mode);
}

double total_population(const Vector6& x);

/// Right-hand side of the demographic model: standard incidence
/// beta*S/N*(aE + I + bA) with recruitment and natural death.
Vector6 rhs_long(const Params& params, const Vector6& x);

/// Same flows with the incidence denominator frozen at S0 = lambda/d.
Vector6 rhs_limiting(const Params& params, const Vector6& x);

/// Closed-population model: no recruitment, no natural death.
Vector6 rhs_short(const Params& params, const Vector6& x);

/// Dispatch on kind.
Vector6 rhs(ModelKind kind, const Params& params, const Vector6& x);

/// A parameter file: the rate constants plus an optional initial state.
struct ParamsFile {
  Params params;
  std::optional<Vector6> initial;
};

/// Parse the params JSON schema. Requires exactly the twelve rate fields
/// (lambda, d, beta, a, b, c, p, q1, q2, r1, r2, r3); accepts optional
/// "mode": "long"|"short" and optional "initial": {S,E,I,A,Q,R}. Any other
/// field is a ParseError (catches typos in rate names).
ParamsFile parse_params_json(const std::string& text);
ParamsFile load_params_file(const std::string& path);

std::string params_to_json(const Params& params);

}  // namespace seiaqr
