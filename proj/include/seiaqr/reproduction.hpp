#pragma once

#include "seiaqr/model.hpp"
#include "seiaqr/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace seiaqr {

/// Control reproduction number. For the LongTerm / Limiting kinds the
/// disease-free susceptible fraction is 1 and s_tilde / n_total are
/// ignored. For ShortTerm the value carries a susceptible-fraction factor
/// s_tilde / n_total; pass both (with 0 <= s_tilde <= n_total, else
/// InvalidFraction), or leave both negative for a fully susceptible
/// population (factor 1).
double rc(const Params& params, ModelKind kind, double s_tilde = -1,
          double n_total = -1);

/// Partial derivatives of rc, keyed by differentiation variable:
/// "b", "1-p", "q1", "q2" use exact closed forms; "a", "beta", "r1", "r2"
/// use central finite differences with step max(1e-6*|k|, 1e-9);
/// "p" = -d(rc)/d(1-p) is included as a derived convenience.
std::map<std::string, double> rc_gradient(const Params& params, ModelKind kind,
                                          double s_tilde = -1,
                                          double n_total = -1);

/// One normalized sensitivity (elasticity) entry
/// xi_k = (d rc / d k) * (k / rc).
struct SensitivityEntry {
  std::string name;
  double value = 0;
};

/// Elasticities of rc for the seven controllable parameters
/// {a, beta, b, q1, q2, r1, r2}, sorted by descending |value|. The beta
/// entry is exactly +1; a and b entries are >= 0; the quarantine and
/// recovery entries are <= 0. Throws DegenerateRc when rc == 0. The
/// susceptible-fraction factor of the short-term rc cancels in every
/// index, so no s_tilde / n_total is needed.
std::vector<SensitivityEntry> sensitivity_indices(const Params& params,
                                                  ModelKind kind);

/// The asymptomatic-infectivity value at which d(rc)/d(1-p) changes sign:
/// B2/B1 for the long-term kinds, (q2+r2)/(q1+r1) for the short-term kind.
/// Below it, a larger symptomatic fraction raises rc; above it, lowers.
double critical_b(const Params& params, ModelKind kind);

}  // namespace seiaqr
