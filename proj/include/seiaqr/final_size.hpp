#pragma once

#include "seiaqr/model.hpp"
#include "seiaqr/types.hpp"

namespace seiaqr {

/// Residual of the closed-population final-size relation at a candidate
/// susceptible depletion z = S(0) - S(inf):
///   r(z) = z - S(0) * (1 - exp(-[(z + E0) * rc / s_tilde
///                                + beta*I0 / (N*(q1+r1))
///                                + beta*b*A0 / (N*(q2+r2))]))
/// where rc is the short-term reproduction number with the same s_tilde.
/// s_tilde <= 0 selects the default s_tilde = N. Requires short mode and
/// 0 <= z <= S(0).
double final_size_residual(const Params& params, const Vector6& x0,
                           double s_tilde, double z);

struct FinalSizeResult {
  double z = 0;                    ///< S(0) - S(inf)
  double s_infinity = 0;
  double fraction = 0;             ///< z / N
  double total_ever_infected = 0;  ///< z + E0 + I0 + A0 + Q0
  int iterations = 0;
  double residual = 0;             ///< residual at the returned z
};

/// Largest root of the residual in [0, S(0)]: damped fixed-point iteration
/// z <- S(0)*(1 - exp(-(...))) from z = S(0) — monotone decreasing, since
/// the map is increasing in z and bounded by S(0) — with a bisection
/// fallback. Converged when |dz| < 1e-9 * max(1, S(0)); more than 1e4
/// iterations raises NoConvergence (the message reports the bracket).
FinalSizeResult solve_final_size(const Params& params, const Vector6& x0,
                                 double s_tilde = -1);

}  // namespace seiaqr
