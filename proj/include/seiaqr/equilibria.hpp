#pragma once

#include "seiaqr/model.hpp"
#include "seiaqr/types.hpp"

#include <array>
#include <string>

namespace seiaqr {

/// Disease-free equilibrium of the long-term / limiting models:
/// (lambda/d, 0, 0, 0, 0, 0).
State disease_free_long(const Params& params);

/// Endemic equilibrium of the limiting model: exists iff rc > 1 (throws
/// NoEndemicEquilibrium when rc <= 1 + 1e-12). Components sum exactly to
/// lambda/d.
State endemic_long(const Params& params);

/// Lower bounds on the long-run susceptible pool for a persistence
/// fraction theta in (0, 1): liminf S >= s_bar and (sharper) s_breve,
/// with s_breve > s_bar > s_star (the endemic susceptible value).
struct PersistenceBounds {
  double theta = 0;
  double s_bar = 0;    ///< lambda / (theta*beta*(aE*+I*+bA*)/S0 + d)
  double s_breve = 0;  ///< (lambda - theta*(c+d)*E*) / d
  double s_star = 0;   ///< S0 / rc
};

/// Requires rc > 1 (NoEndemicEquilibrium) and theta strictly inside (0, 1)
/// (InvalidTheta).
PersistenceBounds persistence_bounds(const Params& params, double theta);

/// Finite-difference Jacobian of rhs(kind, params, .) at x: central
/// differences with per-coordinate step max(1e-6*|x_j|, 1e-9*scale),
/// scale = lambda/d for the demographic kinds and total population for
/// the short-term kind.
Matrix6 jacobian(const Params& params, ModelKind kind, const Vector6& x);

enum class StabilityClass {
  LocallyAsymptoticallyStable,
  Unstable,
  Marginal,
};

std::string to_string(StabilityClass cls);

struct EquilibriumReport {
  Vector6 point;
  ComplexVector6 eigenvalues;  ///< sorted by descending real part
  StabilityClass classification = StabilityClass::Marginal;
  double max_real_part = 0;
};

/// Verifies x is an equilibrium (||rhs||_inf <= 1e-6 * max(lambda, 1),
/// else NotAnEquilibrium), then classifies it by the Jacobian spectrum
/// with tolerance 1e-7 on the real parts: all below -1e-7 is stable, any
/// above +1e-7 is unstable, otherwise marginal.
EquilibriumReport classify_stability(const Params& params, ModelKind kind,
                                     const Vector6& x);

/// Coefficients {a1, a2, a3} of the cubic factor of the short-term
/// characteristic polynomial at the (s_tilde, 0, 0, 0, 0, N - s_tilde)
/// equilibrium family. sign(a3) = sign(1 - rc); when rc > 1 the cubic has
/// a positive real root (instability), when rc < 1 all of a1, a2, a3 > 0.
std::array<double, 3> short_char_coeffs(const Params& params, double s_tilde,
                                        double n_total);

/// Lyapunov function certifying global stability of the disease-free
/// equilibrium of the limiting model: zero at the equilibrium, positive
/// elsewhere, nonincreasing along trajectories. Requires x.S > 0
/// (DomainError).
double lyapunov_v0(const Params& params, const Vector6& x);

/// Lyapunov function certifying global stability of the endemic
/// equilibrium of the limiting model. Requires rc > 1
/// (NoEndemicEquilibrium) and positive S, E, I, A (DomainError).
double lyapunov_vstar(const Params& params, const Vector6& x);

}  // namespace seiaqr
