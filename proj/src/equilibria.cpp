#include "seiaqr/equilibria.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "seiaqr/reproduction.hpp"

namespace seiaqr {

namespace {

void require_kind(const Params& p, ModelKind kind) {
  const bool demographic =
      kind == ModelKind::LongTerm || kind == ModelKind::Limiting;
  if (demographic != (p.mode == Mode::Long))
    raise(ErrorCode::InvalidParameter,
          "model kind " + to_string(kind) + " does not match " +
              to_string(p.mode) + "-mode parameters");
}

void require_long_mode(const Params& p, const char* what) {
  p.validate();
  if (p.mode != Mode::Long)
    raise(ErrorCode::InvalidParameter,
          std::string(what) + " needs the demographic (long-mode) model");
}

/// Volterra distance ref * g(u) with g(u) = u - log(1 + u) and
/// u = (x - ref)/ref. Within a factor of two of the reference, x - ref is
/// exact and log1p keeps full precision; far below it, forming u first
/// would round to exactly -1 (log1p then overflows to -inf for states that
/// are tiny but positive), so the logs are taken separately instead.
double volterra(double x, double ref) {
  const double u = (x - ref) / ref;
  if (std::abs(u) <= 0.5) return ref * (u - std::log1p(u));
  return (x - ref) - ref * (std::log(x) - std::log(ref));
}

/// Supercritical reproduction number, or a throw: the equilibrium theory
/// below threshold has no positive branch to return.
double supercritical_rc(const Params& p) {
  const double r = rc(p, ModelKind::LongTerm);
  if (r <= 1 + 1e-12)
    raise(ErrorCode::NoEndemicEquilibrium,
          "no endemic equilibrium: the control reproduction number " +
              std::to_string(r) + " is not above 1");
  return r;
}

}  // namespace

State disease_free_long(const Params& p) {
  require_long_mode(p, "the disease-free equilibrium");
  State v;
  v.S = p.s0();
  return v;
}

State endemic_long(const Params& p) {
  require_long_mode(p, "the endemic equilibrium");
  const double r = supercritical_rc(p);
  const double s0 = p.s0();

  State v;
  v.S = s0 / r;
  v.E = (p.lambda - p.d * v.S) / (p.c + p.d);
  v.I = p.p * p.c * v.E / p.B1();
  v.A = (1 - p.p) * p.c * v.E / p.B2();
  v.Q = (p.q1 * v.I + p.q2 * v.A) / (p.r3 + p.d);
  v.R = (p.r1 * v.I + p.r2 * v.A + p.r3 * v.Q) / p.d;
  return v;
}

PersistenceBounds persistence_bounds(const Params& p, double theta) {
  require_long_mode(p, "a persistence bound");
  if (!(theta > 0 && theta < 1))
    raise(ErrorCode::InvalidTheta,
          "persistence fraction theta must lie strictly inside (0, 1), got " +
              std::to_string(theta));
  const double r = supercritical_rc(p);
  const State v = endemic_long(p);
  const double s0 = p.s0();

  PersistenceBounds b;
  b.theta = theta;
  b.s_star = s0 / r;
  b.s_bar =
      p.lambda /
      (theta * p.beta * (p.a * v.E + v.I + p.b * v.A) / s0 + p.d);
  b.s_breve = (p.lambda - theta * (p.c + p.d) * v.E) / p.d;
  return b;
}

Matrix6 jacobian(const Params& p, ModelKind kind, const Vector6& x) {
  p.validate();
  require_kind(p, kind);
  const double scale =
      (kind == ModelKind::ShortTerm) ? total_population(x) : p.s0();
  Matrix6 J;
  for (int j = 0; j < 6; ++j) {
    const double h = std::max(1e-6 * std::abs(x[j]), 1e-9 * scale);
    Vector6 hi = x, lo = x;
    hi[j] += h;
    lo[j] -= h;
    J.col(j) = (rhs(kind, p, hi) - rhs(kind, p, lo)) / (2 * h);
  }
  return J;
}

std::string to_string(StabilityClass cls) {
  switch (cls) {
    case StabilityClass::LocallyAsymptoticallyStable:
      return "locally_asymptotically_stable";
    case StabilityClass::Unstable:
      return "unstable";
    case StabilityClass::Marginal:
      return "marginal";
  }
  raise(ErrorCode::DomainError, "stability class out of range");
}

EquilibriumReport classify_stability(const Params& p, ModelKind kind,
                                     const Vector6& x) {
  p.validate();
  require_kind(p, kind);
  const double residual = rhs(kind, p, x).cwiseAbs().maxCoeff();
  if (residual > 1e-6 * std::max(p.lambda, 1.0))
    raise(ErrorCode::NotAnEquilibrium,
          "the state is not an equilibrium: max flow " +
              std::to_string(residual) + " persons/day");

  EquilibriumReport rep;
  rep.point = x;

  const Eigen::EigenSolver<Matrix6> solver(jacobian(p, kind, x));
  rep.eigenvalues = solver.eigenvalues();
  std::sort(rep.eigenvalues.data(), rep.eigenvalues.data() + 6,
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (a.real() != b.real()) return a.real() > b.real();
              return a.imag() > b.imag();
            });
  rep.max_real_part = rep.eigenvalues[0].real();

  constexpr double tol = 1e-7;
  if (rep.max_real_part > tol)
    rep.classification = StabilityClass::Unstable;
  else if (rep.max_real_part < -tol)
    rep.classification = StabilityClass::LocallyAsymptoticallyStable;
  else
    rep.classification = StabilityClass::Marginal;
  return rep;
}

std::array<double, 3> short_char_coeffs(const Params& p, double s_tilde,
                                        double n_total) {
  p.validate();
  if (p.mode != Mode::Short)
    raise(ErrorCode::InvalidParameter,
          "the cubic factor belongs to the closed-population model");
  if (n_total <= 0)
    raise(ErrorCode::InvalidFraction, "total population must be positive");
  if (s_tilde < 0 || s_tilde > n_total)
    raise(ErrorCode::InvalidFraction,
          "susceptible pool must lie within [0, total population]");

  const double k1 = p.q1 + p.r1;
  const double k2 = p.q2 + p.r2;
  const double phi = p.beta * s_tilde / n_total;
  const double a1 = p.c + k1 + k2 - phi * p.a;
  const double a2 = k1 * k2 + (p.c - phi * p.a) * (k1 + k2) -
                    phi * p.c * (p.p + p.b * (1 - p.p));
  const double a3 =
      k1 * k2 * p.c * (1 - rc(p, ModelKind::ShortTerm, s_tilde, n_total));
  return {a1, a2, a3};
}

double lyapunov_v0(const Params& p, const Vector6& x) {
  require_long_mode(p, "the extinction certificate");
  if (x[0] <= 0)
    raise(ErrorCode::DomainError,
          "the extinction certificate needs a positive susceptible pool");
  return volterra(x[0], p.s0()) + x[1] + (p.beta / p.B1()) * x[2] +
         (p.beta * p.b / p.B2()) * x[3];
}

double lyapunov_vstar(const Params& p, const Vector6& x) {
  require_long_mode(p, "the endemic certificate");
  const State v = endemic_long(p);  // throws below threshold
  for (int i = 0; i < 4; ++i)
    if (x[i] <= 0)
      raise(ErrorCode::DomainError,
            "the endemic certificate needs positive S, E, I and A");

  const double w3 = p.beta * v.S / (p.s0() * p.B1());
  const double w4 = p.beta * p.b * v.S / (p.s0() * p.B2());
  return volterra(x[0], v.S) + volterra(x[1], v.E) + w3 * volterra(x[2], v.I) +
         w4 * volterra(x[3], v.A);
}

}  // namespace seiaqr
