#include "seiaqr/final_size.hpp"

#include <cmath>
#include <cstdio>

#include "seiaqr/reproduction.hpp"

namespace seiaqr {

namespace {

// The final-size relation z = F(z) in fixed-point form. Because the
// reproduction number scales as s_tilde / N, the ratio rc / s_tilde is
// independent of the reported susceptible share, so the relation is built
// once from the factor-free reproduction number over N.
struct Relation {
  double s0 = 0;     ///< S(0)
  double e0 = 0;     ///< E(0)
  double n = 0;      ///< total head count
  double lam = 0;    ///< rc / N
  double extra = 0;  ///< seed terms from I(0) and A(0)

  double map(double z) const {
    return s0 * (1.0 - std::exp(-((z + e0) * lam + extra)));
  }
};

Relation build_relation(const Params& params, const Vector6& x0,
                        double s_tilde) {
  params.validate();
  if (params.mode != Mode::Short)
    raise(ErrorCode::InvalidParameter,
          "the final-size relation applies to the closed-population (short) "
          "model; a replenished population has no final size");
  for (int i = 0; i < 6; ++i)
    if (!std::isfinite(x0[i]))
      raise(ErrorCode::NonFiniteInput,
            "initial state component " + std::to_string(i) + " is not finite");

  Relation rel;
  rel.s0 = x0[0];
  rel.e0 = x0[1];
  rel.n = x0[0] + x0[1] + x0[2] + x0[3] + x0[4] + x0[5];
  if (!(rel.n > 0.0))
    raise(ErrorCode::ZeroPopulation, "the population head count must be positive");
  if (s_tilde > rel.n) {
    char buf[140];
    std::snprintf(buf, sizeof buf,
                  "susceptible share s_tilde = %.6g exceeds the population "
                  "%.6g",
                  s_tilde, rel.n);
    raise(ErrorCode::InvalidFraction, buf);
  }

  const double k1 = params.q1 + params.r1;
  const double k2 = params.q2 + params.r2;
  rel.lam = rc(params, ModelKind::ShortTerm) / rel.n;
  rel.extra = params.beta * x0[2] / (rel.n * k1) +
              params.beta * params.b * x0[3] / (rel.n * k2);
  return rel;
}

FinalSizeResult assemble(const Relation& rel, const Vector6& x0, double z,
                         int iterations) {
  FinalSizeResult res;
  res.z = z;
  res.s_infinity = x0[0] - z;
  res.fraction = z / rel.n;
  res.total_ever_infected = z + x0[1] + x0[2] + x0[3] + x0[4];
  res.iterations = iterations;
  res.residual = z - rel.map(z);
  return res;
}

}  // namespace

double final_size_residual(const Params& params, const Vector6& x0,
                           double s_tilde, double z) {
  const Relation rel = build_relation(params, x0, s_tilde);
  if (!(z >= 0.0) || z > rel.s0)
    raise(ErrorCode::DomainError,
          "the susceptible depletion z must lie in [0, S(0)]");
  return z - rel.map(z);
}

FinalSizeResult solve_final_size(const Params& params, const Vector6& x0,
                                 double s_tilde) {
  const Relation rel = build_relation(params, x0, s_tilde);
  const double tol = 1e-9 * std::max(1.0, rel.s0);
  constexpr int kCap = 10000;

  // The map is increasing in z and bounded by S(0), so sweeping down from
  // z = S(0) walks monotonically onto the largest root.
  double z = rel.s0;
  int it = 0;
  bool monotone = true;
  while (it < kCap) {
    ++it;
    const double zn = rel.map(z);
    if (std::abs(zn - z) < tol) return assemble(rel, x0, zn, it);
    if (zn > z) {
      monotone = false;
      break;
    }
    z = zn;
  }

  // Fallback for a misbehaving sweep: bisect the residual over [0, S(0)].
  double lo = 0.0, hi = monotone ? rel.s0 : z;
  while (it < kCap) {
    ++it;
    const double mid = 0.5 * (lo + hi);
    ((mid - rel.map(mid)) < 0.0 ? lo : hi) = mid;
    if (hi - lo < tol) return assemble(rel, x0, 0.5 * (lo + hi), it);
  }

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "final-size iteration did not converge within %d steps; the "
                "root is bracketed in [%.9g, %.9g]",
                kCap, lo, hi);
  raise(ErrorCode::NoConvergence, buf);
}

}  // namespace seiaqr
