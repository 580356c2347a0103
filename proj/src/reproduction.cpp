#include "seiaqr/reproduction.hpp"

#include <algorithm>
#include <cmath>

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

double susceptible_factor(ModelKind kind, double s_tilde, double n_total) {
  if (kind != ModelKind::ShortTerm || (s_tilde < 0 && n_total < 0)) return 1.0;
  if (n_total <= 0)
    raise(ErrorCode::InvalidFraction,
          "a susceptible share needs a positive total population");
  if (s_tilde < 0 || s_tilde > n_total)
    raise(ErrorCode::InvalidFraction,
          "susceptible pool must lie within [0, total population]");
  return s_tilde / n_total;
}

/// The three additive transmission routes of the reproduction number:
/// exposed-phase, symptomatic and asymptomatic contributions.
struct Routes {
  double from_exposed = 0;
  double from_symptomatic = 0;
  double from_asymptomatic = 0;
  double exit_symptomatic = 0;   ///< B1 (long) or q1 + r1 (short)
  double exit_asymptomatic = 0;  ///< B2 (long) or q2 + r2 (short)

  double sum() const {
    return from_exposed + from_symptomatic + from_asymptomatic;
  }
};

Routes routes(const Params& p, ModelKind kind) {
  Routes r;
  if (kind == ModelKind::ShortTerm) {
    r.exit_symptomatic = p.q1 + p.r1;
    r.exit_asymptomatic = p.q2 + p.r2;
    r.from_exposed = p.beta * p.a / p.c;
    r.from_symptomatic = p.beta * p.p / r.exit_symptomatic;
    r.from_asymptomatic = p.beta * p.b * (1 - p.p) / r.exit_asymptomatic;
  } else {
    const double k = p.c + p.d;
    r.exit_symptomatic = p.B1();
    r.exit_asymptomatic = p.B2();
    r.from_exposed = p.beta * p.a / k;
    r.from_symptomatic = p.beta * p.p * p.c / (k * r.exit_symptomatic);
    r.from_asymptomatic =
        p.beta * p.b * (1 - p.p) * p.c / (k * r.exit_asymptomatic);
  }
  return r;
}

}  // namespace

double rc(const Params& p, ModelKind kind, double s_tilde, double n_total) {
  p.validate();
  require_kind(p, kind);
  return susceptible_factor(kind, s_tilde, n_total) * routes(p, kind).sum();
}

std::map<std::string, double> rc_gradient(const Params& p, ModelKind kind,
                                          double s_tilde, double n_total) {
  p.validate();
  require_kind(p, kind);
  const double factor = susceptible_factor(kind, s_tilde, n_total);
  const Routes r = routes(p, kind);

  // The exposed-phase scaling c/(c+d) collapses to 1 in the closed model.
  const double phase =
      (kind == ModelKind::ShortTerm) ? 1.0 : p.c / (p.c + p.d);
  std::map<std::string, double> g;
  g["b"] = factor * p.beta * (1 - p.p) * phase / r.exit_asymptomatic;
  g["1-p"] = factor * p.beta * phase *
             (p.b / r.exit_asymptomatic - 1.0 / r.exit_symptomatic);
  g["p"] = -g["1-p"];
  g["q1"] = -factor * r.from_symptomatic / r.exit_symptomatic;
  g["q2"] = -factor * r.from_asymptomatic / r.exit_asymptomatic;

  auto fd = [&](auto setter, double value) {
    const double h = std::max(1e-6 * std::abs(value), 1e-9);
    Params hi = p, lo = p;
    setter(hi, value + h);
    setter(lo, value - h);
    return (rc(hi, kind, s_tilde, n_total) - rc(lo, kind, s_tilde, n_total)) /
           (2 * h);
  };
  g["a"] = fd([](Params& q, double v) { q.a = v; }, p.a);
  g["beta"] = fd([](Params& q, double v) { q.beta = v; }, p.beta);
  g["r1"] = fd([](Params& q, double v) { q.r1 = v; }, p.r1);
  g["r2"] = fd([](Params& q, double v) { q.r2 = v; }, p.r2);
  return g;
}

std::vector<SensitivityEntry> sensitivity_indices(const Params& p,
                                                  ModelKind kind) {
  p.validate();
  require_kind(p, kind);
  const Routes r = routes(p, kind);
  const double total = r.sum();
  if (total == 0)
    raise(ErrorCode::DegenerateRc,
          "the reproduction number is zero, so elasticities are undefined");

  std::vector<SensitivityEntry> report;
  report.push_back({"a", r.from_exposed / total});
  report.push_back({"beta", 1.0});
  report.push_back({"b", r.from_asymptomatic / total});
  report.push_back(
      {"q1", -r.from_symptomatic * p.q1 / (r.exit_symptomatic * total)});
  report.push_back(
      {"q2", -r.from_asymptomatic * p.q2 / (r.exit_asymptomatic * total)});
  report.push_back(
      {"r1", -r.from_symptomatic * p.r1 / (r.exit_symptomatic * total)});
  report.push_back(
      {"r2", -r.from_asymptomatic * p.r2 / (r.exit_asymptomatic * total)});
  std::stable_sort(report.begin(), report.end(),
                   [](const SensitivityEntry& x, const SensitivityEntry& y) {
                     return std::abs(x.value) > std::abs(y.value);
                   });
  return report;
}

double critical_b(const Params& p, ModelKind kind) {
  p.validate();
  require_kind(p, kind);
  if (kind == ModelKind::ShortTerm) return (p.q2 + p.r2) / (p.q1 + p.r1);
  return p.B2() / p.B1();
}

}  // namespace seiaqr
