#include "seiaqr/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace seiaqr {

namespace {

// State augmented with the running integrals of the two incidence streams:
// y = (S, E, I, A, Q, R, int p*c*E, int (1-p)*c*E).
using Vector8 = Eigen::Matrix<double, 8, 1>;

Vector8 augmented_rhs(ModelKind kind, const Params& p, const Vector8& y) {
  Vector8 dy;
  dy.head<6>() = rhs(kind, p, y.head<6>());
  dy[6] = (p.p * p.c) * y[1];
  dy[7] = ((1.0 - p.p) * p.c) * y[1];
  return dy;
}

void require_matching_kind(ModelKind kind, const Params& params) {
  const bool wants_closed = (kind == ModelKind::ShortTerm);
  const bool is_closed = (params.mode == Mode::Short);
  if (wants_closed != is_closed)
    raise(ErrorCode::InvalidParameter,
          "model kind " + to_string(kind) +
              " does not match the parameter mode (" + to_string(params.mode) +
              ")");
}

void screen_options(const IntegrationOptions& o) {
  if (!std::isfinite(o.t0) || !std::isfinite(o.t_end) ||
      !std::isfinite(o.output_stride) || !std::isfinite(o.step) ||
      !std::isfinite(o.rel_tol) || !std::isfinite(o.abs_tol))
    raise(ErrorCode::InvalidParameter, "integration options must be finite");
  if (!(o.t_end > o.t0))
    raise(ErrorCode::InvalidParameter, "t_end must be greater than t0");
  if (!(o.output_stride > 0.0))
    raise(ErrorCode::InvalidParameter, "output_stride must be positive");
  if (!(o.step > 0.0))
    raise(ErrorCode::InvalidParameter, "step must be positive");
  if (o.method == Method::AdaptiveRK && (!(o.rel_tol > 0.0) || !(o.abs_tol > 0.0)))
    raise(ErrorCode::InvalidParameter,
          "adaptive error tolerances must be positive");
}

// The continuous dynamics preserve nonnegativity, so a sampled component
// can only graze zero through integration error. Forgive up to 1e-9
// persons of undershoot; anything worse means the step size cannot
// resolve these dynamics.
void enforce_nonnegative(Vector8& y, double t) {
  for (int i = 0; i < 8; ++i) {
    if (!std::isfinite(y[i]))
      raise(ErrorCode::NegativeStateBlowup,
            "solution diverged to a non-finite value near t = " +
                std::to_string(t) + "; reduce the step size");
    if (y[i] < -1e-9) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "state component %d reached %.3e persons at t = %.6g; "
                    "the step size is too large for these dynamics",
                    i, y[i], t);
      raise(ErrorCode::NegativeStateBlowup, buf);
    }
    if (y[i] < 0.0) y[i] = 0.0;
  }
}

Vector8 screened_initial(const Vector6& x0) {
  for (int i = 0; i < 6; ++i)
    if (!std::isfinite(x0[i]))
      raise(ErrorCode::NonFiniteInput,
            "initial state component " + std::to_string(i) + " is not finite");
  Vector8 y = Vector8::Zero();
  y.head<6>() = x0;
  for (int i = 0; i < 6; ++i) {
    if (y[i] < -1e-9) {
      char buf[120];
      std::snprintf(buf, sizeof buf,
                    "initial state component %d is %.3e persons; counts "
                    "cannot be negative",
                    i, y[i]);
      raise(ErrorCode::NegativeStateBlowup, buf);
    }
    if (y[i] < 0.0) y[i] = 0.0;
  }
  return y;
}

// Sample times after t0: every stride up to t_end, plus a partial final
// stride when the horizon is not a whole number of strides.
std::vector<double> output_times(const IntegrationOptions& o) {
  const double span = o.t_end - o.t0;
  const long long whole =
      static_cast<long long>(std::floor(span / o.output_stride + 1e-9));
  std::vector<double> outs;
  outs.reserve(static_cast<std::size_t>(whole) + 1);
  for (long long k = 1; k <= whole; ++k)
    outs.push_back(o.t0 + o.output_stride * static_cast<double>(k));
  if (outs.empty() ||
      std::abs(outs.back() - o.t_end) > 1e-12 * std::max(1.0, std::abs(o.t_end)))
    outs.push_back(o.t_end);
  else
    outs.back() = o.t_end;  // land exactly on the requested horizon
  return outs;
}

// Classic fourth-order step, with the base step rounded so a whole number
// of equal steps spans [t_from, t_to].
void rk4_advance(ModelKind kind, const Params& p, Vector8& y, double t_from,
                 double t_to, double base_step) {
  const double span = t_to - t_from;
  const long long n = std::max<long long>(1, std::llround(span / base_step));
  const double h = span / static_cast<double>(n);
  for (long long s = 0; s < n; ++s) {
    const Vector8 k1 = augmented_rhs(kind, p, y);
    const Vector8 k2 = augmented_rhs(kind, p, y + (0.5 * h) * k1);
    const Vector8 k3 = augmented_rhs(kind, p, y + (0.5 * h) * k2);
    const Vector8 k4 = augmented_rhs(kind, p, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    enforce_nonnegative(y, t_from + h * static_cast<double>(s + 1));
  }
}

// Dormand–Prince 5(4) tableau.
constexpr std::array<std::array<double, 6>, 7> kStage = {{
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
     11.0 / 84.0},
}};
constexpr std::array<double, 7> kOrder5 = {
    35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
    11.0 / 84.0,  0.0};
constexpr std::array<double, 7> kOrder4 = {
    5179.0 / 57600.0,     0.0,           7571.0 / 16695.0, 393.0 / 640.0,
    -92097.0 / 339200.0,  187.0 / 2100.0, 1.0 / 40.0};

// Error-controlled advance; h carries the step size across calls.
void adaptive_advance(ModelKind kind, const Params& p, Vector8& y,
                      double t_from, double t_to, double& h, double rel_tol,
                      double abs_tol) {
  double t = t_from;
  while (t < t_to - 1e-13 * std::max(1.0, std::abs(t_to))) {
    const double hh = std::min(h, t_to - t);
    std::array<Vector8, 7> ks;
    for (int i = 0; i < 7; ++i) {
      Vector8 yi = y;
      for (int j = 0; j < i; ++j)
        if (kStage[i][j] != 0.0) yi += (hh * kStage[i][j]) * ks[j];
      ks[i] = augmented_rhs(kind, p, yi);
    }
    Vector8 acc5 = kOrder5[0] * ks[0];
    Vector8 acc4 = kOrder4[0] * ks[0];
    for (int j = 1; j < 7; ++j) {
      if (kOrder5[j] != 0.0) acc5 += kOrder5[j] * ks[j];
      if (kOrder4[j] != 0.0) acc4 += kOrder4[j] * ks[j];
    }
    const Vector8 y5 = y + hh * acc5;
    const Vector8 y4 = y + hh * acc4;

    double err = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double scale =
          abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(y5[i] - y4[i]) / scale);
    }
    if (err <= 1.0) {
      t += hh;
      y = y5;
      enforce_nonnegative(y, t);
    }
    double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    factor = std::clamp(factor, 0.2, 5.0);
    h = hh * factor;
    if (h < 1e-12)
      raise(ErrorCode::StepSizeUnderflow,
            "error control drove the step below 1e-12 days near t = " +
                std::to_string(t));
  }
}

}  // namespace

Trajectory integrate(ModelKind kind, const Params& params, const Vector6& x0,
                     const IntegrationOptions& opts) {
  params.validate();
  require_matching_kind(kind, params);
  screen_options(opts);

  Vector8 y = screened_initial(x0);

  Trajectory out;
  out.params = params;
  out.kind = kind;
  auto record = [&](double t) {
    out.times.push_back(t);
    out.states.push_back(y.head<6>());
    out.cum_symptomatic.push_back(y[6]);
    out.cum_asymptomatic.push_back(y[7]);
  };
  record(opts.t0);

  double t = opts.t0;
  double h = opts.step;
  for (double t_next : output_times(opts)) {
    if (opts.method == Method::RK4Fixed)
      rk4_advance(kind, params, y, t, t_next, opts.step);
    else
      adaptive_advance(kind, params, y, t, t_next, h, opts.rel_tol,
                       opts.abs_tol);
    t = t_next;
    record(t_next);
  }
  return out;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = "t,S,E,I,A,Q,R,cum_sym,cum_asym\n";
  char buf[64];
  auto append = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out += buf;
    out += sep;
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    append(traj.times[k], ',');
    for (int i = 0; i < 6; ++i) append(traj.states[k][i], ',');
    append(traj.cum_symptomatic[k], ',');
    append(traj.cum_asymptomatic[k], '\n');
  }
  return out;
}

PeakInfo peak(const Trajectory& traj, Compartment compartment) {
  if (traj.size() == 0)
    raise(ErrorCode::DomainError, "cannot take the peak of an empty trajectory");
  const int ci = static_cast<int>(compartment);
  if (ci < 1 || ci > 4)
    raise(ErrorCode::UnknownCompartment,
          "peaks are defined for the infected classes E, I, A, Q; got " +
              to_string(compartment));
  PeakInfo best{traj.times[0], traj.states[0][ci], 0};
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (traj.states[k][ci] > best.value) {
      best.time = traj.times[k];
      best.value = traj.states[k][ci];
      best.index = k;
    }
  }
  return best;
}

double steady_state_distance(const Trajectory& traj, const Vector6& target) {
  const std::size_t n = traj.size();
  if (n == 0)
    raise(ErrorCode::DomainError,
          "cannot measure the steady-state distance of an empty trajectory");
  const std::size_t window = std::max<std::size_t>(1, n / 10);
  const double scale = std::max(1.0, target.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (std::size_t k = n - window; k < n; ++k)
    worst = std::max(worst,
                     (traj.states[k] - target).cwiseAbs().maxCoeff() / scale);
  return worst;
}

std::string to_string(ObservationModel model) {
  switch (model) {
    case ObservationModel::AllIncidence:
      return "all_incidence";
    case ObservationModel::SymptomaticIncidence:
      return "symptomatic_incidence";
    case ObservationModel::Detections:
      return "detections";
  }
  raise(ErrorCode::UnknownParameter, "unhandled observation model");
}

ObservationModel observation_from_name(const std::string& name) {
  if (name == "all_incidence") return ObservationModel::AllIncidence;
  if (name == "symptomatic_incidence")
    return ObservationModel::SymptomaticIncidence;
  if (name == "detections") return ObservationModel::Detections;
  raise(ErrorCode::ParseError,
        "unknown observation model '" + name +
            "'; expected all_incidence, symptomatic_incidence, or detections");
}

ObservationModel default_observation(Mode mode) {
  return mode == Mode::Long ? ObservationModel::SymptomaticIncidence
                            : ObservationModel::AllIncidence;
}

std::vector<double> observed_series(const Trajectory& traj,
                                    ObservationModel model) {
  if (traj.size() == 0) return {};
  if (std::abs(traj.times.front()) > 1e-12)
    raise(ErrorCode::ConsistencyError,
          "observation series require a trajectory starting at t = 0; got t0 = " +
              std::to_string(traj.times.front()));
  if (traj.size() == 1) return {};

  const double stride = traj.times[1] - traj.times[0];
  const long long per_day = std::llround(1.0 / stride);
  if (per_day < 1 || std::abs(static_cast<double>(per_day) * stride - 1.0) > 1e-9)
    raise(ErrorCode::ConsistencyError,
          "the output stride must divide one whole day to form daily counts; "
          "got " + std::to_string(stride));

  const std::size_t m = static_cast<std::size_t>(per_day);
  const std::size_t days = (traj.size() - 1) / m;
  const Params& p = traj.params;
  auto rate = [&](const Vector6& s) {
    switch (model) {
      case ObservationModel::AllIncidence:
        return p.c * s[1];
      case ObservationModel::SymptomaticIncidence:
        return (p.p * p.c) * s[1];
      case ObservationModel::Detections:
        return p.q1 * s[2] + p.q2 * s[3];
    }
    return 0.0;
  };

  std::vector<double> series(days, 0.0);
  for (std::size_t day = 0; day < days; ++day) {
    double sum = 0.0;
    const std::size_t base = day * m;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = base + j;
      sum += 0.5 * (rate(traj.states[i]) + rate(traj.states[i + 1])) *
             (traj.times[i + 1] - traj.times[i]);
    }
    series[day] = sum;
  }
  return series;
}

}  // namespace seiaqr
