#pragma once

#include "seiaqr/model.hpp"
#include "seiaqr/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace seiaqr {

enum class Method { RK4Fixed, AdaptiveRK };

struct IntegrationOptions {
  Method method = Method::RK4Fixed;
  double step = 0.05;        ///< RK4Fixed base step, days; rounded so a
                             ///< whole number of steps spans each stride
  double rel_tol = 1e-8;     ///< AdaptiveRK
  double abs_tol = 1e-10;    ///< AdaptiveRK
  double t0 = 0;
  double t_end = 0;          ///< must be > t0
  double output_stride = 1;  ///< output spacing, days, > 0
};

/// Sampled solution. states[k] is at times[k]; cum_symptomatic and
/// cum_asymptomatic are the running integrals of p*c*E and (1-p)*c*E from
/// t0, integrated alongside the state. The params and kind used are kept
/// so derived series stay self-contained.
struct Trajectory {
  Params params;
  ModelKind kind = ModelKind::LongTerm;
  std::vector<double> times;
  std::vector<Vector6> states;
  std::vector<double> cum_symptomatic;
  std::vector<double> cum_asymptomatic;

  std::size_t size() const { return times.size(); }
};

/// Integrate rhs(kind, params, .) from x0 over [t0, t_end], sampling every
/// output_stride (the final time is always included). The dynamics
/// preserve nonnegativity, so components may only graze zero numerically:
/// values in [-1e-9, 0) persons are clamped to 0, and anything more
/// negative is a NegativeStateBlowup (signals a step-size problem, not
/// physics). The adaptive method raises StepSizeUnderflow if the error
/// control forces the step below machine resolution.
Trajectory integrate(ModelKind kind, const Params& params, const Vector6& x0,
                     const IntegrationOptions& opts);

/// CSV export: header t,S,E,I,A,Q,R,cum_sym,cum_asym, one row per sample,
/// values at 10 significant digits.
std::string trajectory_to_csv(const Trajectory& traj);

struct PeakInfo {
  double time = 0;   ///< first sample time achieving the maximum
  double value = 0;  ///< the maximum
  std::size_t index = 0;
};

/// Maximum of one compartment over the samples; the earliest sample wins
/// ties. Compartment must be one of E, I, A, Q (UnknownCompartment
/// otherwise). Day-count reporting floors `time` to whole days.
PeakInfo peak(const Trajectory& traj, Compartment compartment);

/// max over the last 10% of samples (at least one) of
/// ||state - target||_inf / max(1, ||target||_inf).
double steady_state_distance(const Trajectory& traj, const Vector6& target);

enum class ObservationModel {
  AllIncidence,          ///< c * E: everyone leaving the exposed class
  SymptomaticIncidence,  ///< p * c * E
  Detections,            ///< q1 * I + q2 * A
};

std::string to_string(ObservationModel model);
ObservationModel observation_from_name(const std::string& name);

/// Convention: long-term data streams count symptomatic confirmations;
/// short-term outbreak screening counts everyone.
ObservationModel default_observation(Mode mode);

/// Daily counts: the trapezoid-rule integral of the observation rate over
/// each whole day [k, k+1) covered by the trajectory, using the
/// trajectory's own parameters. Requires t0 = 0 and an output stride that
/// divides one day exactly (ConsistencyError otherwise).
std::vector<double> observed_series(const Trajectory& traj,
                                    ObservationModel model);

}  // namespace seiaqr
