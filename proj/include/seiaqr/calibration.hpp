#pragma once

#include "seiaqr/integrate.hpp"
#include "seiaqr/model.hpp"
#include "seiaqr/types.hpp"

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace seiaqr {

/// Dated daily new-case counts. Dates are strictly increasing and
/// contiguous; counts are nonnegative; when a cumulative column is present
/// its first differences must equal daily_new.
struct ObservedSeries {
  std::vector<std::chrono::year_month_day> dates;
  std::vector<double> daily_new;
  std::vector<double> cumulative;  ///< empty, or same length as daily_new

  std::size_t size() const { return daily_new.size(); }
};

/// Parse CSV with header "date,daily_new[,cumulative]" and ISO yyyy-mm-dd
/// dates. Malformed rows are ParseError, a skipped date is GapError (the
/// message names the missing date), a cumulative column that disagrees
/// with the daily counts is ConsistencyError.
ObservedSeries parse_series_csv(const std::string& text);
ObservedSeries load_series(const std::string& path);

/// One box-constrained free quantity: either a rate-constant name
/// (lambda, d, beta, a, b, c, p, q1, q2, r1, r2, r3) or an
/// initial-condition name (S0, E0, I0, A0, Q0, R0).
struct FreeQuantity {
  std::string name;
  double lower = 0;
  double upper = 0;
};

struct FitConfig {
  Params base;                   ///< fixed rate values; also fixes the mode
  Vector6 x0 = Vector6::Zero();  ///< fixed initial conditions
  std::vector<FreeQuantity> free_params;
  std::vector<FreeQuantity> free_initials;
  ObservationModel observation = ObservationModel::SymptomaticIncidence;
  bool loss_on_cumulative = false;  ///< compare running totals instead
  long max_evaluations = 20000;
  int restarts = 3;
  std::uint64_t seed = 0;

  /// Bounds finite with lower < upper, names not repeated, probability
  /// bounds within [0,1], budget and restarts positive; throws
  /// InvalidParameter, or UnknownParameter for an unrecognized name.
  void validate() const;
};

/// Fit config as a JSON document: {"params": {... params-file schema,
/// "initial" required ...}, "free_params": [{"name","lower","upper"}...],
/// "free_initials": [...], "observation": "all_incidence" |
/// "symptomatic_incidence" | "detections", "loss_on_cumulative": bool,
/// "max_evaluations": n, "restarts": n, "seed": n} — all but "params"
/// optional.
FitConfig parse_fit_config_json(const std::string& text);
FitConfig load_fit_config(const std::string& path);

/// Sum over days of squared (simulated observation − observed count); the
/// simulation horizon is the series length. Integration failures surface
/// as +infinity, never as exceptions.
double residual_loss(const Params& params, const Vector6& x0,
                     const ObservedSeries& obs, const FitConfig& cfg);

struct FitResult {
  Params params;
  Vector6 x0 = Vector6::Zero();
  double loss = 0;
  long evaluations = 0;
  bool converged = false;  ///< false when the evaluation budget ran out
  std::vector<double> restart_losses;  ///< best loss per restart, in order
};

/// Nelder–Mead least squares over the free quantities, with jittered
/// restarts (restart 0 starts at the configured values). Positive-bounded
/// quantities are optimized in log scale; the box is enforced by a
/// quadratic exterior penalty. Deterministic for a fixed cfg.seed. An
/// exhausted budget returns the best point so far with converged = false.
FitResult fit(const FitConfig& cfg, const ObservedSeries& obs);

/// JSON fit report: fitted values, loss, evaluation count, convergence
/// flag, and per-restart losses.
std::string fit_report_json(const FitConfig& cfg, const FitResult& result);

}  // namespace seiaqr
