#include "seiaqr/integrate.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "seiaqr/equilibria.hpp"
#include "seiaqr/final_size.hpp"
#include "test_support.hpp"

using namespace seiaqr;
using testutil::india_params;
using testutil::india_x0;
using testutil::nanjing_params;
using testutil::nanjing_x0;
using testutil::rel_close;

namespace {

IntegrationOptions days(double t_end, double stride = 1.0) {
  IntegrationOptions o;
  o.t_end = t_end;
  o.output_stride = stride;
  return o;
}

// A trajectory assembled by hand, for exercising the pure accessors.
Trajectory synthetic(const std::vector<double>& times,
                     const std::vector<Vector6>& states) {
  Trajectory t;
  t.params = india_params();
  t.kind = ModelKind::LongTerm;
  t.times = times;
  t.states = states;
  t.cum_symptomatic.assign(times.size(), 0.0);
  t.cum_asymptomatic.assign(times.size(), 0.0);
  return t;
}

void check_trajectory_invariants(const Trajectory& t) {
  REQUIRE(t.size() >= 1);
  REQUIRE(t.states.size() == t.times.size());
  REQUIRE(t.cum_symptomatic.size() == t.times.size());
  REQUIRE(t.cum_asymptomatic.size() == t.times.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k > 0) {
      CHECK(t.times[k] > t.times[k - 1]);
      CHECK(t.cum_symptomatic[k] >= t.cum_symptomatic[k - 1]);
      CHECK(t.cum_asymptomatic[k] >= t.cum_asymptomatic[k - 1]);
    }
    CHECK(t.states[k].minCoeff() >= 0.0);
  }
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("an equilibrium initial state stays put") {
  const Params p = india_params();
  Vector6 v0 = Vector6::Zero();
  v0[0] = p.s0();
  const Trajectory t = integrate(ModelKind::Limiting, p, v0, days(50));
  REQUIRE(t.size() == 51);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(rel_close(t.states[k][0], p.s0(), 1e-12));
    for (int i = 1; i < 6; ++i) CHECK(t.states[k][i] == 0.0);
    CHECK(t.cum_symptomatic[k] == 0.0);
    CHECK(t.cum_asymptomatic[k] == 0.0);
  }
}

TEST_CASE("endemic-region benchmark at day 100") {
  const Trajectory t =
      integrate(ModelKind::LongTerm, india_params(), india_x0(), days(100));
  check_trajectory_invariants(t);
  REQUIRE(t.size() == 101);
  CHECK(t.times.front() == 0.0);
  CHECK(t.times.back() == 100.0);

  const Vector6& x = t.states.back();
  CHECK(rel_close(x[0], 1382745546.467407, 1e-7));
  CHECK(rel_close(x[1], 158065.4512688247, 1e-7));
  CHECK(rel_close(x[2], 88747.99314562343, 1e-7));
  CHECK(rel_close(x[3], 129685.77069413321, 1e-7));
  CHECK(rel_close(x[4], 102077.71182433999, 1e-7));
  CHECK(rel_close(x[5], 5909460.260933711, 1e-7));
  CHECK(rel_close(t.cum_symptomatic.back(), 4288626.080527533, 1e-6));
  CHECK(rel_close(t.cum_asymptomatic.back(), 1893622.8462816547, 1e-6));

  // Total population follows the closed-form demographic law.
  const Params p = india_params();
  const double n0 = india_x0().sum();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double expected =
        p.s0() + (n0 - p.s0()) * std::exp(-p.d * t.times[k]);
    CHECK(rel_close(t.states[k].sum(), expected, 1e-7));
  }
}

TEST_CASE("adaptive stepper reproduces the benchmark") {
  IntegrationOptions o = days(100);
  o.method = Method::AdaptiveRK;
  const Trajectory t =
      integrate(ModelKind::LongTerm, india_params(), india_x0(), o);
  REQUIRE(t.size() == 101);
  const Vector6& x = t.states.back();
  CHECK(rel_close(x[0], 1382745546.467407, 1e-6));
  CHECK(rel_close(x[1], 158065.4512688247, 1e-6));
  CHECK(rel_close(x[2], 88747.99314562343, 1e-6));
  CHECK(rel_close(x[3], 129685.77069413321, 1e-6));
  CHECK(rel_close(x[4], 102077.71182433999, 1e-6));
  CHECK(rel_close(x[5], 5909460.260933711, 1e-6));
  CHECK(rel_close(t.cum_symptomatic.back(), 4288626.080527533, 1e-6));
  CHECK(rel_close(t.cum_asymptomatic.back(), 1893622.8462816547, 1e-6));
}

TEST_CASE("outbreak extinction benchmark") {
  const Trajectory t =
      integrate(ModelKind::ShortTerm, nanjing_params(), nanjing_x0(), days(40));
  check_trajectory_invariants(t);
  const Vector6& x = t.states.back();
  CHECK(rel_close(x[0], 9314398.76966907, 1e-7));
  CHECK(rel_close(x[1], 0.007777431755901181, 1e-7));
  CHECK(rel_close(x[2], 0.030988388497557525, 1e-7));
  CHECK(rel_close(x[3], 0.004463735618347974, 1e-7));
  CHECK(rel_close(x[4], 3.748675899406151, 1e-7));
  CHECK(rel_close(x[5], 263.67382547684605, 1e-7));
  CHECK(rel_close(t.cum_symptomatic.back(), 9.70025297602026, 1e-7));
  CHECK(rel_close(t.cum_asymptomatic.back(), 1.4469005243477753, 1e-7));

  // The free infectious classes are gone by day 40; the quarantine pool
  // empties about three weeks later.
  CHECK(x[1] < 1.0);
  CHECK(x[2] < 1.0);
  CHECK(x[3] < 1.0);
  CHECK(x[4] > 1.0);

  const Trajectory t60 =
      integrate(ModelKind::ShortTerm, nanjing_params(), nanjing_x0(), days(60));
  CHECK(rel_close(t60.states.back()[4], 0.5110757093163052, 1e-8));
  CHECK(t60.states.back()[4] < 1.0);

  // Closed population: the head count never moves.
  const double n0 = t60.states.front().sum();
  for (const Vector6& s : t60.states)
    CHECK(std::abs(s.sum() - n0) < 1e-9 * n0);
}

TEST_CASE("output grid includes a partial final stride") {
  const Trajectory t = integrate(ModelKind::ShortTerm, nanjing_params(),
                                 nanjing_x0(), days(10.5));
  REQUIRE(t.size() == 12);
  for (int k = 0; k <= 10; ++k)
    CHECK(std::abs(t.times[k] - k) <= 1e-12);
  CHECK(t.times.back() == 10.5);
}

TEST_CASE("fixed stepper converges at fourth order") {
  IntegrationOptions ref_opts = days(40);
  ref_opts.method = Method::AdaptiveRK;
  ref_opts.rel_tol = 1e-12;
  ref_opts.abs_tol = 1e-12;
  const Trajectory ref =
      integrate(ModelKind::ShortTerm, nanjing_params(), nanjing_x0(), ref_opts);

  auto max_err = [&](double h) {
    IntegrationOptions o = days(40);
    o.step = h;
    const Trajectory t =
        integrate(ModelKind::ShortTerm, nanjing_params(), nanjing_x0(), o);
    REQUIRE(t.size() == ref.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
      worst = std::max(worst,
                       (t.states[k] - ref.states[k]).cwiseAbs().maxCoeff());
    return worst;
  };

  const double e_half = max_err(0.5);
  const double e_quarter = max_err(0.25);
  CHECK(e_half > 1e-9);  // above the reference noise floor
  CHECK(e_half / e_quarter >= 8.0);
}

TEST_CASE("an unstable step size is reported, not silently patched") {
  IntegrationOptions o = days(500, 5.0);
  o.step = 5.0;
  try {
    (void)integrate(ModelKind::LongTerm, india_params(), india_x0(), o);
    FAIL("the oscillating solution dives far below zero");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeStateBlowup);
  }
}

TEST_CASE("initial-state screening") {
  Vector6 x = india_x0();
  x[1] = -5.0;
  try {
    (void)integrate(ModelKind::LongTerm, india_params(), x, days(1));
    FAIL("a person-sized negative count is an input error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeStateBlowup);
  }

  x = india_x0();
  x[1] = -1e-15;  // rounding debris is forgiven
  const Trajectory t = integrate(ModelKind::LongTerm, india_params(), x, days(1));
  CHECK(t.states.front()[1] == 0.0);

  x = india_x0();
  x[2] = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)integrate(ModelKind::LongTerm, india_params(), x, days(1));
    FAIL("NaN must be rejected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteInput);
  }
}

TEST_CASE("model kind must agree with the parameter mode") {
  CHECK_THROWS_AS(
      (void)integrate(ModelKind::ShortTerm, india_params(), india_x0(), days(1)),
      Error);
  CHECK_THROWS_AS(
      (void)integrate(ModelKind::Limiting, nanjing_params(), nanjing_x0(), days(1)),
      Error);
  try {
    (void)integrate(ModelKind::LongTerm, nanjing_params(), nanjing_x0(), days(1));
    FAIL("demographic kinds need demographic parameters");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidParameter);
  }
}

TEST_CASE("option screening") {
  IntegrationOptions o = days(0.0);
  CHECK_THROWS_AS(
      (void)integrate(ModelKind::LongTerm, india_params(), india_x0(), o), Error);

  o = days(10, -1.0);
  CHECK_THROWS_AS(
      (void)integrate(ModelKind::LongTerm, india_params(), india_x0(), o), Error);

  o = days(10);
  o.step = 0.0;
  CHECK_THROWS_AS(
      (void)integrate(ModelKind::LongTerm, india_params(), india_x0(), o), Error);

  o = days(10);
  o.method = Method::AdaptiveRK;
  o.rel_tol = 0.0;
  try {
    (void)integrate(ModelKind::LongTerm, india_params(), india_x0(), o);
    FAIL("tolerances must be positive");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidParameter);
  }
}

TEST_CASE("peak selection rules") {
  std::vector<double> times{0, 1, 2, 3, 4};
  std::vector<Vector6> falling(5, Vector6::Zero());
  for (int k = 0; k < 5; ++k) falling[k][2] = 9.0 - 2.0 * k;
  const PeakInfo first = peak(synthetic(times, falling), Compartment::I);
  CHECK(first.time == 0.0);
  CHECK(first.value == 9.0);
  CHECK(first.index == 0);

  std::vector<Vector6> tied(5, Vector6::Zero());
  const double heights[5] = {5, 9, 9, 3, 1};
  for (int k = 0; k < 5; ++k) tied[k][2] = heights[k];
  const PeakInfo tie = peak(synthetic(times, tied), Compartment::I);
  CHECK(tie.time == 1.0);
  CHECK(tie.value == 9.0);

  try {
    (void)peak(synthetic(times, tied), Compartment::S);
    FAIL("only the infected classes have meaningful peaks");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownCompartment);
  }

  try {
    (void)peak(Trajectory{}, Compartment::I);
    FAIL("an empty trajectory has no peak");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainError);
  }
}

TEST_CASE("asymptomatic peak timing responds to the detection rate") {
  Params p = india_params();
  p.q2 = 0.223;
  const Trajectory t = integrate(ModelKind::LongTerm, p, india_x0(), days(800));
  const PeakInfo pk = peak(t, Compartment::A);
  const int day = static_cast<int>(std::floor(pk.time));
  CHECK(day >= 432);
  CHECK(day <= 436);
  CHECK(pk.value > 0);
}

TEST_CASE("the exposed class revisits a fraction of its equilibrium level") {
  const Trajectory t =
      integrate(ModelKind::LongTerm, india_params(), india_x0(), days(5000));
  const PeakInfo pk = peak(t, Compartment::E);
  CHECK(pk.value > 0.9 * 5353.741976977434);
  CHECK(rel_close(pk.value, 972439.1151509881, 1e-6));
  CHECK(pk.time >= 250.0);
  CHECK(pk.time <= 252.0);
}

TEST_CASE("steady-state distance measure") {
  Vector6 target;
  target << 50, 10, 5, 3, 2, 1;

  std::vector<double> times(20);
  std::vector<Vector6> states(20, target);
  for (int k = 0; k < 20; ++k) times[k] = k;
  CHECK(steady_state_distance(synthetic(times, states), target) == 0.0);

  states[18][0] += 3.0;  // inside the trailing 10% window
  states[19][0] += 1.0;
  CHECK(steady_state_distance(synthetic(times, states), target) ==
        doctest::Approx(0.06).epsilon(1e-12));

  // A zero target switches the scale to absolute persons.
  std::vector<Vector6> half(20, Vector6::Constant(0.5));
  CHECK(steady_state_distance(synthetic(times, half), Vector6::Zero()) == 0.5);
}

TEST_CASE("short run lands on the closed-form limit set") {
  const FinalSizeResult fs = solve_final_size(nanjing_params(), nanjing_x0());
  const double n = total_population(nanjing_x0());
  Vector6 limit = Vector6::Zero();
  limit[0] = fs.s_infinity;
  limit[5] = n - fs.s_infinity;
  const Trajectory t =
      integrate(ModelKind::ShortTerm, nanjing_params(), nanjing_x0(), days(300));
  CHECK(steady_state_distance(t, limit) < 1e-3);
}

TEST_CASE("daily observation series") {
  // No infections anywhere: every observation model reads zero.
  const Params p = india_params();
  Vector6 v0 = Vector6::Zero();
  v0[0] = p.s0();
  const Trajectory quiet =
      integrate(ModelKind::LongTerm, p, v0, days(5, 0.25));
  for (ObservationModel m :
       {ObservationModel::AllIncidence, ObservationModel::SymptomaticIncidence,
        ObservationModel::Detections}) {
    const std::vector<double> series = observed_series(quiet, m);
    REQUIRE(series.size() == 5);
    for (double v : series) CHECK(v == 0.0);
  }

  // Constant compartments make the daily integrals exact.
  std::vector<double> times;
  std::vector<Vector6> states;
  for (int k = 0; k <= 8; ++k) {
    times.push_back(0.25 * k);
    Vector6 s = Vector6::Zero();
    s[0] = 1e6;
    s[1] = 3.0;
    s[2] = 2.0;
    s[3] = 4.0;
    states.push_back(s);
  }
  const Trajectory flat = synthetic(times, states);
  const std::vector<double> sym =
      observed_series(flat, ObservationModel::SymptomaticIncidence);
  REQUIRE(sym.size() == 2);
  CHECK(rel_close(sym[0], p.p * p.c * 3.0, 1e-12));
  CHECK(rel_close(sym[1], p.p * p.c * 3.0, 1e-12));

  const std::vector<double> all =
      observed_series(flat, ObservationModel::AllIncidence);
  CHECK(rel_close(all[0], p.c * 3.0, 1e-12));

  const std::vector<double> det =
      observed_series(flat, ObservationModel::Detections);
  CHECK(rel_close(det[0], p.q1 * 2.0 + p.q2 * 4.0, 1e-12));
}

TEST_CASE("observation benchmark on the endemic scenario") {
  const Trajectory t =
      integrate(ModelKind::LongTerm, india_params(), india_x0(), days(5, 0.25));
  const std::vector<double> sym =
      observed_series(t, ObservationModel::SymptomaticIncidence);
  REQUIRE(sym.size() == 5);
  CHECK(rel_close(sym[0], 12992.217205314155, 1e-6));
  CHECK(rel_close(sym[1], 13714.397048509498, 1e-6));
  CHECK(rel_close(sym[2], 14027.30451863099, 1e-6));
  CHECK(rel_close(sym[3], 14285.9226899348, 1e-6));
  CHECK(rel_close(sym[4], 14554.855786167027, 1e-6));

  const std::vector<double> det =
      observed_series(t, ObservationModel::Detections);
  CHECK(rel_close(det[0], 16414.038286316343, 1e-6));

  // The default observation matches the explicit choice for each mode.
  CHECK(default_observation(Mode::Long) ==
        ObservationModel::SymptomaticIncidence);
  CHECK(default_observation(Mode::Short) == ObservationModel::AllIncidence);
  const std::vector<double> by_default =
      observed_series(t, default_observation(t.params.mode));
  CHECK(by_default == sym);
}

TEST_CASE("observation grid requirements") {
  const Trajectory bad_stride = integrate(ModelKind::ShortTerm, nanjing_params(),
                                          nanjing_x0(), days(3, 0.3));
  try {
    (void)observed_series(bad_stride, ObservationModel::AllIncidence);
    FAIL("0.3-day sampling cannot tile whole days");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConsistencyError);
  }

  Trajectory shifted = synthetic({0.5, 1.5, 2.5}, std::vector<Vector6>(3, Vector6::Zero()));
  try {
    (void)observed_series(shifted, ObservationModel::AllIncidence);
    FAIL("series must start at time zero");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConsistencyError);
  }

  // A trailing partial day is dropped.
  const Trajectory partial = integrate(ModelKind::ShortTerm, nanjing_params(),
                                       nanjing_x0(), days(10.5, 0.25));
  CHECK(observed_series(partial, ObservationModel::AllIncidence).size() == 10);
}

TEST_CASE("cumulative infections agree with the final-size identity") {
  IntegrationOptions o = days(200, 0.05);
  const Trajectory t =
      integrate(ModelKind::ShortTerm, nanjing_params(), nanjing_x0(), o);

  const FinalSizeResult fs = solve_final_size(nanjing_params(), nanjing_x0());
  const double expected = nanjing_x0()[1] + fs.z;  // E(0) + S(0) − S(∞)

  // Running integral accumulated inside the stepper.
  const double cum = t.cum_symptomatic.back() + t.cum_asymptomatic.back();
  CHECK(rel_close(cum, expected, 1e-6));

  // Daily trapezoid series summed over the whole epidemic.
  const std::vector<double> all =
      observed_series(t, ObservationModel::AllIncidence);
  double total = 0.0;
  for (double v : all) total += v;
  CHECK(rel_close(total, expected, 1e-4));
}

TEST_CASE("trajectory CSV export") {
  const Trajectory t =
      integrate(ModelKind::ShortTerm, nanjing_params(), nanjing_x0(), days(3));
  const std::string csv = trajectory_to_csv(t);

  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "t,S,E,I,A,Q,R,cum_sym,cum_asym");

  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == t.size());
  CHECK(rows[0].substr(0, 2) == "0,");
  CHECK(rows[1].substr(0, 2) == "1,");

  // Each row holds nine %.10g fields; spot-check S at t = 1.
  std::istringstream row(rows[1]);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(row, field, ',')) fields.push_back(field);
  REQUIRE(fields.size() == 9);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", t.states[1][0]);
  CHECK(fields[1] == buf);
}

}  // TEST_SUITE
