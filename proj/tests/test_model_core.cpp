#include "seiaqr/model.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_support.hpp"

using namespace seiaqr;
using testutil::india_params;
using testutil::india_x0;
using testutil::nanjing_params;
using testutil::nanjing_x0;
using testutil::rel_close;

TEST_SUITE("model_core") {

TEST_CASE("case-study parameter sets validate") {
  CHECK_NOTHROW(india_params().validate());
  CHECK_NOTHROW(nanjing_params().validate());
}

TEST_CASE("mode-specific demography rules are enforced") {
  Params p = india_params();
  p.d = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("long"), Error);

  p = india_params();
  p.lambda = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);

  p = nanjing_params();
  p.lambda = 10.0;
  try {
    p.validate();
    FAIL("short mode with recruitment must not validate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidParameter);
  }

  p = nanjing_params();
  p.d = 1e-4;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("rate invariants are enforced") {
  auto expect_code = [](Params p, ErrorCode code) {
    try {
      p.validate();
      FAIL_CHECK("expected a validation error");
    } catch (const Error& e) {
      CHECK(e.code() == code);
    }
  };

  Params p = india_params();
  p.beta = 0.0;
  expect_code(p, ErrorCode::InvalidParameter);

  p = india_params();
  p.c = 0.0;
  expect_code(p, ErrorCode::InvalidParameter);

  p = india_params();
  p.p = 1.5;
  expect_code(p, ErrorCode::InvalidParameter);

  p = india_params();
  p.q1 = -0.1;
  expect_code(p, ErrorCode::InvalidParameter);

  p = india_params();
  p.beta = std::numeric_limits<double>::quiet_NaN();
  expect_code(p, ErrorCode::NonFiniteInput);

  p = india_params();
  p.lambda = std::numeric_limits<double>::infinity();
  expect_code(p, ErrorCode::NonFiniteInput);

  // The degenerate pure-symptomatic and pure-asymptomatic models are legal.
  p = india_params();
  p.p = 0.0;
  CHECK_NOTHROW(p.validate());
  p.p = 1.0;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("derived rates and carrying capacity") {
  const Params p = india_params();
  CHECK(p.B1() == doctest::Approx(0.8296 + 0.2565 + 3.8905e-5).epsilon(1e-15));
  CHECK(p.B2() == doctest::Approx(0.1947 + 0.1201 + 3.8905e-5).epsilon(1e-15));
  CHECK(p.s0() == doctest::Approx(1993959645.2898085).epsilon(1e-15));

  const Params n = nanjing_params();
  CHECK(n.B1() == doctest::Approx(0.0757 + 0.1621).epsilon(1e-15));
  CHECK(n.B2() == doctest::Approx(0.1701 + 0.08).epsilon(1e-15));
}

TEST_CASE("total_population sums the compartments") {
  Vector6 x;
  x << 1, 2, 3, 4, 5, 6;
  CHECK(total_population(x) == 21.0);
  CHECK(total_population(Vector6::Zero()) == 0.0);
  CHECK(total_population(nanjing_x0()) ==
        doctest::Approx(9314666.2354).epsilon(1e-12));
}

TEST_CASE("demographic balance point has zero derivative") {
  const Params p = india_params();
  Vector6 v0 = Vector6::Zero();
  v0[0] = p.s0();
  const Vector6 dx = rhs_long(p, v0);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(dx[i]) < 1e-6 * p.lambda);
  const Vector6 dxl = rhs_limiting(p, v0);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(dxl[i]) < 1e-6 * p.lambda);
}

TEST_CASE("demographic flow values at the India starting state") {
  const Vector6 dx = rhs_long(india_params(), india_x0());
  CHECK(rel_close(dx[0], 2246.5442113352547, 1e-12));
  CHECK(rel_close(dx[1], 3732.3233097297416, 1e-12));
  CHECK(rel_close(dx[2], -7504.026653445002, 1e-12));
  CHECK(rel_close(dx[3], -2.13435501999993, 1e-9));
  CHECK(rel_close(dx[4], 11281.125294341999, 1e-12));
  CHECK(rel_close(dx[5], 13868.650846494998, 1e-12));
  // Recruitment exceeds infection drain plus deaths here, so the
  // susceptible pool is still growing while the exposed pool fills up.
  CHECK(dx[0] > 0);
  CHECK(dx[1] > 0);
}

TEST_CASE("frozen-denominator flow values at the India starting state") {
  const Vector6 dx = rhs_limiting(india_params(), india_x0());
  CHECK(rel_close(dx[0], 8756.66360854674, 1e-12));
  CHECK(rel_close(dx[1], -2777.7960874817436, 1e-12));
  // Only the two incidence-coupled components differ from rhs_long.
  const Vector6 dl = rhs_long(india_params(), india_x0());
  for (int i = 2; i < 6; ++i) CHECK(dx[i] == dl[i]);
}

TEST_CASE("frozen denominator matches live denominator at carrying capacity") {
  const Params p = india_params();
  Vector6 x;
  const double s0 = p.s0();
  x << s0 - 500.0, 100.0, 100.0, 100.0, 100.0, 100.0;
  const Vector6 a = rhs_long(p, x);
  const Vector6 b = rhs_limiting(p, x);
  for (int i = 0; i < 6; ++i) CHECK(rel_close(a[i], b[i], 1e-12));
}

TEST_CASE("closed-population flow values at the Nanjing starting state") {
  const Vector6 dx = rhs_short(nanjing_params(), nanjing_x0());
  CHECK(rel_close(dx[0], -0.2731152740502695, 1e-12));
  CHECK(rel_close(dx[1], -1.6354616490266536, 1e-12));
  CHECK(rel_close(dx[2], -30.689468361538463, 1e-12));
  CHECK(rel_close(dx[3], -9.611959015384617, 1e-12));
  CHECK(rel_close(dx[4], 9.890080299999997, 1e-12));
  CHECK(rel_close(dx[5], 32.319924, 1e-12));
}

TEST_CASE("closed-population compartment sum is conserved") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const Params p = testutil::random_params(rng, Mode::Short);
    const Vector6 x = testutil::random_state(rng, 1e6);
    if (total_population(x) <= 0) continue;
    const Vector6 dx = rhs_short(p, x);
    const double flow_scale = dx.cwiseAbs().maxCoeff() + 1.0;
    CHECK(std::abs(dx.sum()) <= 1e-12 * flow_scale);
  }
}

TEST_CASE("infection-free split states are stationary in the closed model") {
  const Params p = nanjing_params();
  Vector6 x;
  x << 5e6, 0, 0, 0, 0, 4e6;
  CHECK(rhs_short(p, x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("demographic compartment sum follows recruitment minus deaths") {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 100; ++trial) {
    const Params p = testutil::random_params(rng, Mode::Long);
    const Vector6 x = testutil::random_state(rng, 1e7);
    if (total_population(x) <= 0) continue;
    const double expected = p.lambda - p.d * total_population(x);
    CHECK(rel_close(rhs_long(p, x).sum(), expected, 1e-10));
  }
}

TEST_CASE("zero-valued compartments never flow negative") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 60; ++trial) {
    const Mode mode = (trial % 2 == 0) ? Mode::Long : Mode::Short;
    const Params p = testutil::random_params(rng, mode);
    for (int i = 0; i < 6; ++i) {
      Vector6 x = testutil::random_state(rng, 1e5);
      x[i] = 0.0;
      if (total_population(x) <= 0) continue;
      const Vector6 dx =
          (mode == Mode::Long) ? rhs_long(p, x) : rhs_short(p, x);
      CHECK(dx[i] >= 0.0);
    }
  }
}

TEST_CASE("empty population is rejected by standard incidence") {
  CHECK_THROWS_AS((void)rhs_long(india_params(), Vector6::Zero()), Error);
  try {
    (void)rhs_short(nanjing_params(), Vector6::Zero());
    FAIL("zero population must be rejected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroPopulation);
  }
  // The frozen-denominator variant never divides by the live population.
  CHECK_NOTHROW((void)rhs_limiting(india_params(), Vector6::Zero()));
}

TEST_CASE("kind dispatch selects the matching flow") {
  const Params p = india_params();
  const Vector6 x = india_x0();
  CHECK(rhs(ModelKind::LongTerm, p, x) == rhs_long(p, x));
  CHECK(rhs(ModelKind::Limiting, p, x) == rhs_limiting(p, x));
  const Params n = nanjing_params();
  CHECK(rhs(ModelKind::ShortTerm, n, nanjing_x0()) ==
        rhs_short(n, nanjing_x0()));
}

TEST_CASE("default kind follows the mode") {
  CHECK(default_kind(india_params()) == ModelKind::LongTerm);
  CHECK(default_kind(nanjing_params()) == ModelKind::ShortTerm);
}

TEST_CASE("state and vector views agree") {
  State s{1, 2, 3, 4, 5, 6};
  const Vector6 v = s.vec();
  CHECK(v[0] == 1.0);
  CHECK(v[5] == 6.0);
  const State back = State::from_vec(v);
  CHECK(back.S == 1.0);
  CHECK(back.Q == 5.0);
}

TEST_CASE("compartment names round-trip") {
  CHECK(compartment_from_name("A") == Compartment::A);
  CHECK(to_string(Compartment::Q) == "Q");
  CHECK_THROWS_AS((void)compartment_from_name("X"), Error);
}

TEST_CASE("params JSON accepts the documented schema") {
  const std::string text = R"({
    "lambda": 7.7575e4, "d": 3.8905e-5, "beta": 0.3717, "a": 0.4898,
    "b": 1.7281, "c": 0.8945, "p": 0.6937, "q1": 0.8296, "q2": 0.1947,
    "r1": 0.2565, "r2": 0.1201, "r3": 0.9495,
    "mode": "long",
    "initial": {"S": 1.3867e9, "E": 1.9727e4, "I": 1.8179e4,
                "A": 1.7174e4, "Q": 7.5236e3, "R": 1.3321e4}
  })";
  const ParamsFile f = parse_params_json(text);
  CHECK(f.params.beta == 0.3717);
  CHECK(f.params.mode == Mode::Long);
  REQUIRE(f.initial.has_value());
  CHECK((*f.initial)[0] == 1.3867e9);
  CHECK((*f.initial)[4] == 7.5236e3);
}

TEST_CASE("params JSON catches schema mistakes") {
  auto expect_parse_error = [](const std::string& text) {
    try {
      (void)parse_params_json(text);
      FAIL_CHECK("expected ParseError for: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  };

  // not JSON at all
  expect_parse_error("{nope");
  // missing a rate
  expect_parse_error(R"({"lambda":1,"d":1,"beta":1,"a":1,"b":1,"c":1,
                        "p":0.5,"q1":1,"q2":1,"r1":1,"r2":1})");
  // misspelled rate
  expect_parse_error(R"({"lambda":1,"d":1,"bata":1,"beta":1,"a":1,"b":1,
                        "c":1,"p":0.5,"q1":1,"q2":1,"r1":1,"r2":1,"r3":1})");
  // unknown mode
  expect_parse_error(R"({"lambda":1,"d":1,"beta":1,"a":1,"b":1,"c":1,
                        "p":0.5,"q1":1,"q2":1,"r1":1,"r2":1,"r3":1,
                        "mode":"medium"})");
  // non-numeric rate
  expect_parse_error(R"({"lambda":"lots","d":1,"beta":1,"a":1,"b":1,"c":1,
                        "p":0.5,"q1":1,"q2":1,"r1":1,"r2":1,"r3":1})");
  // initial with a missing compartment
  expect_parse_error(R"({"lambda":1,"d":1,"beta":1,"a":1,"b":1,"c":1,
                        "p":0.5,"q1":1,"q2":1,"r1":1,"r2":1,"r3":1,
                        "initial":{"S":1,"E":0,"I":0,"A":0,"Q":0}})");
  // initial with an extra key
  expect_parse_error(R"({"lambda":1,"d":1,"beta":1,"a":1,"b":1,"c":1,
                        "p":0.5,"q1":1,"q2":1,"r1":1,"r2":1,"r3":1,
                        "initial":{"S":1,"E":0,"I":0,"A":0,"Q":0,"R":0,
                                   "Z":0}})");
}

TEST_CASE("params JSON round-trips exactly") {
  const Params p = india_params();
  const ParamsFile f = parse_params_json(params_to_json(p));
  CHECK(f.params.lambda == p.lambda);
  CHECK(f.params.d == p.d);
  CHECK(f.params.beta == p.beta);
  CHECK(f.params.a == p.a);
  CHECK(f.params.b == p.b);
  CHECK(f.params.c == p.c);
  CHECK(f.params.p == p.p);
  CHECK(f.params.q1 == p.q1);
  CHECK(f.params.q2 == p.q2);
  CHECK(f.params.r1 == p.r1);
  CHECK(f.params.r2 == p.r2);
  CHECK(f.params.r3 == p.r3);
  CHECK(f.params.mode == p.mode);

  const Params n = nanjing_params();
  const ParamsFile g = parse_params_json(params_to_json(n));
  CHECK(g.params.c == n.c);
  CHECK(g.params.mode == Mode::Short);
}

TEST_CASE("bundled parameter files load") {
  const ParamsFile india = load_params_file(testutil::fixture_path("india.json"));
  CHECK(india.params.mode == Mode::Long);
  CHECK(india.params.beta == 0.3717);
  REQUIRE(india.initial.has_value());
  CHECK((*india.initial)[0] == 1.3867e9);

  const ParamsFile nanjing =
      load_params_file(testutil::fixture_path("nanjing.json"));
  CHECK(nanjing.params.mode == Mode::Short);
  CHECK(nanjing.params.c == doctest::Approx(1.0 / 5.2).epsilon(1e-15));
  REQUIRE(nanjing.initial.has_value());
  CHECK((*nanjing.initial)[5] == 9.7078);
}

TEST_CASE("missing parameter file raises an IO error") {
  try {
    (void)load_params_file("/nonexistent/params.json");
    FAIL("missing file must raise");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}

}  // TEST_SUITE
