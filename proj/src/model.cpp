#include "seiaqr/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "param_access.hpp"

namespace seiaqr {

namespace {

using nlohmann::json;
using detail::kRateNames;
using detail::rate_field;

}  // namespace

std::string to_string(Mode mode) {
  return mode == Mode::Long ? "long" : "short";
}

void Params::validate() const {
  for (int i = 0; i < 12; ++i) {
    if (!std::isfinite(rate_field(*this, i)))
      raise(ErrorCode::NonFiniteInput,
            std::string("parameter '") + kRateNames[i] + "' is not finite");
  }
  if (mode == Mode::Long) {
    if (lambda <= 0 || d <= 0)
      raise(ErrorCode::InvalidParameter,
            "long mode needs recruitment lambda > 0 and death rate d > 0");
  } else {
    if (lambda != 0 || d != 0)
      raise(ErrorCode::InvalidParameter,
            "short mode is the closed population: lambda and d must be 0");
  }
  if (beta <= 0)
    raise(ErrorCode::InvalidParameter, "transmission rate beta must be > 0");
  if (c <= 0)
    raise(ErrorCode::InvalidParameter, "exposed exit rate c must be > 0");
  if (p < 0 || p > 1)
    raise(ErrorCode::InvalidParameter,
          "symptomatic probability p must lie in [0, 1]");
  if (a < 0 || b < 0 || q1 < 0 || q2 < 0 || r1 < 0 || r2 < 0 || r3 < 0)
    raise(ErrorCode::InvalidParameter,
          "infectivity factors and quarantine/recovery rates must be >= 0");
  if (q1 + r1 <= 0 || q2 + r2 <= 0)
    raise(ErrorCode::InvalidParameter,
          "each infected class needs a positive exit rate: q1 + r1 > 0 and "
          "q2 + r2 > 0");
}

ModelKind default_kind(Mode mode) {
  return mode == Mode::Long ? ModelKind::LongTerm : ModelKind::ShortTerm;
}

double total_population(const Vector6& x) { return x.sum(); }

namespace {

/// Shared flow chain given a precomputed incidence term.
Vector6 flows(const Params& p, const Vector6& x, double incidence) {
  const double S = x[0], E = x[1], I = x[2], A = x[3], Q = x[4], R = x[5];
  Vector6 dx;
  dx[0] = p.lambda - incidence - p.d * S;
  dx[1] = incidence - (p.c + p.d) * E;
  dx[2] = p.p * p.c * E - p.B1() * I;
  dx[3] = (1 - p.p) * p.c * E - p.B2() * A;
  dx[4] = p.q1 * I + p.q2 * A - (p.r3 + p.d) * Q;
  dx[5] = p.r1 * I + p.r2 * A + p.r3 * Q - p.d * R;
  return dx;
}

double force_of_infection(const Params& p, const Vector6& x) {
  return p.beta * x[0] * (p.a * x[1] + x[2] + p.b * x[3]);
}

}  // namespace

Vector6 rhs_long(const Params& p, const Vector6& x) {
  const double n = total_population(x);
  if (n <= 0)
    raise(ErrorCode::ZeroPopulation,
          "standard incidence is undefined for a nonpositive population");
  return flows(p, x, force_of_infection(p, x) / n);
}

Vector6 rhs_limiting(const Params& p, const Vector6& x) {
  return flows(p, x, force_of_infection(p, x) / p.s0());
}

Vector6 rhs_short(const Params& p, const Vector6& x) {
  const double n = total_population(x);
  if (n <= 0)
    raise(ErrorCode::ZeroPopulation,
          "standard incidence is undefined for a nonpositive population");
  return flows(p, x, force_of_infection(p, x) / n);
}

Vector6 rhs(ModelKind kind, const Params& p, const Vector6& x) {
  switch (kind) {
    case ModelKind::LongTerm: return rhs_long(p, x);
    case ModelKind::Limiting: return rhs_limiting(p, x);
    case ModelKind::ShortTerm: return rhs_short(p, x);
  }
  raise(ErrorCode::DomainError, "model kind out of range");
}

ParamsFile parse_params_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError,
          std::string("parameter file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    raise(ErrorCode::ParseError, "parameter file must be a JSON object");

  ParamsFile file;
  for (int i = 0; i < 12; ++i) {
    const char* name = kRateNames[i];
    if (!doc.contains(name))
      raise(ErrorCode::ParseError,
            std::string("missing parameter '") + name + "'");
    if (!doc[name].is_number())
      raise(ErrorCode::ParseError,
            std::string("parameter '") + name + "' must be a number");
    rate_field(file.params, i) = doc[name].get<double>();
  }

  for (const auto& [key, value] : doc.items()) {
    bool known = key == "mode" || key == "initial";
    for (int i = 0; i < 12 && !known; ++i) known = key == kRateNames[i];
    if (!known)
      raise(ErrorCode::ParseError,
            "unknown field '" + key + "' in parameter file");
    (void)value;
  }

  if (doc.contains("mode")) {
    const std::string mode = doc["mode"].is_string()
                                 ? doc["mode"].get<std::string>()
                                 : std::string();
    if (mode == "long")
      file.params.mode = Mode::Long;
    else if (mode == "short")
      file.params.mode = Mode::Short;
    else
      raise(ErrorCode::ParseError,
            "mode must be \"long\" or \"short\", got '" + mode + "'");
  } else {
    file.params.mode =
        (file.params.lambda == 0 && file.params.d == 0) ? Mode::Short
                                                        : Mode::Long;
  }

  if (doc.contains("initial")) {
    const json& init = doc["initial"];
    if (!init.is_object())
      raise(ErrorCode::ParseError, "initial state must be a JSON object");
    static constexpr const char* comp[6] = {"S", "E", "I", "A", "Q", "R"};
    Vector6 x;
    for (int i = 0; i < 6; ++i) {
      if (!init.contains(comp[i]) || !init[comp[i]].is_number())
        raise(ErrorCode::ParseError,
              std::string("initial state needs numeric '") + comp[i] + "'");
      x[i] = init[comp[i]].get<double>();
    }
    for (const auto& [key, value] : init.items()) {
      bool known = false;
      for (int i = 0; i < 6 && !known; ++i) known = key == comp[i];
      if (!known)
        raise(ErrorCode::ParseError,
              "unknown compartment '" + key + "' in initial state");
      (void)value;
    }
    file.initial = x;
  }

  return file;
}

ParamsFile load_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    raise(ErrorCode::IoError, "cannot open parameter file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad())
    raise(ErrorCode::IoError, "cannot read parameter file '" + path + "'");
  return parse_params_json(buffer.str());
}

std::string params_to_json(const Params& p) {
  json doc;
  for (int i = 0; i < 12; ++i) doc[kRateNames[i]] = rate_field(p, i);
  doc["mode"] = to_string(p.mode);
  return doc.dump(2) + "\n";
}

}  // namespace seiaqr
