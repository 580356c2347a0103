#include "seiaqr/calibration.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "param_access.hpp"

namespace seiaqr {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_date(const std::chrono::year_month_day& ymd) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

// Strict ISO yyyy-mm-dd; the calendar check catches month 13 and the like.
std::chrono::year_month_day parse_date(const std::string& field, int line_no) {
  const auto bad = [&](const std::string& why) {
    raise(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": '" +
                                     field + "' is not a " + why);
  };
  if (field.size() != 10 || field[4] != '-' || field[7] != '-')
    bad("yyyy-mm-dd date");
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(field[i])))
      bad("yyyy-mm-dd date");
  const int y = std::stoi(field.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(field.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(field.substr(8, 2)));
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) bad("valid calendar date");
  return ymd;
}

double parse_count(const std::string& field, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size() || !std::isfinite(v))
      raise(ErrorCode::ParseError, "");
    return v;
  } catch (const std::exception&) {
    raise(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": '" +
                                     field + "' is not a finite count");
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

ObservedSeries parse_series_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    raise(ErrorCode::ParseError, "empty series document");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  bool with_cumulative = false;
  if (line == "date,daily_new")
    with_cumulative = false;
  else if (line == "date,daily_new,cumulative")
    with_cumulative = true;
  else
    raise(ErrorCode::ParseError,
          "expected header 'date,daily_new[,cumulative]', got '" + line + "'");

  ObservedSeries series;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const std::vector<std::string> fields = split_fields(line);
    const std::size_t want = with_cumulative ? 3u : 2u;
    if (fields.size() != want)
      raise(ErrorCode::ParseError,
            "line " + std::to_string(line_no) + ": expected " +
                std::to_string(want) + " fields, got " +
                std::to_string(fields.size()));

    const std::chrono::year_month_day date = parse_date(fields[0], line_no);
    if (!series.dates.empty()) {
      using std::chrono::sys_days;
      const std::chrono::year_month_day expected{
          sys_days(series.dates.back()) + std::chrono::days{1}};
      if (date != expected)
        raise(ErrorCode::GapError, "line " + std::to_string(line_no) +
                                       ": expected " + format_date(expected) +
                                       " after " +
                                       format_date(series.dates.back()) +
                                       ", got " + format_date(date));
    }

    const double count = parse_count(fields[1], line_no);
    if (count < 0.0)
      raise(ErrorCode::ConsistencyError,
            "line " + std::to_string(line_no) + ": daily counts cannot be " +
                "negative (got " + fields[1] + ")");

    series.dates.push_back(date);
    series.daily_new.push_back(count);
    if (with_cumulative)
      series.cumulative.push_back(parse_count(fields[2], line_no));
  }

  if (series.size() == 0)
    raise(ErrorCode::ParseError, "the series has a header but no rows");

  // The cumulative column may carry history from before the window, so
  // only its day-over-day increments are constrained.
  for (std::size_t k = 1; k < series.cumulative.size(); ++k) {
    const double inc = series.cumulative[k] - series.cumulative[k - 1];
    const double want = series.daily_new[k];
    if (std::abs(inc - want) > 1e-9 * std::max(1.0, std::abs(want)))
      raise(ErrorCode::ConsistencyError,
            "cumulative increment " + std::to_string(inc) + " on " +
                format_date(series.dates[k]) +
                " disagrees with the daily count " + std::to_string(want));
  }
  return series;
}

ObservedSeries load_series(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorCode::IoError, "cannot open series file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_series_csv(buf.str());
}

void FitConfig::validate() const {
  base.validate();
  if (max_evaluations <= 0)
    raise(ErrorCode::InvalidParameter, "max_evaluations must be positive");
  if (restarts <= 0)
    raise(ErrorCode::InvalidParameter, "restarts must be positive");

  std::set<std::string> seen;
  auto check_common = [&](const FreeQuantity& q) {
    if (!std::isfinite(q.lower) || !std::isfinite(q.upper))
      raise(ErrorCode::InvalidParameter,
            "bounds for '" + q.name + "' must be finite");
    if (!(q.lower < q.upper))
      raise(ErrorCode::InvalidParameter,
            "the lower bound for '" + q.name +
                "' must be strictly below the upper bound");
    if (q.lower < 0.0)
      raise(ErrorCode::InvalidParameter,
            "'" + q.name + "' is a nonnegative quantity; the lower bound "
                           "cannot be negative");
    if (!seen.insert(q.name).second)
      raise(ErrorCode::InvalidParameter,
            "free quantity '" + q.name + "' is listed twice");
  };

  for (const FreeQuantity& q : free_params) {
    check_common(q);
    if (detail::rate_index(q.name) < 0)
      raise(ErrorCode::UnknownParameter,
            "unknown rate constant '" + q.name + "'");
    if (q.name == "p" && q.upper > 1.0)
      raise(ErrorCode::InvalidParameter,
            "probability bounds for 'p' must stay within [0, 1]");
    if ((q.name == "lambda" || q.name == "d") && base.mode == Mode::Short)
      raise(ErrorCode::InvalidParameter,
            "the closed-population model has no demography; '" + q.name +
                "' cannot be freed in short mode");
  }
  for (const FreeQuantity& q : free_initials) {
    check_common(q);
    if (detail::initial_index(q.name) < 0)
      raise(ErrorCode::UnknownParameter,
            "unknown initial condition '" + q.name +
                "'; expected one of S0, E0, I0, A0, Q0, R0");
  }
}

namespace {

FreeQuantity parse_free_entry(const json& e) {
  if (!e.is_object() || !e.contains("name") || !e.contains("lower") ||
      !e.contains("upper") || e.size() != 3)
    raise(ErrorCode::ParseError,
          "each free quantity needs exactly {\"name\", \"lower\", \"upper\"}");
  if (!e["name"].is_string() || !e["lower"].is_number() ||
      !e["upper"].is_number())
    raise(ErrorCode::ParseError,
          "free-quantity fields have types {string, number, number}");
  return FreeQuantity{e["name"].get<std::string>(), e["lower"].get<double>(),
                      e["upper"].get<double>()};
}

}  // namespace

FitConfig parse_fit_config_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError,
          std::string("fit config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    raise(ErrorCode::ParseError, "fit config must be a JSON object");

  static const std::set<std::string> kAllowed = {
      "params",          "free_params", "free_initials",
      "observation",     "loss_on_cumulative",
      "max_evaluations", "restarts",    "seed"};
  for (const auto& item : doc.items())
    if (kAllowed.find(item.key()) == kAllowed.end())
      raise(ErrorCode::ParseError,
            "unknown fit-config field '" + item.key() + "'");

  if (!doc.contains("params"))
    raise(ErrorCode::ParseError, "fit config requires a \"params\" block");

  const ParamsFile pf = parse_params_json(doc["params"].dump());
  if (!pf.initial.has_value())
    raise(ErrorCode::ParseError,
          "the params block must include an \"initial\" state for fitting");

  FitConfig cfg;
  cfg.base = pf.params;
  cfg.x0 = *pf.initial;
  cfg.observation = default_observation(cfg.base.mode);

  if (doc.contains("free_params")) {
    if (!doc["free_params"].is_array())
      raise(ErrorCode::ParseError, "\"free_params\" must be an array");
    for (const json& e : doc["free_params"])
      cfg.free_params.push_back(parse_free_entry(e));
  }
  if (doc.contains("free_initials")) {
    if (!doc["free_initials"].is_array())
      raise(ErrorCode::ParseError, "\"free_initials\" must be an array");
    for (const json& e : doc["free_initials"])
      cfg.free_initials.push_back(parse_free_entry(e));
  }
  if (doc.contains("observation")) {
    if (!doc["observation"].is_string())
      raise(ErrorCode::ParseError, "\"observation\" must be a string");
    cfg.observation =
        observation_from_name(doc["observation"].get<std::string>());
  }
  if (doc.contains("loss_on_cumulative")) {
    if (!doc["loss_on_cumulative"].is_boolean())
      raise(ErrorCode::ParseError, "\"loss_on_cumulative\" must be a boolean");
    cfg.loss_on_cumulative = doc["loss_on_cumulative"].get<bool>();
  }
  if (doc.contains("max_evaluations")) {
    if (!doc["max_evaluations"].is_number_integer())
      raise(ErrorCode::ParseError, "\"max_evaluations\" must be an integer");
    cfg.max_evaluations = doc["max_evaluations"].get<long>();
  }
  if (doc.contains("restarts")) {
    if (!doc["restarts"].is_number_integer())
      raise(ErrorCode::ParseError, "\"restarts\" must be an integer");
    cfg.restarts = doc["restarts"].get<int>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<double>() < 0)
      raise(ErrorCode::ParseError, "\"seed\" must be a nonnegative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  return cfg;
}

FitConfig load_fit_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(ErrorCode::IoError, "cannot open fit config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_fit_config_json(buf.str());
}

double residual_loss(const Params& params, const Vector6& x0,
                     const ObservedSeries& obs, const FitConfig& cfg) {
  if (obs.size() == 0) return 0.0;
  try {
    IntegrationOptions o;
    o.t_end = static_cast<double>(obs.size());
    o.output_stride = 0.25;
    const Trajectory traj =
        integrate(default_kind(params.mode), params, x0, o);
    const std::vector<double> sim = observed_series(traj, cfg.observation);
    const std::size_t n = std::min(sim.size(), obs.size());
    double loss = 0.0;
    if (cfg.loss_on_cumulative) {
      double sim_total = 0.0, obs_total = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        sim_total += sim[k];
        obs_total += obs.daily_new[k];
        const double diff = sim_total - obs_total;
        loss += diff * diff;
      }
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        const double diff = sim[k] - obs.daily_new[k];
        loss += diff * diff;
      }
    }
    return loss;
  } catch (const Error&) {
    return kInf;  // an unintegrable candidate is infinitely bad, not fatal
  }
}

namespace {

// One optimizable coordinate with its box and scaling. Quantities bounded
// away from zero move in log scale, which makes the search step relative.
struct Coordinate {
  bool is_initial = false;
  int index = 0;
  double lo = 0, hi = 0;
  bool log_scale = false;

  double to_internal(double v) const {
    return log_scale ? std::log(v) : v;
  }
  double from_internal(double u) const {
    return log_scale ? std::exp(u) : u;
  }
};

std::vector<Coordinate> build_coordinates(const FitConfig& cfg) {
  std::vector<Coordinate> coords;
  for (const FreeQuantity& q : cfg.free_params)
    coords.push_back(Coordinate{false, detail::rate_index(q.name), q.lower,
                                q.upper, q.lower > 0.0});
  for (const FreeQuantity& q : cfg.free_initials)
    coords.push_back(Coordinate{true, detail::initial_index(q.name), q.lower,
                                q.upper, q.lower > 0.0});
  return coords;
}

struct Candidate {
  Params params;
  Vector6 x0;
  double penalty = 0;
};

Candidate materialize(const FitConfig& cfg,
                      const std::vector<Coordinate>& coords,
                      const std::vector<double>& u) {
  Candidate cand{cfg.base, cfg.x0, 0.0};
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const Coordinate& c = coords[i];
    const double raw = c.from_internal(u[i]);
    const double v = std::clamp(raw, c.lo, c.hi);
    if (raw != v) {
      const double excess = (raw - v) / (c.hi - c.lo);
      cand.penalty += 1e6 * excess * excess;
    }
    if (c.is_initial)
      cand.x0[c.index] = v;
    else
      detail::rate_field(cand.params, c.index) = v;
  }
  return cand;
}

struct NelderMeadOutcome {
  std::vector<double> best_u;
  double best_f = kInf;
  bool evaluated = false;
  bool converged = false;
};

// Standard Nelder–Mead with a hard evaluation budget shared across
// restarts. Every objective evaluation updates the incumbent, so an
// interrupted search still reports the best point it saw.
NelderMeadOutcome nelder_mead(
    const std::function<bool(const std::vector<double>&, double&)>& try_eval,
    const std::vector<double>& start, const std::vector<double>& steps) {
  const std::size_t n = start.size();
  NelderMeadOutcome out;
  out.best_u = start;

  auto eval = [&](const std::vector<double>& u, double& f) -> bool {
    if (!try_eval(u, f)) return false;
    if (!out.evaluated || f < out.best_f) {
      out.best_f = f;
      out.best_u = u;
      out.evaluated = true;
    }
    return true;
  };

  std::vector<std::vector<double>> simplex(n + 1, start);
  std::vector<double> f(n + 1, kInf);
  for (std::size_t i = 1; i <= n; ++i) simplex[i][i - 1] += steps[i - 1];
  for (std::size_t i = 0; i <= n; ++i)
    if (!eval(simplex[i], f[i])) return out;

  std::vector<std::size_t> order(n + 1);
  for (std::size_t iter = 0; iter < 100000; ++iter) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    const std::size_t lo = order[0], hi = order[n], second = order[n - 1];

    const double spread = f[hi] - f[lo];
    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        diameter = std::max(diameter,
                            std::abs(simplex[i][j] - simplex[lo][j]));
    if (spread <= 1e-10 * (1.0 + std::abs(f[lo])) || diameter <= 1e-9) {
      out.converged = true;
      return out;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (std::size_t j = 0; j < n; ++j) centroid[j] /= static_cast<double>(n);

    auto along = [&](double factor) {
      std::vector<double> u(n);
      for (std::size_t j = 0; j < n; ++j)
        u[j] = centroid[j] + factor * (centroid[j] - simplex[hi][j]);
      return u;
    };

    const std::vector<double> reflected = along(1.0);
    double f_reflected;
    if (!eval(reflected, f_reflected)) return out;

    if (f_reflected < f[lo]) {
      const std::vector<double> expanded = along(2.0);
      double f_expanded;
      if (!eval(expanded, f_expanded)) return out;
      if (f_expanded < f_reflected) {
        simplex[hi] = expanded;
        f[hi] = f_expanded;
      } else {
        simplex[hi] = reflected;
        f[hi] = f_reflected;
      }
      continue;
    }
    if (f_reflected < f[second]) {
      simplex[hi] = reflected;
      f[hi] = f_reflected;
      continue;
    }

    const bool outside = f_reflected < f[hi];
    const std::vector<double> contracted = along(outside ? 0.5 : -0.5);
    double f_contracted;
    if (!eval(contracted, f_contracted)) return out;
    if (f_contracted < (outside ? f_reflected : f[hi])) {
      simplex[hi] = contracted;
      f[hi] = f_contracted;
      continue;
    }

    for (std::size_t i = 0; i <= n; ++i) {  // shrink toward the best vertex
      if (i == lo) continue;
      for (std::size_t j = 0; j < n; ++j)
        simplex[i][j] = simplex[lo][j] + 0.5 * (simplex[i][j] - simplex[lo][j]);
      if (!eval(simplex[i], f[i])) return out;
    }
  }
  return out;
}

}  // namespace

FitResult fit(const FitConfig& cfg, const ObservedSeries& obs) {
  cfg.validate();
  const std::size_t n_free = cfg.free_params.size() + cfg.free_initials.size();
  if (obs.size() < n_free)
    raise(ErrorCode::InvalidParameter,
          std::to_string(obs.size()) + " observations cannot determine " +
              std::to_string(n_free) + " free quantities");

  FitResult result;
  result.params = cfg.base;
  result.x0 = cfg.x0;

  if (n_free == 0) {
    result.loss = residual_loss(cfg.base, cfg.x0, obs, cfg);
    result.evaluations = 1;
    result.converged = true;
    result.restart_losses = {result.loss};
    return result;
  }

  const std::vector<Coordinate> coords = build_coordinates(cfg);
  long evaluations = 0;
  auto try_eval = [&](const std::vector<double>& u, double& f) -> bool {
    if (evaluations >= cfg.max_evaluations) return false;
    ++evaluations;
    const Candidate cand = materialize(cfg, coords, u);
    f = residual_loss(cand.params, cand.x0, obs, cfg) + cand.penalty;
    return true;
  };

  std::vector<double> u_base(coords.size()), u_lo(coords.size()),
      u_hi(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const Coordinate& c = coords[i];
    const double current = c.is_initial
                               ? cfg.x0[c.index]
                               : detail::rate_field(cfg.base, c.index);
    u_base[i] = c.to_internal(std::clamp(current, c.lo, c.hi));
    u_lo[i] = c.to_internal(c.lo);
    u_hi[i] = c.to_internal(c.hi);
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  bool all_converged = true;
  double best_f = kInf;
  std::vector<double> best_u = u_base;
  bool have_best = false;

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    std::vector<double> start = u_base;
    if (restart > 0)
      for (std::size_t i = 0; i < start.size(); ++i)
        start[i] = std::clamp(
            start[i] + jitter(rng) * 0.25 * (u_hi[i] - u_lo[i]), u_lo[i],
            u_hi[i]);

    std::vector<double> steps(coords.size());
    for (std::size_t i = 0; i < steps.size(); ++i)
      steps[i] = 0.1 * (u_hi[i] - u_lo[i]);

    const NelderMeadOutcome outcome = nelder_mead(try_eval, start, steps);
    result.restart_losses.push_back(outcome.evaluated ? outcome.best_f : kInf);
    if (!outcome.converged) all_converged = false;
    if (outcome.evaluated && (!have_best || outcome.best_f < best_f)) {
      best_f = outcome.best_f;
      best_u = outcome.best_u;
      have_best = true;
    }
  }

  if (have_best) {
    const Candidate cand = materialize(cfg, coords, best_u);
    result.params = cand.params;
    result.x0 = cand.x0;
    result.loss = best_f;
  } else {
    result.loss = kInf;
  }
  result.evaluations = evaluations;
  result.converged = all_converged && have_best;
  return result;
}

std::string fit_report_json(const FitConfig& cfg, const FitResult& result) {
  json doc;
  for (int i = 0; i < 12; ++i)
    doc["params"][detail::kRateNames[i]] = detail::rate_field(result.params, i);
  doc["params"]["mode"] = to_string(result.params.mode);
  const char* comp[6] = {"S", "E", "I", "A", "Q", "R"};
  for (int i = 0; i < 6; ++i) doc["initial"][comp[i]] = result.x0[i];
  doc["observation"] = to_string(cfg.observation);
  doc["loss"] = result.loss;
  doc["evaluations"] = result.evaluations;
  doc["converged"] = result.converged;
  doc["restart_losses"] = result.restart_losses;
  return doc.dump(2) + "\n";
}

}  // namespace seiaqr
