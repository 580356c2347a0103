#include "seiaqr/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "param_access.hpp"
#include "seiaqr/calibration.hpp"
#include "seiaqr/equilibria.hpp"
#include "seiaqr/final_size.hpp"
#include "seiaqr/integrate.hpp"
#include "seiaqr/model.hpp"
#include "seiaqr/reproduction.hpp"

namespace seiaqr {

namespace {

using nlohmann::json;

std::string fmt10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string emit(const json& doc) { return doc.dump(2) + "\n"; }

json info_error(const Error& e) {
  return json{{"error", to_string(e.code())}, {"message", e.what()}};
}

json state_json(const State& s) {
  json j;
  j["S"] = s.S;
  j["E"] = s.E;
  j["I"] = s.I;
  j["A"] = s.A;
  j["Q"] = s.Q;
  j["R"] = s.R;
  return j;
}

ModelKind kind_from_name(const std::string& name) {
  if (name == "long") return ModelKind::LongTerm;
  if (name == "limiting") return ModelKind::Limiting;
  if (name == "short") return ModelKind::ShortTerm;
  raise(ErrorCode::UsageError,
        "unknown model kind '" + name + "'; expected long, limiting or short");
}

ModelKind pick_kind(const std::string& name, const Params& params) {
  return name.empty() ? default_kind(params) : kind_from_name(name);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& field, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size() || !std::isfinite(v))
      throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    raise(ErrorCode::UsageError,
          context + ": '" + field + "' is not a finite number");
  }
}

Vector6 parse_state_csv(const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 6)
    raise(ErrorCode::UsageError,
          "--state needs six comma-separated values S,E,I,A,Q,R");
  Vector6 x;
  for (int i = 0; i < 6; ++i) x[i] = parse_double(parts[i], "--state");
  return x;
}

struct SweepSpec {
  std::string name;
  double lo = 0;
  double hi = 0;
  long steps = 0;
};

SweepSpec parse_sweep_spec(const std::string& text) {
  const std::vector<std::string> parts = split(text, ':');
  if (parts.size() != 4 || parts[0].empty())
    raise(ErrorCode::UsageError,
          "sweep spec '" + text + "' must look like name:lo:hi:steps");
  SweepSpec s;
  s.name = parts[0];
  s.lo = parse_double(parts[1], "sweep spec '" + text + "'");
  s.hi = parse_double(parts[2], "sweep spec '" + text + "'");
  try {
    std::size_t used = 0;
    s.steps = std::stol(parts[3], &used);
    if (used != parts[3].size()) throw std::invalid_argument(parts[3]);
  } catch (const std::exception&) {
    raise(ErrorCode::UsageError, "sweep spec '" + text +
                                     "' needs an integer step count, got '" +
                                     parts[3] + "'");
  }
  if (s.steps < 1)
    raise(ErrorCode::UsageError,
          "sweep spec '" + text + "' needs at least one step");
  return s;
}

// Endpoint-exact grid: the last point is hi itself, not lo + k*width.
double grid_value(const SweepSpec& s, long i) {
  if (s.steps == 1) return s.lo;
  if (i == s.steps - 1) return s.hi;
  return s.lo + static_cast<double>(i) * (s.hi - s.lo) /
                    static_cast<double>(s.steps - 1);
}

const Vector6& require_initial(const ParamsFile& pf, const char* why) {
  if (!pf.initial)
    raise(ErrorCode::InvalidParameter,
          std::string(why) + " needs an \"initial\" state in the params file");
  return *pf.initial;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"SEIAQR epidemic-model toolkit"};
  app.name("seiaqr");
  app.require_subcommand(1);

  const std::string kind_help = "model kind: long, limiting or short "
                                "(default: natural kind for the mode)";

  // --- rc ---------------------------------------------------------------
  std::string rc_params, rc_kind;
  double rc_s_tilde = -1, rc_n_total = -1;
  CLI::App* cmd_rc =
      app.add_subcommand("rc", "Control reproduction number");
  cmd_rc->add_option("--params", rc_params, "parameter JSON file")->required();
  cmd_rc->add_option("--kind", rc_kind, kind_help)
      ->check(CLI::IsMember({"long", "limiting", "short"}));
  cmd_rc->add_option("--s-tilde", rc_s_tilde,
                     "susceptible pool for the short-term factor");
  cmd_rc->add_option("--n-total", rc_n_total,
                     "total population for the short-term factor");

  // --- sensitivity --------------------------------------------------------
  std::string sn_params, sn_kind;
  CLI::App* cmd_sensitivity = app.add_subcommand(
      "sensitivity", "Elasticities of the reproduction number");
  cmd_sensitivity->add_option("--params", sn_params, "parameter JSON file")
      ->required();
  cmd_sensitivity->add_option("--kind", sn_kind, kind_help)
      ->check(CLI::IsMember({"long", "limiting", "short"}));

  // --- equilibria -----------------------------------------------------------
  std::string eq_params;
  double eq_theta = 0;
  CLI::App* cmd_equilibria = app.add_subcommand(
      "equilibria", "Disease-free and endemic equilibria");
  cmd_equilibria->add_option("--params", eq_params, "parameter JSON file")
      ->required();
  CLI::Option* eq_theta_opt = cmd_equilibria->add_option(
      "--theta", eq_theta,
      "persistence fraction in (0,1); adds susceptible lower bounds");

  // --- stability -----------------------------------------------------------
  std::string st_params, st_kind, st_at = "dfe", st_state;
  CLI::App* cmd_stability = app.add_subcommand(
      "stability", "Eigenvalue classification of an equilibrium");
  cmd_stability->add_option("--params", st_params, "parameter JSON file")
      ->required();
  cmd_stability->add_option("--at", st_at,
                            "which equilibrium: dfe, endemic or initial")
      ->check(CLI::IsMember({"dfe", "endemic", "initial"}));
  CLI::Option* st_state_opt = cmd_stability->add_option(
      "--state", st_state, "explicit state S,E,I,A,Q,R (overrides --at)");
  cmd_stability->add_option("--kind", st_kind, kind_help)
      ->check(CLI::IsMember({"long", "limiting", "short"}));

  // --- simulate --------------------------------------------------------------
  std::string sim_params, sim_kind, sim_method = "rk4", sim_format = "csv";
  std::string sim_out, sim_observation;
  double sim_t_end = 0, sim_stride = 1.0, sim_step = 0.05;
  double sim_rel_tol = 1e-8, sim_abs_tol = 1e-10;
  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "Integrate the model forward");
  cmd_simulate->add_option("--params", sim_params, "parameter JSON file")
      ->required();
  cmd_simulate->add_option("--t-end", sim_t_end, "horizon in days")
      ->required();
  cmd_simulate->add_option("--stride", sim_stride, "output spacing in days");
  cmd_simulate->add_option("--kind", sim_kind, kind_help)
      ->check(CLI::IsMember({"long", "limiting", "short"}));
  cmd_simulate->add_option("--method", sim_method, "integrator")
      ->check(CLI::IsMember({"rk4", "adaptive"}));
  cmd_simulate->add_option("--step", sim_step, "rk4 base step in days");
  cmd_simulate->add_option("--rel-tol", sim_rel_tol,
                           "adaptive relative tolerance");
  cmd_simulate->add_option("--abs-tol", sim_abs_tol,
                           "adaptive absolute tolerance");
  cmd_simulate->add_option("--format", sim_format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd_simulate->add_option("--out", sim_out,
                           "write the payload to this file instead of stdout");
  CLI::Option* sim_obs_opt = cmd_simulate->add_option(
      "--observation", sim_observation,
      "emit daily observed counts (all_incidence, symptomatic_incidence or "
      "detections) instead of the trajectory");

  // --- final-size ---------------------------------------------------------
  std::string fs_params;
  double fs_s_tilde = -1;
  CLI::App* cmd_final_size = app.add_subcommand(
      "final-size", "Outbreak final size of the closed-population model");
  cmd_final_size->add_option("--params", fs_params, "parameter JSON file")
      ->required();
  cmd_final_size->add_option("--s-tilde", fs_s_tilde,
                             "susceptible pool (default: whole population)");

  // --- critical-b -----------------------------------------------------------
  std::string cb_params, cb_kind;
  CLI::App* cmd_critical_b = app.add_subcommand(
      "critical-b", "Asymptomatic infectivity where d(rc)/d(1-p) flips sign");
  cmd_critical_b->add_option("--params", cb_params, "parameter JSON file")
      ->required();
  cmd_critical_b->add_option("--kind", cb_kind, kind_help)
      ->check(CLI::IsMember({"long", "limiting", "short"}));

  // --- fit ---------------------------------------------------------------
  std::string fit_config_path, fit_data_path;
  CLI::App* cmd_fit =
      app.add_subcommand("fit", "Least-squares calibration to daily counts");
  cmd_fit->add_option("--config", fit_config_path, "fit configuration JSON")
      ->required();
  cmd_fit->add_option("--data", fit_data_path, "observed series CSV")
      ->required();

  // --- sweep ---------------------------------------------------------------
  std::string sw_params, sw_kind, sw_quantity, sw_compartment;
  std::vector<std::string> sw_specs;
  double sw_t_end = 0, sw_stride = 1.0;
  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "Evaluate a quantity over a parameter grid (CSV)");
  cmd_sweep->add_option("--params", sw_params, "parameter JSON file")
      ->required();
  cmd_sweep
      ->add_option("--sweep", sw_specs,
                   "grid spec name:lo:hi:steps (repeatable); names are rate "
                   "constants or initial conditions like E0")
      ->required();
  cmd_sweep
      ->add_option("--quantity", sw_quantity, "what to evaluate per point")
      ->required()
      ->check(CLI::IsMember({"rc", "peak_day", "peak_value", "cum_sym",
                             "cum_asym", "final_size"}));
  cmd_sweep->add_option("--compartment", sw_compartment,
                        "compartment for peak quantities (E, I, A or Q)");
  CLI::Option* sw_t_end_opt =
      cmd_sweep->add_option("--t-end", sw_t_end,
                            "horizon in days for trajectory quantities");
  cmd_sweep->add_option("--stride", sw_stride, "output spacing in days");
  cmd_sweep->add_option("--kind", sw_kind, kind_help)
      ->check(CLI::IsMember({"long", "limiting", "short"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    err << "Run 'seiaqr --help' for usage.\n";
    return 2;
  }

  try {
    if (cmd_rc->parsed()) {
      const ParamsFile pf = load_params_file(rc_params);
      const ModelKind kind = pick_kind(rc_kind, pf.params);
      json doc;
      doc["rc"] = rc(pf.params, kind, rc_s_tilde, rc_n_total);
      doc["kind"] = to_string(kind);
      doc["mode"] = to_string(pf.params.mode);
      out << emit(doc);

    } else if (cmd_sensitivity->parsed()) {
      const ParamsFile pf = load_params_file(sn_params);
      const ModelKind kind = pick_kind(sn_kind, pf.params);
      json doc;
      doc["rc"] = rc(pf.params, kind);
      doc["critical_b"] = critical_b(pf.params, kind);
      doc["mode"] = to_string(pf.params.mode);
      json indices = json::array();
      for (const SensitivityEntry& entry :
           sensitivity_indices(pf.params, kind))
        indices.push_back(json{{"name", entry.name}, {"value", entry.value}});
      doc["indices"] = indices;
      out << emit(doc);

    } else if (cmd_equilibria->parsed()) {
      const ParamsFile pf = load_params_file(eq_params);
      const Params& p = pf.params;
      json doc;
      doc["mode"] = to_string(p.mode);
      doc["rc"] = rc(p, default_kind(p));
      if (p.mode == Mode::Long) {
        doc["disease_free"] = state_json(disease_free_long(p));
        try {
          doc["endemic"] = state_json(endemic_long(p));
        } catch (const Error& e) {
          // Below threshold there is nothing to report, but the
          // disease-free side of the answer is still useful.
          if (e.code() != ErrorCode::NoEndemicEquilibrium) throw;
          doc["endemic"] = info_error(e);
        }
      } else {
        // Closed population: every fully recovered-or-susceptible state is
        // stationary, and no endemic state exists at all.
        if (pf.initial) {
          State dfe;
          dfe.S = total_population(*pf.initial);
          doc["disease_free"] = state_json(dfe);
        } else {
          doc["disease_free"] =
              json{{"error", to_string(ErrorCode::InvalidParameter)},
                   {"message", "sizing the disease-free population needs an "
                               "\"initial\" state in the params file"}};
        }
        doc["endemic"] =
            json{{"error", to_string(ErrorCode::NoEndemicEquilibrium)},
                 {"message",
                  "a closed population cannot sustain an endemic state"}};
      }
      if (eq_theta_opt->count() > 0) {
        if (!(eq_theta > 0 && eq_theta < 1))
          raise(ErrorCode::InvalidTheta,
                "persistence fraction theta must lie strictly inside (0, 1), "
                "got " +
                    std::to_string(eq_theta));
        try {
          const PersistenceBounds b = persistence_bounds(p, eq_theta);
          json jb;
          jb["theta"] = b.theta;
          jb["s_star"] = b.s_star;
          jb["s_bar"] = b.s_bar;
          jb["s_breve"] = b.s_breve;
          doc["persistence"] = jb;
        } catch (const Error& e) {
          doc["persistence"] = info_error(e);
        }
      }
      out << emit(doc);

    } else if (cmd_stability->parsed()) {
      const ParamsFile pf = load_params_file(st_params);
      const ModelKind kind = pick_kind(st_kind, pf.params);
      Vector6 x;
      if (st_state_opt->count() > 0) {
        x = parse_state_csv(st_state);
      } else if (st_at == "endemic") {
        x = endemic_long(pf.params).vec();
      } else if (st_at == "initial") {
        x = require_initial(pf, "classifying the initial state");
      } else if (pf.params.mode == Mode::Long) {
        x = disease_free_long(pf.params).vec();
      } else {
        // Closed population: the fully susceptible state, sized by the
        // initial conditions.
        x = Vector6::Zero();
        x[0] = total_population(
            require_initial(pf, "the closed-population disease-free state"));
      }
      const EquilibriumReport rep = classify_stability(pf.params, kind, x);
      json doc;
      doc["kind"] = to_string(kind);
      doc["classification"] = to_string(rep.classification);
      doc["max_real_part"] = rep.max_real_part;
      json point = json::array();
      for (int i = 0; i < 6; ++i) point.push_back(rep.point[i]);
      doc["point"] = point;
      json eig = json::array();
      for (int i = 0; i < 6; ++i)
        eig.push_back(json::array(
            {rep.eigenvalues[i].real(), rep.eigenvalues[i].imag()}));
      doc["eigenvalues"] = eig;
      out << emit(doc);

    } else if (cmd_simulate->parsed()) {
      const ParamsFile pf = load_params_file(sim_params);
      const Vector6& x0 = require_initial(pf, "simulating");
      const ModelKind kind = pick_kind(sim_kind, pf.params);
      IntegrationOptions o;
      o.t_end = sim_t_end;
      o.output_stride = sim_stride;
      o.method =
          sim_method == "adaptive" ? Method::AdaptiveRK : Method::RK4Fixed;
      o.step = sim_step;
      o.rel_tol = sim_rel_tol;
      o.abs_tol = sim_abs_tol;
      const Trajectory traj = integrate(kind, pf.params, x0, o);

      std::string payload;
      if (sim_obs_opt->count() > 0) {
        const std::vector<double> series =
            observed_series(traj, observation_from_name(sim_observation));
        if (sim_format == "json") {
          json doc;
          json days = json::array(), values = json::array();
          for (std::size_t k = 0; k < series.size(); ++k) {
            days.push_back(k);
            values.push_back(series[k]);
          }
          doc["days"] = days;
          doc["values"] = values;
          doc["observation"] = sim_observation;
          payload = emit(doc);
        } else {
          payload = "day,value\n";
          for (std::size_t k = 0; k < series.size(); ++k)
            payload += std::to_string(k) + "," + fmt10(series[k]) + "\n";
        }
      } else if (sim_format == "json") {
        json doc;
        doc["kind"] = to_string(traj.kind);
        json times = json::array(), states = json::array();
        json cum_sym = json::array(), cum_asym = json::array();
        for (std::size_t k = 0; k < traj.size(); ++k) {
          times.push_back(traj.times[k]);
          json row = json::array();
          for (int i = 0; i < 6; ++i) row.push_back(traj.states[k][i]);
          states.push_back(row);
          cum_sym.push_back(traj.cum_symptomatic[k]);
          cum_asym.push_back(traj.cum_asymptomatic[k]);
        }
        doc["times"] = times;
        doc["states"] = states;
        doc["cum_symptomatic"] = cum_sym;
        doc["cum_asymptomatic"] = cum_asym;
        payload = emit(doc);
      } else {
        payload = trajectory_to_csv(traj);
      }

      if (!sim_out.empty()) {
        std::ofstream file(sim_out, std::ios::binary);
        if (!file)
          raise(ErrorCode::IoError, "cannot open '" + sim_out + "' to write");
        file << payload;
        file.close();
        if (!file)
          raise(ErrorCode::IoError, "failed writing '" + sim_out + "'");
      } else {
        out << payload;
      }

    } else if (cmd_final_size->parsed()) {
      const ParamsFile pf = load_params_file(fs_params);
      const Vector6& x0 = require_initial(pf, "the final-size relation");
      const FinalSizeResult r = solve_final_size(pf.params, x0, fs_s_tilde);
      json doc;
      doc["z"] = r.z;
      doc["s_infinity"] = r.s_infinity;
      doc["fraction"] = r.fraction;
      doc["total_ever_infected"] = r.total_ever_infected;
      doc["iterations"] = r.iterations;
      doc["residual"] = r.residual;
      out << emit(doc);

    } else if (cmd_critical_b->parsed()) {
      const ParamsFile pf = load_params_file(cb_params);
      const ModelKind kind = pick_kind(cb_kind, pf.params);
      json doc;
      doc["critical_b"] = critical_b(pf.params, kind);
      doc["kind"] = to_string(kind);
      doc["mode"] = to_string(pf.params.mode);
      out << emit(doc);

    } else if (cmd_fit->parsed()) {
      const FitConfig cfg = load_fit_config(fit_config_path);
      const ObservedSeries obs = load_series(fit_data_path);
      const FitResult result = fit(cfg, obs);
      out << fit_report_json(cfg, result);

    } else if (cmd_sweep->parsed()) {
      std::vector<SweepSpec> specs;
      for (const std::string& raw : sw_specs)
        specs.push_back(parse_sweep_spec(raw));

      const bool needs_peak =
          sw_quantity == "peak_day" || sw_quantity == "peak_value";
      const bool needs_traj = needs_peak || sw_quantity == "cum_sym" ||
                              sw_quantity == "cum_asym";
      if (needs_peak && sw_compartment.empty())
        raise(ErrorCode::UsageError,
              "--compartment is required for peak quantities");
      if (needs_traj && sw_t_end_opt->count() == 0)
        raise(ErrorCode::UsageError,
              "--t-end is required for trajectory quantities");

      const ParamsFile pf = load_params_file(sw_params);

      struct Target {
        bool is_initial = false;
        int index = 0;
      };
      std::vector<Target> targets;
      for (const SweepSpec& s : specs) {
        const int ri = detail::rate_index(s.name);
        const int ii = detail::initial_index(s.name);
        if (ri < 0 && ii < 0)
          raise(ErrorCode::UnknownParameter,
                "unknown sweep parameter '" + s.name + "'");
        targets.push_back(ri >= 0 ? Target{false, ri} : Target{true, ii});
      }

      const bool needs_initial =
          needs_traj || sw_quantity == "final_size" ||
          std::any_of(targets.begin(), targets.end(),
                      [](const Target& t) { return t.is_initial; });
      if (needs_initial) require_initial(pf, "this sweep");

      const Compartment comp = needs_peak
                                   ? compartment_from_name(sw_compartment)
                                   : Compartment::E;
      const ModelKind kind = pick_kind(sw_kind, pf.params);

      std::string csv;
      for (const SweepSpec& s : specs) csv += s.name + ",";
      csv += "value\n";

      long total = 1;
      for (const SweepSpec& s : specs) total *= s.steps;
      std::vector<long> idx(specs.size(), 0);

      for (long row = 0; row < total; ++row) {
        long rem = row;
        for (std::size_t i = specs.size(); i-- > 0;) {
          idx[i] = rem % specs[i].steps;
          rem /= specs[i].steps;
        }

        Params p2 = pf.params;
        Vector6 x2 = pf.initial ? *pf.initial : Vector6::Zero();
        std::string line;
        for (std::size_t i = 0; i < specs.size(); ++i) {
          const double value = grid_value(specs[i], idx[i]);
          if (targets[i].is_initial)
            x2[targets[i].index] = value;
          else
            detail::rate_field(p2, targets[i].index) = value;
          line += fmt10(value) + ",";
        }

        double quantity = 0;
        if (sw_quantity == "rc") {
          quantity = rc(p2, kind);
        } else if (sw_quantity == "final_size") {
          quantity = solve_final_size(p2, x2).z;
        } else {
          IntegrationOptions o;
          o.t_end = sw_t_end;
          o.output_stride = sw_stride;
          const Trajectory traj = integrate(kind, p2, x2, o);
          if (sw_quantity == "cum_sym") {
            quantity = traj.cum_symptomatic.back();
          } else if (sw_quantity == "cum_asym") {
            quantity = traj.cum_asymptomatic.back();
          } else {
            const PeakInfo pk = peak(traj, comp);
            quantity =
                sw_quantity == "peak_day" ? std::floor(pk.time) : pk.value;
          }
        }
        csv += line + fmt10(quantity) + "\n";
      }
      out << csv;
    }
    return 0;

  } catch (const Error& e) {
    if (e.code() == ErrorCode::UsageError) {
      err << e.what() << "\n";
      return 2;
    }
    json doc;
    doc["error"] = to_string(e.code());
    doc["message"] = e.what();
    out << emit(doc);
    return 1;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace seiaqr
