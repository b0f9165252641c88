#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frohlich/analysis/contour.hpp"
#include "frohlich/analysis/critical.hpp"
#include "frohlich/analysis/feasibility.hpp"
#include "frohlich/analysis/scan.hpp"
#include "frohlich/core/mode_system.hpp"
#include "frohlich/errors.hpp"
#include "frohlich/io/config_parser.hpp"
#include "frohlich/io/csv.hpp"
#include "frohlich/io/manifest.hpp"
#include "frohlich/io/presets.hpp"
#include "frohlich/quantum/compare.hpp"
#include "frohlich/quantum/lindblad.hpp"
#include "frohlich/quantum/mcwf.hpp"
#include "frohlich/quantum/steady_state.hpp"
#include "frohlich/rate/integrate.hpp"
#include "frohlich/rate/observables.hpp"
#include "frohlich/rate/rate_model.hpp"

namespace frohlich::io {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_validation = 2,
  exit_solver = 3,
  exit_output_conflict = 4,
  exit_io = 5,
};

/// Parses "name=lo:hi:steps[,log]".
inline analysis::Axis parse_grid(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ValidationError("grid '" + spec + "' must look like axis=lo:hi:steps[,log]");
  const auto param = analysis::parse_scan_parameter(spec.substr(0, eq));
  std::string rest = spec.substr(eq + 1);
  bool log = false;
  if (const auto comma = rest.find(','); comma != std::string::npos) {
    const std::string flag = rest.substr(comma + 1);
    if (flag != "log") throw ValidationError("unknown grid flag '" + flag + "' (only 'log')");
    log = true;
    rest = rest.substr(0, comma);
  }
  std::vector<std::string> parts;
  std::istringstream ss(rest);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw ValidationError("grid '" + spec + "' must look like axis=lo:hi:steps[,log]");
  double lo = 0.0, hi = 0.0;
  int steps = 0;
  try {
    std::size_t pos = 0;
    lo = std::stod(parts[0], &pos);
    if (pos != parts[0].size()) throw std::invalid_argument("");
    hi = std::stod(parts[1], &pos);
    if (pos != parts[1].size()) throw std::invalid_argument("");
    steps = std::stoi(parts[2], &pos);
    if (pos != parts[2].size()) throw std::invalid_argument("");
  } catch (const std::logic_error&) {
    throw ValidationError("grid '" + spec + "' has a malformed number");
  }
  return log ? analysis::Axis::logspace(param, lo, hi, steps) : analysis::Axis::linear(param, lo, hi, steps);
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> v;
  std::istringstream ss(s);
  for (std::string p; std::getline(ss, p, ',');) {
    try {
      std::size_t pos = 0;
      v.push_back(std::stoi(p, &pos));
      if (pos != p.size()) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      throw ValidationError("'" + s + "' is not a comma-separated list of integers");
    }
  }
  return v;
}

namespace cli_detail {

struct Common {
  std::string config;
  std::string preset;
  std::string out = "out";
  bool force = false;
  std::optional<double> tol;
};

inline void add_common(CLI::App* sub, Common& c) {
  auto* cfg = sub->add_option("--config", c.config, "configuration file");
  auto* pre = sub->add_option("--preset", c.preset, "named example configuration");
  cfg->excludes(pre);
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_flag("--force", c.force, "overwrite an earlier run in the output directory");
  sub->add_option("--tol", c.tol, "relative tolerance for integration and steady states");
}

inline ParsedConfig load(const Common& c) {
  if (c.config.empty() && c.preset.empty()) throw ValidationError("give --config PATH or --preset NAME");
  ParsedConfig pc = c.preset.empty() ? parse_config(c.config) : load_preset(c.preset);
  if (c.tol) {
    if (!(*c.tol > 0.0)) throw ValidationError("--tol must be positive");
    pc.run.rtol = *c.tol;
    pc.run.steady_tol = *c.tol;
  }
  return pc;
}

inline rate::IntegrationOptions integration_options(const RunOptions& r) {
  rate::IntegrationOptions o;
  if (r.rtol) o.rtol = *r.rtol;
  if (r.atol) o.atol = *r.atol;
  if (r.method) o.method = *r.method == "dormand_prince" ? rate::Method::dormand_prince : rate::Method::rosenbrock;
  return o;
}

inline rate::SteadyStateOptions steady_options(const RunOptions& r) {
  rate::SteadyStateOptions o;
  o.integration = integration_options(r);
  if (r.steady_tol) o.tol = *r.steady_tol;
  return o;
}

inline rate::EquationForm form_of(const RunOptions& r) {
  return r.equation_form && *r.equation_form == "simplified" ? rate::EquationForm::simplified
                                                              : rate::EquationForm::full;
}

inline json parameters(const std::string& command, const ParsedConfig& pc, const json& args) {
  return json{{"command", command}, {"system", to_json(pc.system)}, {"numerics", to_json(pc.run)}, {"args", args}};
}

inline RunManifest manifest_for(const std::string& command, const ParsedConfig& pc, const json& args,
                                std::optional<std::uint64_t> seed = std::nullopt) {
  RunManifest m;
  m.command = command;
  m.parameters = parameters(command, pc, args);
  m.seed = seed;
  m.source = pc.source;
  return m;
}

inline json validity_json(const analysis::ValidityFlags& v) {
  json j{{"fast_cavity", v.fast_cavity},
         {"weak_coupling", v.weak_coupling},
         {"kappa_over_n_gamma", v.cavity_over_heating},
         {"kappa_over_g0_alpha", v.kappa_over_coupling},
         {"omega1_over_g0_alpha", v.omega_over_coupling},
         {"violations", v.violations()}};
  if (v.sidebands_negligible) j["sidebands_negligible"] = *v.sidebands_negligible;
  return j;
}

inline void warn_validity(const analysis::ValidityFlags& v, std::ostream& err) {
  for (const auto& s : v.violations()) err << "warning: outside model validity: " << s << "\n";
}

inline std::vector<double> sample_grid(double t_end, int samples) {
  if (samples < 2) throw ValidationError("need at least 2 samples");
  return rate::linear_samples(t_end, samples);
}

}  // namespace cli_detail

/// Entry point of the command-line tool; returns the process exit code.
inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Condensation of phonons in a membrane array driven by a cavity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version);

  Common common;
  std::optional<double> t_end;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> traj;
  std::string cutoffs_arg, fock_arg, model_arg = "reduced";
  std::optional<double> target;
  std::vector<std::string> grids;
  std::vector<double> contour_levels;
  bool with_tc = false;
  std::optional<double> window_start;

  auto* evolve = app.add_subcommand("evolve", "integrate the rate equations from the thermal state");
  auto* steady = app.add_subcommand("steady", "steady state of the rate equations");
  auto* mcwf = app.add_subcommand("mcwf", "quantum-jump trajectories of the master equation");
  auto* compare = app.add_subcommand("compare", "stochastic vs mean-field steady occupations");
  auto* critical = app.add_subcommand("critical", "smallest g0|alpha| reaching a target fraction");
  auto* scan = app.add_subcommand("scan", "steady-state sweep over one or two parameters");
  auto* feas = app.add_subcommand("feasibility", "laser power and amplitude estimate");
  for (auto* s : {evolve, steady, mcwf, compare, critical, scan, feas}) add_common(s, common);
  for (auto* s : {evolve, mcwf, compare}) {
    s->add_option("--t-end", t_end, "final time in seconds");
    s->add_option("--samples", samples, "number of output times");
  }
  for (auto* s : {mcwf, compare}) {
    s->add_option("--seed", seed, "64-bit seed (required)")->required();
    s->add_option("--traj", traj, "number of trajectories");
    s->add_option("--cutoffs", cutoffs_arg, "phonon Fock cutoffs, comma separated");
  }
  mcwf->add_option("--model", model_arg, "reduced or full")->check(CLI::IsMember({"reduced", "full"}));
  mcwf->add_option("--fock", fock_arg, "initial phonon Fock state (default: thermal)");
  compare->add_option("--window-start", window_start, "start of the averaging window in seconds");
  for (auto* s : {critical, feas}) s->add_option("--target", target, "target condensate fraction");
  scan->add_option("--grid", grids, "axis=lo:hi:steps[,log], once or twice")->required();
  scan->add_option("--contour", contour_levels, "fraction level for contour extraction (2-D scans)");
  scan->add_flag("--tc", with_tc, "also compute condensation times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    ParsedConfig pc = load(common);
    if (t_end) pc.run.t_end = *t_end;
    if (samples) pc.run.samples = *samples;
    if (traj) pc.run.trajectories = *traj;
    if (!cutoffs_arg.empty()) pc.run.cutoffs = parse_int_list(cutoffs_arg);
    if (target) pc.run.target_fraction = *target;
    if (window_start) pc.run.window_start = *window_start;
    const std::filesystem::path dir = common.out;

    if (*evolve) {
      const auto sys = build_mode_system(pc.system);
      const rate::RateModel m(sys, form_of(pc.run));
      const double te = pc.run.t_end.value_or(5.0 / sys.gamma);
      const auto times = sample_grid(te, pc.run.samples.value_or(201));
      RunDirectory rd(dir, manifest_for("evolve", pc, json::object()), {"trajectory.csv"}, common.force);
      const auto tr = rate::integrate(m, m.thermal(), te, times, integration_options(pc.run));
      auto h = mode_columns("n", sys.n_modes);
      h.insert(h.begin(), "t");
      h.emplace_back("n_total");
      h.emplace_back("fraction");
      CsvWriter w(h);
      for (std::size_t s = 0; s < tr.times.size(); ++s) {
        w.cell(tr.times[s]);
        for (int l = 0; l < sys.n_modes; ++l) w.cell(tr.states[s](l));
        const auto cf = rate::condensate_fraction(tr.states[s], m);
        w.cell(tr.states[s].sum()).cell(cf.fraction.value_or(std::nan(""))).end_row();
      }
      rd.write("trajectory.csv", w.str());
      const auto cf = rate::condensate_fraction(tr.states.back(), m);
      rd.manifest().summary = {{"final_fraction", cf.fraction.value_or(std::nan(""))},
                               {"steps", tr.stats.accepted},
                               {"clamped", tr.clamped}};
      rd.finish("ok");
      out << "evolve: t_end = " << te << " s, final fraction " << cf.fraction.value_or(std::nan("")) << "\n";
      return exit_ok;
    }

    if (*steady) {
      const auto sys = build_mode_system(pc.system);
      const rate::RateModel m(sys, form_of(pc.run));
      RunDirectory rd(dir, manifest_for("steady", pc, json::object()), {"steady.csv"}, common.force);
      const auto ss = rate::steady_state(m, steady_options(pc.run));
      const auto cf = rate::condensate_fraction(ss.occupations, m);
      const auto vf = analysis::validity_flags(sys, &ss.occupations);
      CsvWriter w({"mode", "omega", "n_thermal", "n_steady"});
      for (int l = 0; l < sys.n_modes; ++l)
        w.cell(l + 1).cell(sys.frequencies[l]).cell(sys.thermal[l]).cell(ss.occupations(l)).end_row();
      rd.write("steady.csv", w.str());
      const double baseline = sys.total_thermal() > 0.0 ? sys.thermal[cf.target_mode] / sys.total_thermal()
                                                          : std::nan("");
      rd.manifest().summary = {{"fraction", cf.fraction.value_or(std::nan(""))},
                               {"baseline", baseline},
                               {"target_mode", cf.target_mode + 1},
                               {"argmax_mode", cf.argmax_mode + 1},
                               {"n_total", ss.occupations.sum()},
                               {"branch", rate::to_string(ss.branch)},
                               {"residual", ss.residual},
                               {"validity", validity_json(vf)}};
      rd.finish("ok");
      warn_validity(vf, err);
      out << "steady: fraction in mode " << cf.target_mode + 1 << " = " << cf.fraction.value_or(std::nan(""))
          << " (thermal " << baseline << "), argmax mode " << cf.argmax_mode + 1 << "\n";
      return exit_ok;
    }

    if (*mcwf || *compare) {
      const auto sys = build_mode_system(pc.system);
      const bool is_compare = static_cast<bool>(*compare);
      const std::string cmd = is_compare ? "compare" : "mcwf";
      quantum::LindbladModel model;
      std::vector<int> cut = pc.run.cutoffs;
      json args{{"model", is_compare ? "reduced" : model_arg}};
      if (!fock_arg.empty()) args["fock"] = fock_arg;
      if (is_compare || model_arg == "reduced") {
        if (cut.empty()) {
          std::vector<int> start;
          for (double n : sys.thermal) start.push_back(std::max(3, static_cast<int>(std::ceil(3.0 * n)) + 2));
          cut = quantum::choose_cutoffs(sys, start).cutoffs;
          args["auto_cutoffs"] = cut;
        }
        quantum::ReducedModelOptions ro;
        ro.cutoffs = cut;
        model = quantum::build_reduced_lindblad(sys, ro);
      } else {
        if (cut.empty()) throw ValidationError("the full model needs --cutoffs");
        quantum::FullModelOptions fo;
        fo.phonon_cutoffs = cut;
        fo.photon_cutoff = pc.run.photon_cutoff.value_or(5);
        model = quantum::build_full_lindblad(sys, fo);
      }
      quantum::McwfOptions mo;
      mo.seed = seed;
      mo.n_traj = pc.run.trajectories.value_or(1000);
      mo.t_end = pc.run.t_end.value_or((is_compare ? 25.0 : 5.0) / sys.gamma);
      mo.sample_times = sample_grid(mo.t_end, pc.run.samples.value_or(201));
      if (!fock_arg.empty()) mo.initial_fock = parse_int_list(fock_arg);
      const std::string file = is_compare ? "compare.csv" : "mcwf.csv";
      RunDirectory rd(dir, manifest_for(cmd, pc, args, seed), {file}, common.force);
      const auto ens = quantum::mcwf_evolve(model, mo);
      json summary{{"trajectories", ens.n_traj},
                   {"total_jumps", ens.total_jumps()},
                   {"propagator", ens.propagator},
                   {"dimension", model.dimension()},
                   {"cutoffs", cut},
                   {"boundary_weight", std::vector<double>(ens.boundary_weight.data(),
                                                           ens.boundary_weight.data() + ens.boundary_weight.size())},
                   {"truncation_warning", ens.truncation_warning}};
      if (ens.truncation_warning)
        err << "warning: probability at the Fock cutoff exceeds " << mo.boundary_threshold
            << "; raise --cutoffs\n";
      if (!is_compare) {
        auto h = mode_columns("mean_n", sys.n_modes);
        const auto se = mode_columns("se_n", sys.n_modes);
        h.insert(h.end(), se.begin(), se.end());
        h.insert(h.begin(), "t");
        CsvWriter w(h);
        for (std::size_t s = 0; s < ens.times.size(); ++s) {
          const auto si = static_cast<Eigen::Index>(s);
          w.cell(ens.times[s]);
          for (int l = 0; l < sys.n_modes; ++l) w.cell(ens.mean(si, l));
          for (int l = 0; l < sys.n_modes; ++l) w.cell(ens.standard_error(si, l));
          w.end_row();
        }
        rd.write(file, w.str());
        rd.manifest().summary = summary;
        rd.finish("ok");
        out << "mcwf: " << ens.n_traj << " trajectories, " << ens.total_jumps() << " jumps\n";
        return exit_ok;
      }
      const double ws = pc.run.window_start.value_or(0.2 * mo.t_end);
      const auto wa = ens.window_average(ws, mo.t_end);
      const rate::RateModel rm(sys, form_of(pc.run));
      const auto de = rate::steady_state(rm, steady_options(pc.run));
      const auto d = quantum::compare_with_decorrelation(wa.mean, de.occupations);
      std::optional<Eigen::VectorXd> exact;
      try {
        exact = quantum::steady_state_populations(model).occupations;
      } catch (const SolverError&) {
      }
      CsvWriter w({"mode", "n_mcwf", "se_mcwf", "n_decorrelated", "D", "n_exact"});
      for (int l = 0; l < sys.n_modes; ++l) {
        w.cell(l + 1).cell(wa.mean(l)).cell(wa.standard_error(l)).cell(de.occupations(l));
        w.cell(d[l] ? *d[l] : std::nan("")).cell(exact ? (*exact)(l) : std::nan("")).end_row();
      }
      rd.write(file, w.str());
      const auto cf_mc = rate::condensate_fraction(wa.mean, sys.detuning);
      const auto cf_de = rate::condensate_fraction(de.occupations, sys.detuning);
      summary["window"] = {ws, mo.t_end};
      summary["fraction_mcwf"] = cf_mc.fraction.value_or(std::nan(""));
      summary["fraction_decorrelated"] = cf_de.fraction.value_or(std::nan(""));
      rd.manifest().summary = summary;
      rd.finish("ok");
      out << "compare: D_i =";
      for (const auto& x : d) out << " " << (x ? std::to_string(100.0 * *x) + "%" : std::string("n/a"));
      out << "; fraction " << cf_mc.fraction.value_or(std::nan("")) << " (mcwf) vs "
          << cf_de.fraction.value_or(std::nan("")) << " (decorrelated)\n";
      return exit_ok;
    }

    if (*critical) {
      const double a = pc.run.target_fraction.value_or(0.99);
      analysis::CriticalOptions co;
      co.form = form_of(pc.run);
      co.steady = steady_options(pc.run);
      RunDirectory rd(dir, manifest_for("critical", pc, json::object()), {"critical.csv"}, common.force);
      const auto r = analysis::critical_coupling(pc.system, a, co);
      std::optional<double> estimate;
      try {
        estimate = analysis::critical_condition_estimate(pc.system, a).g0_alpha;
      } catch (const ValidationError&) {
      }
      CsvWriter w({"quantity", "value", "unit"});
      w.cell(std::string("target_fraction")).cell(a).cell(std::string()).end_row();
      w.cell(std::string("baseline")).cell(r.baseline).cell(std::string()).end_row();
      w.cell(std::string("g0_alpha")).cell(r.g0_alpha.value_or(std::nan(""))).cell(std::string("rad/s")).end_row();
      w.cell(std::string("g0_alpha_over_kappa"))
          .cell(r.g0_alpha ? *r.g0_alpha / pc.system.kappa : std::nan(""))
          .cell(std::string())
          .end_row();
      w.cell(std::string("bracket_lower")).cell(r.lower).cell(std::string("rad/s")).end_row();
      w.cell(std::string("bracket_upper")).cell(r.upper).cell(std::string("rad/s")).end_row();
      w.cell(std::string("estimate")).cell(estimate.value_or(std::nan(""))).cell(std::string("rad/s")).end_row();
      w.cell(std::string("evaluations")).cell(r.evaluations).cell(std::string()).end_row();
      rd.write("critical.csv", w.str());
      rd.manifest().summary = {{"g0_alpha", r.g0_alpha ? json(*r.g0_alpha) : json(nullptr)},
                               {"evaluations", r.evaluations},
                               {"message", r.message}};
      if (!r.g0_alpha) {
        rd.finish("failed", r.message);
        err << "critical: " << r.message << "\n";
        return exit_solver;
      }
      rd.finish("ok");
      out << "critical: g0|alpha| = " << *r.g0_alpha << " rad/s (" << *r.g0_alpha / pc.system.kappa
          << " kappa) for fraction " << a << "\n";
      return exit_ok;
    }

    if (*scan) {
      if (grids.size() > 2) throw ValidationError("give --grid once or twice");
      std::vector<analysis::Axis> axes;
      for (const auto& g : grids) axes.push_back(parse_grid(g));
      if (!contour_levels.empty() && axes.size() != 2) throw ValidationError("--contour needs a 2-D scan");
      analysis::ScanOptions so;
      so.form = form_of(pc.run);
      so.steady = steady_options(pc.run);
      so.condensation_time = with_tc;
      std::vector<std::string> files{"scan.csv"};
      if (!contour_levels.empty()) files.emplace_back("contours.txt");
      json args{{"grid", grids}, {"tc", with_tc}, {"contours", contour_levels}};
      RunDirectory rd(dir, manifest_for("scan", pc, args), files, common.force);
      auto r = analysis::phase_scan(pc.system, axes, so);
      r.provenance = {rd.manifest().hash(), std::nullopt, version};
      rd.write("scan.csv", sweep_csv(r));
      if (!contour_levels.empty()) {
        std::vector<analysis::Contour> cs;
        for (double lv : contour_levels) cs.push_back(analysis::fraction_contour(r, lv));
        rd.write("contours.txt", contour_text(cs, r.axes[0].name(), r.axes[1].name()));
      }
      const auto failed = r.failures();
      rd.manifest().summary = {{"cells", r.cells.size()}, {"failed_cells", failed}};
      out << "scan: " << r.cells.size() << " cells, " << failed << " failed\n";
      if (failed > 0) {
        rd.finish("partial", std::to_string(failed) + " cell(s) failed; see the error column");
        return exit_solver;
      }
      rd.finish("ok");
      return exit_ok;
    }

    if (*feas) {
      const double a = pc.run.target_fraction.value_or(0.99);
      RunDirectory rd(dir, manifest_for("feasibility", pc, json::object()), {"feasibility.csv"}, common.force);
      const auto r = analysis::feasibility_report(pc.system, a, pc.wavelength.value_or(0.0));
      CsvWriter w({"quantity", "value", "unit"});
      auto row = [&](const char* k, double v, const char* u) {
        w.cell(std::string(k)).cell(v).cell(std::string(u)).end_row();
      };
      row("target_fraction", a, "");
      row("g0", r.g0, "rad/s");
      row("g0_alpha", r.g0_alpha, "rad/s");
      row("alpha", r.alpha, "");
      row("drive_strength", r.drive, "rad/s");
      row("input_power", r.input_power, "W");
      row("amplitude", r.amplitude, "m");
      rd.write("feasibility.csv", w.str());
      rd.manifest().summary = {{"input_power", r.input_power},
                               {"amplitude", r.amplitude},
                               {"alpha", r.alpha},
                               {"status", r.status},
                               {"validity", validity_json(r.validity)}};
      rd.finish("ok");
      warn_validity(r.validity, err);
      out << "feasibility: |alpha| = " << r.alpha << ", P_in = " << r.input_power << " W, amplitude = "
          << r.amplitude << " m (" << r.status << ")\n";
      return exit_ok;
    }
    return exit_usage;
  } catch (const OutputConflict& e) {
    err << "error: " << e.what() << "\n";
    return exit_output_conflict;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return exit_solver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_io;
  }
}

}  // namespace frohlich::io
