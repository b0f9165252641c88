#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "frohlich/analysis/validity.hpp"
#include "frohlich/core/config.hpp"
#include "frohlich/core/mode_system.hpp"
#include "frohlich/errors.hpp"
#include "frohlich/parallel.hpp"
#include "frohlich/rate/integrate.hpp"
#include "frohlich/rate/observables.hpp"
#include "frohlich/rate/rate_model.hpp"

namespace frohlich::analysis {

enum class ScanParameter { coupling, temperature, pump_rate, detuning };

inline const char* to_string(ScanParameter p) {
  switch (p) {
    case ScanParameter::coupling: return "g0_alpha";
    case ScanParameter::temperature: return "temperature";
    case ScanParameter::pump_rate: return "pump_rate";
    case ScanParameter::detuning: return "detuning";
  }
  return "?";
}

inline const char* units_of(ScanParameter p) {
  switch (p) {
    case ScanParameter::coupling: return "rad/s";
    case ScanParameter::temperature: return "K";
    case ScanParameter::pump_rate: return "1/s";
    case ScanParameter::detuning: return "rad/s";
  }
  return "";
}

inline ScanParameter parse_scan_parameter(const std::string& name) {
  if (name == "g0_alpha") return ScanParameter::coupling;
  if (name == "temperature") return ScanParameter::temperature;
  if (name == "pump_rate") return ScanParameter::pump_rate;
  if (name == "detuning") return ScanParameter::detuning;
  throw ValidationError("unknown scan axis '" + name +
                        "' (expected g0_alpha, temperature, pump_rate or detuning)");
}

struct Axis {
  ScanParameter parameter = ScanParameter::coupling;
  std::vector<double> values;  // strictly monotone
  bool logarithmic = false;

  std::string name() const { return to_string(parameter); }
  std::string units() const { return units_of(parameter); }

  static Axis linear(ScanParameter p, double lo, double hi, int steps) {
    if (steps < 2) throw ValidationError("an axis needs at least 2 steps");
    Axis a;
    a.parameter = p;
    for (int i = 0; i < steps; ++i) a.values.push_back(lo + (hi - lo) * i / (steps - 1));
    a.check();
    return a;
  }

  static Axis logspace(ScanParameter p, double lo, double hi, int steps) {
    if (steps < 2) throw ValidationError("an axis needs at least 2 steps");
    if (!(lo > 0.0 && hi > 0.0)) throw ValidationError("a logarithmic axis needs positive bounds");
    Axis a;
    a.parameter = p;
    a.logarithmic = true;
    for (int i = 0; i < steps; ++i)
      a.values.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (steps - 1)));
    a.values.front() = lo;
    a.values.back() = hi;
    a.check();
    return a;
  }

  void check() const {
    if (values.size() < 2) throw ValidationError("an axis needs at least 2 values");
    const bool up = values[1] > values[0];
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(up ? values[i] > values[i - 1] : values[i] < values[i - 1]))
        throw ValidationError("axis '" + name() + "' is not strictly monotone");
  }
};

inline SystemConfig apply(SystemConfig cfg, ScanParameter p, double value) {
  switch (p) {
    case ScanParameter::coupling: return with_coupling_product(std::move(cfg), value);
    case ScanParameter::temperature: cfg.temperature = value; break;
    case ScanParameter::pump_rate: cfg.pump_rate = value; break;
    case ScanParameter::detuning: {
      // Keep |alpha| fixed: the scan is at constant g0|alpha|.
      const double g = coupling_product(cfg);
      cfg.detuning = value;
      if (single_photon_coupling(cfg) > 0.0) cfg = with_coupling_product(std::move(cfg), g);
      break;
    }
  }
  return cfg;
}

struct CellResult {
  bool ok = false;
  std::string error;  // set when !ok
  double fraction = std::numeric_limits<double>::quiet_NaN();
  double total = std::numeric_limits<double>::quiet_NaN();
  double baseline = std::numeric_limits<double>::quiet_NaN();
  int target_mode = 0;
  int argmax_mode = -1;
  std::optional<double> condensation_time;
  ValidityFlags validity;
  std::string branch;
  double residual = 0.0;
};

struct Provenance {
  std::string config_hash;
  std::optional<std::uint64_t> seed;
  std::string code_version;
};

struct SweepResult {
  std::vector<Axis> axes;        // 1 or 2
  std::vector<CellResult> cells; // first axis varies slowest
  Provenance provenance;

  std::size_t index(std::size_t i, std::size_t j = 0) const {
    return axes.size() == 1 ? i : i * axes[1].values.size() + j;
  }
  const CellResult& cell(std::size_t i, std::size_t j = 0) const { return cells.at(index(i, j)); }
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += !c.ok;
    return n;
  }
};

struct ScanOptions {
  rate::EquationForm form = rate::EquationForm::full;
  rate::SteadyStateOptions steady;
  bool condensation_time = false;  // multiplies the cost; off unless asked for
  double condensation_threshold = 0.9;
  unsigned workers = 0;            // 0: FROHLICH_WORKERS or hardware
};

inline CellResult evaluate_cell(const SystemConfig& cfg, const ScanOptions& opt) {
  CellResult c;
  try {
    const auto sys = build_mode_system(cfg);
    const rate::RateModel m(sys, opt.form);
    const auto ss = rate::steady_state(m, opt.steady);
    const auto cf = rate::condensate_fraction(ss.occupations, m);
    c.total = ss.occupations.sum();
    c.target_mode = cf.target_mode;
    c.argmax_mode = cf.argmax_mode;
    if (cf.fraction) c.fraction = *cf.fraction;
    const double th = sys.total_thermal();
    if (th > 0.0) c.baseline = sys.thermal[static_cast<std::size_t>(cf.target_mode)] / th;
    c.validity = validity_flags(sys, &ss.occupations);
    c.branch = rate::to_string(ss.branch);
    c.residual = ss.residual;
    if (opt.condensation_time)
      c.condensation_time = rate::condensation_time(m, opt.condensation_threshold, opt.steady).time;
    c.ok = true;
  } catch (const std::exception& e) {
    c.ok = false;
    c.error = e.what();
  }
  return c;
}

/// Steady-state observables on a 1-D or 2-D grid. Cells are independent and
/// solved on a worker pool; a failing cell is recorded, not fatal.
inline SweepResult phase_scan(const SystemConfig& cfg, std::vector<Axis> axes, const ScanOptions& opt = {}) {
  if (axes.empty() || axes.size() > 2) throw ValidationError("a scan needs one or two axes");
  for (const auto& a : axes) a.check();
  if (axes.size() == 2 && axes[0].parameter == axes[1].parameter)
    throw ValidationError("scan axes must be different parameters");
  validate(cfg);
  SweepResult r;
  r.axes = std::move(axes);
  const std::size_t n0 = r.axes[0].values.size();
  const std::size_t n1 = r.axes.size() == 2 ? r.axes[1].values.size() : 1;
  r.cells.resize(n0 * n1);
  parallel_for(r.cells.size(), opt.workers ? opt.workers : worker_count(), [&](std::size_t k) {
    const std::size_t i = k / n1, j = k % n1;
    SystemConfig c = cfg;
    try {
      c = apply(c, r.axes[0].parameter, r.axes[0].values[i]);
      if (r.axes.size() == 2) c = apply(c, r.axes[1].parameter, r.axes[1].values[j]);
      validate(c);
    } catch (const std::exception& e) {
      r.cells[k].error = e.what();
      return;
    }
    r.cells[k] = evaluate_cell(c, opt);
  });
  return r;
}

inline SweepResult phase_scan_1d(const SystemConfig& cfg, Axis axis, const ScanOptions& opt = {}) {
  return phase_scan(cfg, {std::move(axis)}, opt);
}

inline SweepResult phase_scan_2d(const SystemConfig& cfg, Axis first, Axis second, const ScanOptions& opt = {}) {
  return phase_scan(cfg, {std::move(first), std::move(second)}, opt);
}

}  // namespace frohlich::analysis
