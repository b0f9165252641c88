#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "frohlich/constants.hpp"
#include "frohlich/core/config.hpp"
#include "frohlich/errors.hpp"

namespace frohlich::io {

/// Parse error tied to a line of the configuration text (0 when not line-specific).
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& source, int line, const std::string& msg)
      : ValidationError(format(source, line, msg)), line_(line) {}
  int line() const { return line_; }

 private:
  static std::string format(const std::string& source, int line, const std::string& msg) {
    std::ostringstream os;
    os << source;
    if (line > 0) os << ":" << line;
    os << ": " << msg;
    return os.str();
  }
  int line_;
};

/// Numerical options that may accompany a configuration; empty means "use the default".
struct RunOptions {
  std::optional<double> rtol;
  std::optional<double> atol;
  std::optional<double> steady_tol;
  std::optional<std::string> method;         // rosenbrock | dormand_prince
  std::optional<std::string> equation_form;  // full | simplified
  std::optional<double> t_end;               // s
  std::optional<int> samples;
  std::vector<int> cutoffs;
  std::optional<int> photon_cutoff;
  std::optional<int> trajectories;
  std::optional<double> window_start;        // s
  std::optional<double> target_fraction;
};

struct ParsedConfig {
  SystemConfig system;
  RunOptions run;
  std::optional<double> wavelength;  // m, also when no power is given
  std::string source;
};

namespace detail {

enum class Kind { count, number, frequency, frequency_sq, detuning, mass, temperature, power, length,
                  curvature, rate, time, int_list, text };

struct KeySpec {
  const char* section;
  const char* key;
  Kind kind;
  bool required;
};

inline const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = {
      {"array", "n_membranes", Kind::count, true},
      {"array", "omega0", Kind::frequency, true},
      {"array", "coupling_ratio", Kind::frequency_sq, true},
      {"array", "mass", Kind::mass, false},
      {"cavity", "kappa", Kind::frequency, true},
      {"cavity", "detuning", Kind::detuning, true},
      {"cavity", "n_cavities", Kind::count, false},
      {"cavity", "g0", Kind::frequency, false},
      {"cavity", "big_g", Kind::curvature, false},
      {"drive", "alpha_magnitude", Kind::number, false},
      {"drive", "g0_alpha", Kind::frequency, false},
      {"drive", "drive_strength", Kind::frequency, false},
      {"drive", "input_power", Kind::power, false},
      {"drive", "wavelength", Kind::length, false},
      {"bath", "gamma", Kind::frequency, false},
      {"bath", "quality_factor", Kind::number, false},
      {"bath", "temperature", Kind::temperature, true},
      {"bath", "pump_rate", Kind::rate, false},
      {"numerics", "rtol", Kind::number, false},
      {"numerics", "atol", Kind::number, false},
      {"numerics", "steady_tol", Kind::number, false},
      {"numerics", "method", Kind::text, false},
      {"numerics", "equation_form", Kind::text, false},
      {"numerics", "t_end", Kind::time, false},
      {"numerics", "samples", Kind::count, false},
      {"numerics", "cutoffs", Kind::int_list, false},
      {"numerics", "photon_cutoff", Kind::count, false},
      {"numerics", "trajectories", Kind::count, false},
      {"numerics", "window_start", Kind::time, false},
      {"numerics", "target_fraction", Kind::number, false},
  };
  return s;
}

inline const char* accepted_units(Kind k) {
  switch (k) {
    case Kind::frequency: return "rad/s, Hz, kHz, MHz, GHz, or a multiple of omega0 or kappa";
    case Kind::frequency_sq: return "(rad/s)^2 or a multiple of omega0^2";
    case Kind::detuning: return "rad/s, Hz, kHz, MHz, or a multiple of band (k/(m omega0)) or kappa";
    case Kind::mass: return "kg, g, mg, ug, ng, pg";
    case Kind::temperature: return "K, mK, uK";
    case Kind::power: return "W, mW, uW, nW";
    case Kind::length: return "m, mm, um, nm";
    case Kind::curvature: return "rad/s/m^2, Hz/nm^2, kHz/nm^2, MHz/nm^2";
    case Kind::rate: return "1/s or a multiple of gamma";
    case Kind::time: return "s, ms, us";
    default: return "no unit";
  }
}

struct Entry {
  std::string section;
  std::string raw;     // value text without the unit
  std::string unit;
  int line = 0;
  Kind kind = Kind::number;
};

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, const std::string& src, int line, const std::string& key) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v))
    throw ConfigError(src, line, "value of '" + key + "' is not a finite number: '" + text + "'");
  return v;
}

inline long long parse_integer(const std::string& text, const std::string& src, int line, const std::string& key) {
  long long v = 0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end)
    throw ConfigError(src, line, "value of '" + key + "' is not an integer: '" + text + "'");
  return v;
}

}  // namespace detail

/// Parses the INI-style configuration format:
///
///   [array]     n_membranes, omega0, coupling_ratio, mass
///   [cavity]    kappa, detuning, n_cavities, g0 | big_g
///   [drive]     alpha_magnitude | g0_alpha | drive_strength | input_power (+ wavelength)
///   [bath]      gamma | quality_factor, temperature, pump_rate
///   [numerics]  rtol, atol, steady_tol, method, equation_form, t_end, samples,
///               cutoffs, photon_cutoff, trajectories, window_start, target_fraction
///
/// Each dimensioned value carries a unit ("omega0 = 134 kHz", "detuning = -1 band").
/// Unknown keys, missing required keys and unit mismatches are reported with line numbers.
inline ParsedConfig parse_config_text(const std::string& text, const std::string& source = "<config>") {
  using namespace detail;
  std::map<std::string, Entry> entries;
  std::map<std::string, int> sections;
  std::string section;
  std::istringstream in(text);
  std::string raw_line;
  int lineno = 0;
  while (std::getline(in, raw_line)) {
    ++lineno;
    std::string_view l = raw_line;
    if (auto c = l.find_first_of("#;"); c != std::string_view::npos) l = l.substr(0, c);
    l = trim(l);
    if (l.empty()) continue;
    if (l.front() == '[') {
      if (l.back() != ']') throw ConfigError(source, lineno, "malformed section header");
      section = std::string(trim(l.substr(1, l.size() - 2)));
      bool known = false;
      for (const auto& k : schema()) known |= section == k.section;
      if (!known) throw ConfigError(source, lineno, "unknown section [" + section + "]");
      if (sections.count(section)) throw ConfigError(source, lineno, "duplicate section [" + section + "]");
      sections[section] = lineno;
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) throw ConfigError(source, lineno, "expected 'key = value'");
    const std::string key(trim(l.substr(0, eq)));
    const std::string_view value = trim(l.substr(eq + 1));
    if (section.empty()) throw ConfigError(source, lineno, "key '" + key + "' appears before any section");
    const KeySpec* spec = nullptr;
    for (const auto& k : schema())
      if (key == k.key) spec = &k;
    if (!spec) throw ConfigError(source, lineno, "unknown key '" + key + "'");
    if (section != spec->section)
      throw ConfigError(source, lineno,
                        "key '" + key + "' belongs in section [" + spec->section + "], not [" + section + "]");
    if (entries.count(key))
      throw ConfigError(source, lineno, "duplicate key '" + key + "' (first on line " +
                                            std::to_string(entries[key].line) + ")");
    if (value.empty()) throw ConfigError(source, lineno, "key '" + key + "' has no value");
    Entry e;
    e.section = section;
    e.line = lineno;
    e.kind = spec->kind;
    if (spec->kind == Kind::text || spec->kind == Kind::int_list) {
      e.raw = std::string(value);
    } else {
      const auto sp = value.find_first_of(" \t");
      e.raw = std::string(value.substr(0, sp));
      if (sp != std::string_view::npos) e.unit = std::string(trim(value.substr(sp)));
    }
    entries[key] = e;
  }
  for (const auto& k : schema())
    if (k.required && !entries.count(k.key)) {
      const auto s = sections.find(k.section);
      throw ConfigError(source, s == sections.end() ? 0 : s->second,
                        std::string("missing required key '") + k.key + "' in section [" + k.section + "]");
    }
  if (sections.count("drive")) {
    bool any = false;
    for (const auto& [k, e] : entries) any |= e.section == "drive";
    if (!any)
      throw ConfigError(source, sections["drive"],
                        "empty [drive] section: give one of alpha_magnitude (or g0_alpha), drive_strength, "
                        "or input_power with wavelength");
  }

  auto has = [&](const char* k) { return entries.count(k) > 0; };
  auto mismatch = [&](const std::string& key, const Entry& e) {
    return ConfigError(source, e.line,
                       "unit '" + e.unit + "' does not fit key '" + key + "' (accepted: " +
                           accepted_units(e.kind) + ")");
  };
  auto no_unit = [&](const std::string& key) {
    const Entry& e = entries.at(key);
    if (!e.unit.empty())
      throw ConfigError(source, e.line, "key '" + key + "' is dimensionless but has unit '" + e.unit + "'");
    return e;
  };
  auto number = [&](const std::string& key) {
    const Entry e = no_unit(key);
    return parse_double(e.raw, source, e.line, key);
  };
  auto count = [&](const std::string& key) {
    const Entry e = no_unit(key);
    const long long v = parse_integer(e.raw, source, e.line, key);
    if (v < 0 || v > 1'000'000'000) throw ConfigError(source, e.line, "value of '" + key + "' is out of range");
    return static_cast<int>(v);
  };
  // Values with units; relative units refer to already-resolved quantities.
  std::optional<double> omega0, kappa, band, gamma;
  auto quantity = [&](const std::string& key) -> double {
    const Entry& e = entries.at(key);
    const double v = parse_double(e.raw, source, e.line, key);
    const std::string& u = e.unit;
    if (u.empty())
      throw ConfigError(source, e.line, "key '" + key + "' needs a unit (accepted: " + accepted_units(e.kind) + ")");
    const double two_pi = 2.0 * constants::pi;
    auto freq = [&](double& out) {
      if (u == "rad/s") return out = v, true;
      if (u == "Hz") return out = v * two_pi, true;
      if (u == "kHz") return out = v * two_pi * 1e3, true;
      if (u == "MHz") return out = v * two_pi * 1e6, true;
      if (u == "GHz") return out = v * two_pi * 1e9, true;
      return false;
    };
    double out = 0.0;
    switch (e.kind) {
      case Kind::frequency:
        if (freq(out)) return out;
        if (u == "omega0" && omega0) return v * *omega0;
        if (u == "kappa" && kappa) return v * *kappa;
        break;
      case Kind::frequency_sq:
        if (u == "(rad/s)^2") return v;
        if (u == "omega0^2" && omega0) return v * *omega0 * *omega0;
        break;
      case Kind::detuning:
        if (freq(out)) return out;
        if (u == "band" && band) return v * *band;
        if (u == "kappa" && kappa) return v * *kappa;
        break;
      case Kind::mass:
        if (u == "kg") return v;
        if (u == "g") return v * 1e-3;
        if (u == "mg") return v * 1e-6;
        if (u == "ug") return v * 1e-9;
        if (u == "ng") return v * 1e-12;
        if (u == "pg") return v * 1e-15;
        break;
      case Kind::temperature:
        if (u == "K") return v;
        if (u == "mK") return v * 1e-3;
        if (u == "uK") return v * 1e-6;
        break;
      case Kind::power:
        if (u == "W") return v;
        if (u == "mW") return v * 1e-3;
        if (u == "uW") return v * 1e-6;
        if (u == "nW") return v * 1e-9;
        break;
      case Kind::length:
        if (u == "m") return v;
        if (u == "mm") return v * 1e-3;
        if (u == "um") return v * 1e-6;
        if (u == "nm") return v * 1e-9;
        break;
      case Kind::curvature:
        if (u == "rad/s/m^2") return v;
        if (u == "Hz/nm^2") return v * two_pi * 1e18;
        if (u == "kHz/nm^2") return v * two_pi * 1e21;
        if (u == "MHz/nm^2") return v * two_pi * 1e24;
        break;
      case Kind::rate:
        if (u == "1/s") return v;
        if (u == "gamma" && gamma) return v * *gamma;
        break;
      case Kind::time:
        if (u == "s") return v;
        if (u == "ms") return v * 1e-3;
        if (u == "us") return v * 1e-6;
        break;
      default:
        break;
    }
    throw mismatch(key, e);
  };

  ParsedConfig pc;
  pc.source = source;
  SystemConfig& c = pc.system;
  c.n_membranes = count("n_membranes");
  c.omega0 = quantity("omega0");
  omega0 = c.omega0;
  c.coupling_ratio = quantity("coupling_ratio");
  band = c.coupling_ratio / c.omega0;
  if (has("mass")) c.mass = quantity("mass");
  c.kappa = quantity("kappa");
  kappa = c.kappa;
  c.detuning = quantity("detuning");
  if (has("n_cavities")) c.n_cavities = count("n_cavities");
  if (has("g0")) c.g0 = quantity("g0");
  if (has("big_g")) c.big_g = quantity("big_g");
  if (has("gamma")) c.gamma = quantity("gamma");
  if (has("quality_factor")) c.quality_factor = number("quality_factor");
  if (c.gamma)
    gamma = c.gamma;
  else if (c.quality_factor && *c.quality_factor > 0.0)
    gamma = c.omega0 / *c.quality_factor;
  c.temperature = quantity("temperature");
  if (has("pump_rate")) c.pump_rate = quantity("pump_rate");

  if (has("wavelength")) pc.wavelength = quantity("wavelength");
  int drives = 0;
  for (const char* k : {"alpha_magnitude", "g0_alpha", "drive_strength", "input_power"}) drives += has(k);
  if (drives > 1) {
    int line = 0;
    for (const char* k : {"alpha_magnitude", "g0_alpha", "drive_strength", "input_power"})
      if (has(k)) line = std::max(line, entries[k].line);
    throw ConfigError(source, line, "give only one of alpha_magnitude, g0_alpha, drive_strength, input_power");
  }
  if (has("alpha_magnitude")) c.drive = AlphaMagnitude{number("alpha_magnitude")};
  if (has("drive_strength")) c.drive = DriveStrength{quantity("drive_strength")};
  if (has("input_power")) {
    if (!pc.wavelength)
      throw ConfigError(source, entries["input_power"].line, "input_power needs wavelength in [drive]");
    c.drive = InputPower{quantity("input_power"), *pc.wavelength};
  }
  if (has("g0_alpha")) {
    const double ga = quantity("g0_alpha");
    double g0 = 0.0;
    try {
      g0 = single_photon_coupling(c);
    } catch (const ValidationError& e) {
      throw ConfigError(source, entries["g0_alpha"].line, std::string("g0_alpha needs g0: ") + e.what());
    }
    if (!(g0 > 0.0)) throw ConfigError(source, entries["g0_alpha"].line, "g0_alpha needs a nonzero g0");
    c.drive = AlphaMagnitude{ga / g0};
  }

  RunOptions& r = pc.run;
  if (has("rtol")) r.rtol = number("rtol");
  if (has("atol")) r.atol = number("atol");
  if (has("steady_tol")) r.steady_tol = number("steady_tol");
  if (has("method")) {
    r.method = entries["method"].raw;
    if (*r.method != "rosenbrock" && *r.method != "dormand_prince")
      throw ConfigError(source, entries["method"].line, "method must be rosenbrock or dormand_prince");
  }
  if (has("equation_form")) {
    r.equation_form = entries["equation_form"].raw;
    if (*r.equation_form != "full" && *r.equation_form != "simplified")
      throw ConfigError(source, entries["equation_form"].line, "equation_form must be full or simplified");
  }
  if (has("t_end")) r.t_end = quantity("t_end");
  if (has("samples")) r.samples = count("samples");
  if (has("cutoffs")) {
    const Entry& e = entries["cutoffs"];
    std::istringstream ss(e.raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t(trim(item));
      const long long v = parse_integer(t, source, e.line, "cutoffs");
      if (v < 0 || v > 100000) throw ConfigError(source, e.line, "cutoff out of range: " + t);
      r.cutoffs.push_back(static_cast<int>(v));
    }
  }
  if (has("photon_cutoff")) r.photon_cutoff = count("photon_cutoff");
  if (has("trajectories")) r.trajectories = count("trajectories");
  if (has("window_start")) r.window_start = quantity("window_start");
  if (has("target_fraction")) r.target_fraction = number("target_fraction");

  // Structural checks with a line to point at; the rest is left to validate().
  if (!r.cutoffs.empty() && static_cast<int>(r.cutoffs.size()) != c.n_membranes)
    throw ConfigError(source, entries["cutoffs"].line, "cutoffs needs one entry per membrane");
  return pc;
}

inline ParsedConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read configuration file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace frohlich::io
