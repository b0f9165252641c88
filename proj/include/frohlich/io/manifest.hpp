#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "frohlich/core/config.hpp"
#include "frohlich/errors.hpp"
#include "frohlich/io/config_parser.hpp"
#include "frohlich/version.hpp"

namespace frohlich::io {

using json = nlohmann::json;

/// Raised when an output would overwrite an earlier run without permission.
class OutputConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json to_json(const SystemConfig& c) {
  json j;
  j["n_membranes"] = c.n_membranes;
  j["n_cavities"] = c.n_cavities;
  j["omega0"] = c.omega0;
  j["coupling_ratio"] = c.coupling_ratio;
  j["kappa"] = c.kappa;
  j["detuning"] = c.detuning;
  j["temperature"] = c.temperature;
  j["pump_rate"] = c.pump_rate;
  if (c.mass) j["mass"] = *c.mass;
  if (c.gamma) j["gamma"] = *c.gamma;
  if (c.quality_factor) j["quality_factor"] = *c.quality_factor;
  if (c.g0) j["g0"] = *c.g0;
  if (c.big_g) j["big_g"] = *c.big_g;
  if (c.drive) {
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, AlphaMagnitude>) {
            j["drive"] = {{"alpha_magnitude", d.value}};
          } else if constexpr (std::is_same_v<T, DriveStrength>) {
            j["drive"] = {{"drive_strength", d.value}};
          } else {
            j["drive"] = {{"input_power", d.watts}, {"wavelength", d.wavelength}};
          }
        },
        *c.drive);
  }
  return j;
}

inline json to_json(const RunOptions& r) {
  json j = json::object();
  if (r.rtol) j["rtol"] = *r.rtol;
  if (r.atol) j["atol"] = *r.atol;
  if (r.steady_tol) j["steady_tol"] = *r.steady_tol;
  if (r.method) j["method"] = *r.method;
  if (r.equation_form) j["equation_form"] = *r.equation_form;
  if (r.t_end) j["t_end"] = *r.t_end;
  if (r.samples) j["samples"] = *r.samples;
  if (!r.cutoffs.empty()) j["cutoffs"] = r.cutoffs;
  if (r.photon_cutoff) j["photon_cutoff"] = *r.photon_cutoff;
  if (r.trajectories) j["trajectories"] = *r.trajectories;
  if (r.window_start) j["window_start"] = *r.window_start;
  if (r.target_fraction) j["target_fraction"] = *r.target_fraction;
  return j;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Hash of a parameter document. Objects serialise with sorted keys and
/// numbers round-trip exactly, so the hash ignores key order in the input
/// and changes whenever any value does.
inline std::string parameter_hash(const json& params) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(params.dump());
  return os.str();
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Writes via a temporary file and rename, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + tmp + "'");
    f << content;
    if (!f) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

struct RunManifest {
  std::string command;
  json parameters;                  // resolved system, numerics and command arguments
  std::optional<std::uint64_t> seed;
  std::string source;               // config path or preset name, not hashed
  std::string started, finished;
  std::vector<std::string> outputs;
  std::string status = "running";   // running | ok | partial | failed
  std::string message;
  json summary = json::object();

  std::string hash() const { return parameter_hash(parameters); }

  json to_json() const {
    json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["config_hash"] = hash();
    j["seed"] = seed ? json(*seed) : json(nullptr);
    if (!source.empty()) j["source"] = source;
    j["code_version"] = version;
    j["started"] = started;
    j["finished"] = finished.empty() ? json(nullptr) : json(finished);
    j["outputs"] = outputs;
    j["status"] = status;
    if (!message.empty()) j["message"] = message;
    j["summary"] = summary;
    return j;
  }
};

/// Owns an output directory for one run: refuses to reuse a directory that
/// already holds a manifest or any planned output unless `force` is set,
/// writes the manifest before the run starts and again when it ends.
class RunDirectory {
 public:
  RunDirectory(std::filesystem::path dir, RunManifest manifest, std::vector<std::string> planned, bool force)
      : dir_(std::move(dir)), manifest_(std::move(manifest)) {
    std::filesystem::create_directories(dir_);
    planned.push_back(manifest_name);
    if (!force)
      for (const auto& f : planned)
        if (std::filesystem::exists(dir_ / f))
          throw OutputConflict("'" + (dir_ / f).string() + "' exists; rerun with --force to overwrite");
    manifest_.outputs.clear();
    manifest_.started = utc_timestamp();
    flush();
  }

  RunDirectory(const RunDirectory&) = delete;
  RunDirectory& operator=(const RunDirectory&) = delete;

  /// A run abandoned by an exception is recorded as failed.
  ~RunDirectory() {
    if (manifest_.status != "running") return;
    try {
      finish("failed", "aborted before completion; see the error output");
    } catch (...) {
    }
  }

  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    manifest_.outputs.push_back(name);
  }

  RunManifest& manifest() { return manifest_; }

  void finish(const std::string& status, const std::string& message = {}) {
    manifest_.status = status;
    manifest_.message = message;
    manifest_.finished = utc_timestamp();
    flush();
  }

  static constexpr const char* manifest_name = "manifest.json";

 private:
  void flush() { write_atomic(dir_ / manifest_name, manifest_.to_json().dump(2) + "\n"); }

  std::filesystem::path dir_;
  RunManifest manifest_;
};

}  // namespace frohlich::io
