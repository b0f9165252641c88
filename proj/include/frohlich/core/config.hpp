#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "frohlich/constants.hpp"
#include "frohlich/errors.hpp"

namespace frohlich {

/// Cavity drive given directly as the coherent amplitude |alpha| (dimensionless).
struct AlphaMagnitude {
  double value = 0.0;
};

/// Cavity drive given as the drive strength E (rad/s).
struct DriveStrength {
  double value = 0.0;
};

/// Cavity drive given as input laser power and wavelength.
struct InputPower {
  double watts = 0.0;
  double wavelength = 0.0;  // m
};

using DriveSpec = std::variant<AlphaMagnitude, DriveStrength, InputPower>;

/// Physical parameters of the membrane array, the cavity (or cavities), the
/// drive and the baths. All frequencies and rates are angular (rad/s).
///
/// Alternatives that must be given exactly once: `gamma` or `quality_factor`,
/// `g0` or `big_g` (the latter needs `mass`), and one `drive` form.
struct SystemConfig {
  int n_membranes = 1;
  double omega0 = 0.0;          // sqrt(k0/m)
  double coupling_ratio = 0.0;  // k/m, (rad/s)^2
  std::optional<double> mass;   // kg
  double kappa = 0.0;
  std::optional<double> gamma;
  std::optional<double> quality_factor;
  double detuning = 0.0;         // drive minus cavity frequency
  std::optional<double> g0;      // single-photon quadratic coupling
  std::optional<double> big_g;   // cavity frequency curvature, rad/s per m^2
  std::optional<DriveSpec> drive;
  double temperature = 0.0;  // K
  double pump_rate = 0.0;    // incoherent phonon pumping per mode
  int n_cavities = 1;
};

inline double drive_frequency(double wavelength) {
  if (!(wavelength > 0.0)) throw ValidationError("drive wavelength must be positive");
  return 2.0 * constants::pi * constants::speed_of_light / wavelength;
}

/// E = sqrt(kappa P / (hbar omega_d)).
inline double power_to_drive(double watts, double wavelength, double kappa) {
  if (watts < 0.0) throw ValidationError("input power must be non-negative");
  return std::sqrt(kappa * watts / (constants::hbar * drive_frequency(wavelength)));
}

/// Inverse of power_to_drive: P = hbar omega_d E^2 / kappa.
inline double drive_to_power(double drive, double wavelength, double kappa) {
  return constants::hbar * drive_frequency(wavelength) * drive * drive / kappa;
}

/// Steady coherent cavity amplitude alpha = -iE / (kappa/2 - i Delta).
inline std::complex<double> coherent_amplitude(double drive, double kappa, double detuning) {
  using namespace std::complex_literals;
  return -1.0i * drive / (0.5 * kappa - 1.0i * detuning);
}

inline double zero_point_length(double mass, double omega0) {
  return std::sqrt(constants::hbar / (2.0 * mass * omega0));
}

namespace detail {

inline bool positive(double x) { return std::isfinite(x) && x > 0.0; }
inline bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace detail

/// Collects every violated invariant and throws one ValidationError listing them.
inline void validate(const SystemConfig& cfg) {
  using detail::non_negative;
  using detail::positive;
  std::vector<std::string> problems;
  auto require = [&](bool ok, const char* msg) {
    if (!ok) problems.emplace_back(msg);
  };

  require(cfg.n_membranes >= 1, "n_membranes must be >= 1");
  require(cfg.n_cavities >= 1 && cfg.n_cavities <= cfg.n_membranes,
          "n_cavities must satisfy 1 <= M <= N");
  require(positive(cfg.omega0), "omega0 must be positive");
  require(positive(cfg.coupling_ratio), "coupling_ratio (k/m) must be positive");
  if (positive(cfg.omega0) && positive(cfg.coupling_ratio))
    require(cfg.coupling_ratio < 0.5 * cfg.omega0 * cfg.omega0,
            "coupling_ratio must be below omega0^2/2 so every mode frequency is real");
  require(positive(cfg.kappa), "kappa must be positive");
  require(std::isfinite(cfg.detuning), "detuning must be finite");
  require(non_negative(cfg.temperature), "temperature must be non-negative");
  require(non_negative(cfg.pump_rate), "pump_rate must be non-negative");
  if (cfg.mass) require(positive(*cfg.mass), "mass must be positive");

  require(cfg.gamma.has_value() != cfg.quality_factor.has_value(),
          "exactly one of gamma or quality_factor must be given");
  if (cfg.gamma) require(positive(*cfg.gamma), "gamma must be positive");
  if (cfg.quality_factor) require(positive(*cfg.quality_factor), "quality_factor must be positive");

  require(cfg.g0.has_value() != cfg.big_g.has_value(), "exactly one of g0 or big_g must be given");
  if (cfg.g0) require(non_negative(*cfg.g0), "g0 must be non-negative");
  if (cfg.big_g) {
    require(non_negative(*cfg.big_g), "big_g must be non-negative");
    require(cfg.mass.has_value(), "big_g needs mass to form g0 = G x0^2");
  }

  if (!cfg.drive) {
    problems.emplace_back(
        "a drive must be given as one of alpha_magnitude, drive_strength, or input_power + "
        "wavelength");
  } else if (auto* a = std::get_if<AlphaMagnitude>(&*cfg.drive)) {
    require(non_negative(a->value), "alpha_magnitude must be non-negative");
  } else if (auto* e = std::get_if<DriveStrength>(&*cfg.drive)) {
    require(non_negative(e->value), "drive_strength must be non-negative");
  } else if (auto* p = std::get_if<InputPower>(&*cfg.drive)) {
    require(non_negative(p->watts), "input_power must be non-negative");
    require(positive(p->wavelength), "wavelength must be positive");
  }

  if (!problems.empty()) {
    std::ostringstream os;
    os << "invalid system configuration:";
    for (const auto& p : problems) os << "\n  - " << p;
    throw ValidationError(os.str());
  }
}

inline double mechanical_damping(const SystemConfig& cfg) {
  if (cfg.gamma) return *cfg.gamma;
  if (cfg.quality_factor) return cfg.omega0 / *cfg.quality_factor;
  throw ValidationError("neither gamma nor quality_factor is set");
}

inline double single_photon_coupling(const SystemConfig& cfg) {
  if (cfg.g0) return *cfg.g0;
  if (cfg.big_g && cfg.mass) {
    const double x0 = zero_point_length(*cfg.mass, cfg.omega0);
    return *cfg.big_g * x0 * x0;
  }
  throw ValidationError("neither g0 nor big_g (with mass) is set");
}

/// Drive strength E for whichever drive form the configuration carries.
inline double drive_strength(const SystemConfig& cfg) {
  if (!cfg.drive) throw ValidationError("no drive specified");
  const double lorentz = std::sqrt(0.25 * cfg.kappa * cfg.kappa + cfg.detuning * cfg.detuning);
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, AlphaMagnitude>) {
          return d.value * lorentz;
        } else if constexpr (std::is_same_v<T, DriveStrength>) {
          return d.value;
        } else {
          return power_to_drive(d.watts, d.wavelength, cfg.kappa);
        }
      },
      *cfg.drive);
}

inline std::complex<double> coherent_amplitude(const SystemConfig& cfg) {
  return coherent_amplitude(drive_strength(cfg), cfg.kappa, cfg.detuning);
}

/// The effective optomechanical coupling g0 |alpha| that sets every transition rate.
inline double coupling_product(const SystemConfig& cfg) {
  return single_photon_coupling(cfg) * std::abs(coherent_amplitude(cfg));
}

/// Returns a copy whose drive yields the requested g0 |alpha|.
inline SystemConfig with_coupling_product(SystemConfig cfg, double g0_alpha) {
  const double g0 = single_photon_coupling(cfg);
  if (!(g0 > 0.0)) throw ValidationError("cannot set g0|alpha| when g0 is zero");
  if (!(g0_alpha >= 0.0)) throw ValidationError("g0|alpha| must be non-negative");
  cfg.drive = AlphaMagnitude{g0_alpha / g0};
  return cfg;
}

/// k/(m omega0): the half-width of the phonon band, a natural scale for |detuning|.
inline double band_detuning(const SystemConfig& cfg) { return cfg.coupling_ratio / cfg.omega0; }

}  // namespace frohlich
