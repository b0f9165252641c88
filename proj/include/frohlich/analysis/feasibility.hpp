#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frohlich/analysis/critical.hpp"
#include "frohlich/analysis/validity.hpp"
#include "frohlich/constants.hpp"
#include "frohlich/core/config.hpp"
#include "frohlich/core/mode_system.hpp"
#include "frohlich/errors.hpp"

namespace frohlich::analysis {

struct FeasibilityReport {
  double target_fraction = 0.0;
  double g0 = 0.0;               // rad/s
  double g0_alpha = 0.0;         // rad/s, from the critical-condition estimate
  double alpha = 0.0;            // |alpha|
  double drive = 0.0;            // E, rad/s
  double input_power = 0.0;      // W
  double amplitude = 0.0;        // m, sqrt(N kB T / (m omega_1^2))
  double wavelength = 0.0;       // m
  ValidityFlags validity;
  bool within_validity = false;
  std::string status;            // "within model validity" or "outside model validity"
};

/// Laser power needed for condensate fraction `a_target`: estimate g0|alpha|,
/// then |alpha| -> E -> P_in. Needs mass (for the amplitude and for g0 from G)
/// and the drive wavelength, taken from an input_power drive if present.
inline FeasibilityReport feasibility_report(const SystemConfig& cfg, double a_target, double wavelength = 0.0) {
  if (wavelength <= 0.0) {
    if (cfg.drive)
      if (const auto* p = std::get_if<InputPower>(&*cfg.drive)) wavelength = p->wavelength;
  }
  if (!(wavelength > 0.0)) throw ValidationError("feasibility needs the drive wavelength");
  if (!cfg.mass) throw ValidationError("feasibility needs the membrane mass");

  SystemConfig base = cfg;
  if (!base.drive) base.drive = AlphaMagnitude{0.0};
  const auto sys0 = build_mode_system(base);
  FeasibilityReport r;
  r.target_fraction = a_target;
  r.wavelength = wavelength;
  r.g0 = sys0.g0;
  if (!(r.g0 > 0.0)) throw ValidationError("feasibility needs a nonzero single-photon coupling");
  const auto est = critical_condition_estimate(sys0, a_target);
  r.g0_alpha = est.g0_alpha;
  r.alpha = r.g0_alpha / r.g0;
  r.drive = r.alpha * std::sqrt(0.25 * cfg.kappa * cfg.kappa + cfg.detuning * cfg.detuning);
  r.input_power = drive_to_power(r.drive, wavelength, cfg.kappa);
  const double w1 = sys0.frequencies.front();
  r.amplitude = std::sqrt(sys0.n_modes * constants::boltzmann * cfg.temperature / (*cfg.mass * w1 * w1));

  const auto sys = build_mode_system(with_coupling_product(base, r.g0_alpha));
  const Eigen::VectorXd thermal = Eigen::Map<const Eigen::VectorXd>(sys.thermal.data(), sys.n_modes);
  r.validity = validity_flags(sys, &thermal);
  r.within_validity = r.validity.ok();
  r.status = r.within_validity ? "within model validity" : "outside model validity";
  return r;
}

}  // namespace frohlich::analysis
