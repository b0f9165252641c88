#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "frohlich/core/config.hpp"
#include "frohlich/core/rates.hpp"
#include "frohlich/core/spectrum.hpp"

namespace frohlich {

/// Every derived quantity the dynamics need, computed once from a SystemConfig.
/// Immutable after construction and safe to share between threads.
struct ModeSystem {
  int n_modes = 0;
  int n_cavities = 1;
  double omega0 = 0.0;
  double coupling_ratio = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double detuning = 0.0;
  double temperature = 0.0;
  double pump_rate = 0.0;
  double g0 = 0.0;
  std::complex<double> cavity_amplitude;

  std::vector<double> frequencies;  // ascending
  std::vector<double> thermal;      // Bose-Einstein occupation per mode
  Eigen::MatrixXd coupling;         // U_{i,j} of the first cavity
  Eigen::MatrixXd coupling_sq;      // U^2 (M = 1) or U~^2 (M > 1)
  std::vector<Eigen::MatrixXd> cavity_couplings;  // U_{k,i,j} per cavity k
  TransitionRate rate;

  double coupling_product() const { return g0 * std::abs(cavity_amplitude); }
  double total_thermal() const {
    double s = 0.0;
    for (double n : thermal) s += n;
    return s;
  }
  /// Mean thermal occupation (1/N) sum_l n_th,l.
  double mean_thermal() const { return total_thermal() / n_modes; }
};

inline ModeSystem build_mode_system(const SystemConfig& cfg) {
  validate(cfg);
  ModeSystem m;
  m.n_modes = cfg.n_membranes;
  m.n_cavities = cfg.n_cavities;
  m.omega0 = cfg.omega0;
  m.coupling_ratio = cfg.coupling_ratio;
  m.kappa = cfg.kappa;
  m.gamma = mechanical_damping(cfg);
  m.detuning = cfg.detuning;
  m.temperature = cfg.temperature;
  m.pump_rate = cfg.pump_rate;
  m.g0 = single_photon_coupling(cfg);
  m.cavity_amplitude = coherent_amplitude(cfg);

  m.frequencies = mode_frequencies(m.n_modes, m.omega0, m.coupling_ratio);
  m.thermal.reserve(m.frequencies.size());
  for (double w : m.frequencies) m.thermal.push_back(thermal_occupation(w, m.temperature));

  m.coupling = coupling_matrix(m.frequencies, m.omega0);
  for (int k = 1; k <= m.n_cavities; ++k) {
    Eigen::MatrixXd uk(m.n_modes, m.n_modes);
    for (int i = 1; i <= m.n_modes; ++i)
      for (int j = 1; j <= m.n_modes; ++j)
        uk(i - 1, j - 1) = cavity_mode_coupling(k, i, j, m.frequencies, m.omega0);
    m.cavity_couplings.push_back(std::move(uk));
  }
  m.coupling_sq = effective_coupling_squared(m.frequencies, m.omega0, m.n_cavities);
  m.rate = TransitionRate(m.coupling_product(), m.n_modes, m.kappa, m.detuning);
  return m;
}

}  // namespace frohlich
