#pragma once

#include <cmath>
#include <complex>

#include "frohlich/constants.hpp"

namespace frohlich {

/// Bose-Einstein occupation 1/(exp(hbar omega / kB T) - 1); zero at T = 0.
inline double thermal_occupation(double omega, double temperature) {
  if (temperature <= 0.0) return 0.0;
  const double x = constants::hbar * omega / (constants::boltzmann * temperature);
  return 1.0 / std::expm1(x);
}

/// High-temperature limit kB T / (hbar omega).
inline double thermal_occupation_classical(double omega, double temperature) {
  return constants::boltzmann * temperature / (constants::hbar * omega);
}

/// Photon-number spectral density S_nn(omega) = 4 kappa |alpha|^2 / (4 (omega + Delta)^2 + kappa^2).
inline double photon_spectral_density(double omega, double kappa, double detuning, double alpha_sq) {
  const double shifted = omega + detuning;
  return 4.0 * kappa * alpha_sq / (4.0 * shifted * shifted + kappa * kappa);
}

/// Cavity-mediated transition rate Gamma(omega) = [4 g0^2 / (N+1)^2] S_nn(omega),
/// a Lorentzian centred at -Delta with full width kappa. Positive omega is energy
/// removed from the mechanics.
class TransitionRate {
 public:
  TransitionRate() = default;
  TransitionRate(double coupling_product, int n_modes, double kappa, double detuning)
      : kappa_(kappa), detuning_(detuning) {
    const double eps = 2.0 * coupling_product / (n_modes + 1);
    strength_ = eps * eps;  // epsilon^2 |alpha|^2
  }

  double operator()(double omega) const {
    const double shifted = omega + detuning_;
    return strength_ * 4.0 * kappa_ / (4.0 * shifted * shifted + kappa_ * kappa_);
  }

  /// G(omega) = eps^2 |alpha|^2 / (-i (Delta + omega) + kappa/2); Gamma = 2 Re G.
  std::complex<double> correlation(double omega) const {
    using namespace std::complex_literals;
    return strength_ / (-1.0i * (detuning_ + omega) + 0.5 * kappa_);
  }

  /// Coherent energy shift Im G(omega).
  double energy_shift(double omega) const { return correlation(omega).imag(); }

  double peak() const { return (*this)(-detuning_); }
  double kappa() const { return kappa_; }
  double detuning() const { return detuning_; }
  double strength() const { return strength_; }

 private:
  double strength_ = 0.0;
  double kappa_ = 1.0;
  double detuning_ = 0.0;
};

}  // namespace frohlich
