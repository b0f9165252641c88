#pragma once

#include "frohlich/core/config.hpp"

// Parameter sets used across the test suite.
namespace testparams {

// Band regime: omega0 = 1e6, kappa = 1e5, gamma = 0.1, T = 0.3 K, k/m = omega0^2/10.
inline frohlich::SystemConfig band(int n, double g0_alpha, double detuning = -1e5) {
  frohlich::SystemConfig c;
  c.n_membranes = n;
  c.omega0 = 1e6;
  c.coupling_ratio = 1e11;
  c.kappa = 1e5;
  c.gamma = 0.1;
  c.detuning = detuning;
  c.g0 = 1.0;
  c.drive = frohlich::AlphaMagnitude{g0_alpha};
  c.temperature = 0.3;
  return c;
}

// Two membranes, omega0 = 1e8, k/m = omega0^2/3, T = 1 mK.
inline frohlich::SystemConfig pair(double g0_alpha) {
  frohlich::SystemConfig c;
  c.n_membranes = 2;
  c.omega0 = 1e8;
  c.coupling_ratio = 1e16 / 3.0;
  c.kappa = 1e6;
  c.gamma = 100.0;
  c.detuning = -c.coupling_ratio / c.omega0;
  c.g0 = 1.0;
  c.drive = frohlich::AlphaMagnitude{g0_alpha};
  c.temperature = 1e-3;
  return c;
}

// Five membranes, omega0 = 1e8, k/m = omega0^2/10, kappa = 1e6, gamma = 100, T = 0.4 K.
inline frohlich::SystemConfig chain5(double g0_alpha, double temperature = 0.4) {
  frohlich::SystemConfig c;
  c.n_membranes = 5;
  c.omega0 = 1e8;
  c.coupling_ratio = 1e15;
  c.kappa = 1e6;
  c.gamma = 100.0;
  c.detuning = -1e7;
  c.g0 = 1.0;
  c.drive = frohlich::AlphaMagnitude{g0_alpha};
  c.temperature = temperature;
  return c;
}

}  // namespace testparams
