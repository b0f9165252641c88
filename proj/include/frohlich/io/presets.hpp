#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "frohlich/errors.hpp"
#include "frohlich/io/config_parser.hpp"

namespace frohlich::io {

struct Preset {
  const char* name;
  const char* text;
};

/// Named example configurations. configs/<name>.ini holds the same text.
inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> p = {
      {"fig3", R"INI(# Five membranes at 400 mK, red-detuned drive at g0|alpha| = 0.01 kappa.
[array]
n_membranes = 5
omega0 = 1e8 rad/s
coupling_ratio = 0.1 omega0^2

[cavity]
kappa = 1e6 rad/s
detuning = -1 band
g0 = 1 rad/s

[drive]
g0_alpha = 0.01 kappa

[bath]
gamma = 100 rad/s
temperature = 400 mK

[numerics]
t_end = 20 ms
samples = 201
)INI"},
      {"fig3-desk", R"INI(# The five-membrane stochastic comparison cooled to 1.5 mK so that converged
# Fock cutoffs stay small; coupling raised to keep a strong condensate.
[array]
n_membranes = 5
omega0 = 1e8 rad/s
coupling_ratio = 0.1 omega0^2

[cavity]
kappa = 1e6 rad/s
detuning = -1 band
g0 = 1 rad/s

[drive]
g0_alpha = 0.186 kappa

[bath]
gamma = 100 rad/s
temperature = 1.5 mK

[numerics]
cutoffs = 26, 9, 3, 3, 3
trajectories = 4000
t_end = 250 ms
window_start = 50 ms
samples = 201
)INI"},
      {"fig4", R"INI(# Five membranes in the band regime at 300 mK, g0|alpha| = 5e-5 kappa.
[array]
n_membranes = 5
omega0 = 1e6 rad/s
coupling_ratio = 0.1 omega0^2

[cavity]
kappa = 1e5 rad/s
detuning = -1 band
g0 = 1 rad/s

[drive]
g0_alpha = 5e-5 kappa

[bath]
gamma = 0.1 rad/s
temperature = 300 mK

[numerics]
target_fraction = 0.99
)INI"},
      {"fig7", R"INI(# Two membranes at 1 mK, small enough for the full optomechanical master equation.
[array]
n_membranes = 2
omega0 = 1e8 rad/s
coupling_ratio = 3.3333333333333333e15 (rad/s)^2

[cavity]
kappa = 1e6 rad/s
detuning = -1 band
g0 = 1 rad/s

[drive]
g0_alpha = 0.02 kappa

[bath]
gamma = 100 rad/s
temperature = 1 mK

[numerics]
cutoffs = 10, 10
photon_cutoff = 5
trajectories = 1000
t_end = 200 ms
window_start = 50 ms
samples = 151
)INI"},
      {"table1-row1", R"INI(# 1 mm x 1 mm x 50 nm silicon nitride membranes, five in one cavity.
[array]
n_membranes = 5
omega0 = 134 kHz
coupling_ratio = 0.1 omega0^2
mass = 40 ng

[cavity]
kappa = 3e5 rad/s
detuning = -1 band
big_g = 15 MHz/nm^2

[drive]
wavelength = 1064 nm

[bath]
quality_factor = 1.2e7
temperature = 300 mK

[numerics]
target_fraction = 0.99
)INI"},
      {"table1-row2", R"INI(# 100 um x 100 um x 50 nm membranes: ten times higher frequency, Q down by ten.
[array]
n_membranes = 5
omega0 = 1.34 MHz
coupling_ratio = 0.1 omega0^2
mass = 400 pg

[cavity]
kappa = 3e5 rad/s
detuning = -1 band
big_g = 15 MHz/nm^2

[drive]
wavelength = 1064 nm

[bath]
quality_factor = 1.2e6
temperature = 300 mK

[numerics]
target_fraction = 0.99
)INI"},
  };
  return p;
}

inline const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (name == p.name) return p;
  std::string known;
  for (const auto& p : presets()) known += std::string(known.empty() ? "" : ", ") + p.name;
  throw ValidationError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

inline ParsedConfig load_preset(std::string_view name) {
  const Preset& p = find_preset(name);
  return parse_config_text(p.text, std::string("preset:") + p.name);
}

}  // namespace frohlich::io
