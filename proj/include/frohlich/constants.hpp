#pragma once

#include <numbers>

/// Physical constants (CODATA 2018, SI). Every frequency and rate in the
/// library is angular (rad/s).
namespace frohlich::constants {

inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double boltzmann = 1.380649e-23;        // J / K
inline constexpr double speed_of_light = 299792458.0;    // m / s
inline constexpr double pi = std::numbers::pi;

}  // namespace frohlich::constants
