#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace frohlich::ode {

struct StepControl {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0: pick automatically
  double min_step = 0.0;      // 0: relative to t (16 ulp)
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 10'000'000;
  bool dense_output = true;  // off saves memory for large states
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t jacobian_evaluations = 0;
};

/// Weighted RMS norm of an error estimate, the usual Hairer/Shampine scaling.
template <class S>
double scaled_error(const S& err, const S& y0, const S& y1, double rtol, double atol) {
  const auto scale = atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array();
  const double n = static_cast<double>(err.size());
  if (n == 0.0) return 0.0;
  return std::sqrt((err.cwiseAbs().array() / scale).square().sum() / n);
}

/// Starting step from the scaled sizes of y and y' (Hairer, Norsett & Wanner, II.4).
template <class S>
double initial_step_guess(const S& y, const S& dy, const StepControl& ctl) {
  const double d0 = scaled_error(y, y, y, ctl.rtol, ctl.atol);
  const double d1 = scaled_error(dy, y, y, ctl.rtol, ctl.atol);
  const double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  return std::min(h, ctl.max_step);
}

inline double min_step_at(double t, const StepControl& ctl) {
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
  return std::max(ctl.min_step, floor);
}

}  // namespace frohlich::ode
