#pragma once

#include <optional>

#include <Eigen/Dense>

#include "frohlich/rate/rate_model.hpp"

namespace frohlich::rate {

struct CondensateFraction {
  std::optional<double> fraction;  // empty when the total phonon number is zero
  int target_mode = 0;             // 0-based: lowest mode for Delta <= 0, highest for Delta > 0
  int argmax_mode = 0;             // 0-based mode with the largest occupation
};

/// a = <n_target>/<N_tot>, where the target is the lowest mode on the red side
/// and the highest on the blue side.
inline CondensateFraction condensate_fraction(const Eigen::VectorXd& n, double detuning) {
  CondensateFraction c;
  c.target_mode = detuning > 0.0 ? static_cast<int>(n.size()) - 1 : 0;
  Eigen::Index arg = 0;
  n.maxCoeff(&arg);
  c.argmax_mode = static_cast<int>(arg);
  const double total = n.sum();
  if (total > 0.0) c.fraction = n(c.target_mode) / total;
  return c;
}

inline CondensateFraction condensate_fraction(const Eigen::VectorXd& n, const RateModel& m) {
  return condensate_fraction(n, m.system().detuning);
}

/// Fraction of phonons in mode `mode` (0-based); empty for an empty system.
inline std::optional<double> mode_fraction(const Eigen::VectorXd& n, int mode) {
  const double total = n.sum();
  if (!(total > 0.0)) return std::nullopt;
  return n(mode) / total;
}

/// Net rate of phonon flow from mode j to mode `target` (0-based, j != target):
///   4 U^2_{j,t} [Gamma(omega_j - omega_t) - Gamma(omega_t - omega_j)] <n_t><n_j>.
/// Positive means flow toward `target`.
inline double net_transition_rate(const RateModel& m, const Eigen::VectorXd& n, int j,
                                  int target) {
  if (j == target) throw ValidationError("net_transition_rate needs two distinct modes");
  const auto& sys = m.system();
  const double wj = sys.frequencies[j];
  const double wt = sys.frequencies[target];
  return 4.0 * sys.coupling_sq(j, target) * (sys.rate(wj - wt) - sys.rate(wt - wj)) * n(target) *
         n(j);
}

}  // namespace frohlich::rate
