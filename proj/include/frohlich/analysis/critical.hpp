#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "frohlich/analysis/validity.hpp"
#include "frohlich/constants.hpp"
#include "frohlich/core/config.hpp"
#include "frohlich/core/mode_system.hpp"
#include "frohlich/errors.hpp"
#include "frohlich/rate/integrate.hpp"
#include "frohlich/rate/observables.hpp"
#include "frohlich/rate/rate_model.hpp"

namespace frohlich::analysis {

struct CriticalEstimate {
  double g0_alpha_sq = 0.0;        // (g0 |alpha|)^2 at the threshold, (rad/s)^2
  double g0_alpha = 0.0;
  double effective_thermal = 0.0;  // n_th + Gamma_p / gamma used in the estimate
};

/// Order-of-magnitude threshold for condensate fraction `a`, from
///   3000 pi^6 (1-a) (k/m) kappa |Delta| g0^2|alpha|^2 n / (omega0 gamma (kappa^2 + 4 Delta^2)^2) = N^6
/// with n the mean thermal occupation plus Gamma_p / gamma. Derived for
/// Delta = -k/(m omega0) and rejected elsewhere.
inline CriticalEstimate critical_condition_estimate(const ModeSystem& s, double a) {
  if (!(a < 1.0)) throw ValidationError("target fraction must be below 1");
  if (!(a > 0.0)) throw ValidationError("target fraction must be positive");
  const double band = s.coupling_ratio / s.omega0;
  if (std::abs(s.detuning + band) > 1e-9 * band)
    throw ValidationError("the critical-condition estimate assumes detuning = -k/(m omega0)");
  CriticalEstimate e;
  e.effective_thermal = effective_thermal(s);
  if (!(e.effective_thermal > 0.0))
    throw ValidationError("the critical-condition estimate needs a nonzero thermal or pumped population");
  const double n6 = std::pow(static_cast<double>(s.n_modes), 6);
  const double pi6 = std::pow(constants::pi, 6);
  const double lor = s.kappa * s.kappa + 4.0 * s.detuning * s.detuning;
  e.g0_alpha_sq = n6 * s.omega0 * s.gamma * lor * lor /
                  (3000.0 * pi6 * (1.0 - a) * s.coupling_ratio * s.kappa * std::abs(s.detuning) *
                   e.effective_thermal);
  e.g0_alpha = std::sqrt(e.g0_alpha_sq);
  return e;
}

inline CriticalEstimate critical_condition_estimate(const SystemConfig& cfg, double a) {
  return critical_condition_estimate(build_mode_system(cfg), a);
}

/// Steady-state fraction in the target mode (lowest for Delta <= 0, highest otherwise).
inline double steady_fraction(const SystemConfig& cfg, rate::EquationForm form = rate::EquationForm::full,
                              const rate::SteadyStateOptions& opt = {}) {
  const rate::RateModel m(build_mode_system(cfg), form);
  const auto ss = rate::steady_state(m, opt);
  const auto cf = rate::condensate_fraction(ss.occupations, m);
  if (!cf.fraction) throw SolverError("condensate fraction undefined (no phonons)");
  return *cf.fraction;
}

/// Fraction in the target mode at thermal equilibrium.
inline double thermal_baseline(const SystemConfig& cfg) {
  const auto s = build_mode_system(cfg);
  double total = 0.0;
  for (double n : s.thermal) total += n;
  if (!(total > 0.0)) throw ValidationError("thermal baseline undefined at zero temperature");
  return (cfg.detuning > 0.0 ? s.thermal.back() : s.thermal.front()) / total;
}

struct CriticalOptions {
  double rel_tol = 1e-3;
  double expansion = 4.0;
  double lower_bound = 0.0;  // g0|alpha| search floor; 0: 1e-9 kappa
  double upper_bound = 0.0;  // search ceiling; 0: kappa
  rate::EquationForm form = rate::EquationForm::full;
  rate::SteadyStateOptions steady;
};

struct CriticalResult {
  std::optional<double> g0_alpha;  // empty when no bracket was found
  double lower = 0.0, upper = 0.0; // final bracket
  double fraction_lower = 0.0, fraction_upper = 0.0;
  double baseline = 0.0;
  int evaluations = 0;
  std::string message;
};

/// Smallest g0|alpha| with steady fraction >= a_target, by bracket expansion
/// and geometric bisection (the fraction is non-decreasing in the coupling).
inline CriticalResult critical_coupling(const SystemConfig& cfg, double a_target,
                                        const CriticalOptions& opt = {}) {
  validate(cfg);
  CriticalResult r;
  r.baseline = thermal_baseline(cfg);
  if (!(a_target > r.baseline && a_target < 1.0)) {
    std::ostringstream os;
    os << "target fraction must lie in (thermal baseline " << r.baseline << ", 1)";
    throw ValidationError(os.str());
  }
  const double floor = opt.lower_bound > 0.0 ? opt.lower_bound : 1e-9 * cfg.kappa;
  const double ceil = opt.upper_bound > 0.0 ? opt.upper_bound : cfg.kappa;
  auto frac = [&](double g) {
    ++r.evaluations;
    return steady_fraction(with_coupling_product(cfg, g), opt.form, opt.steady);
  };

  double guess = 1e-3 * cfg.kappa;
  try {
    guess = critical_condition_estimate(cfg, a_target).g0_alpha;
  } catch (const ValidationError&) {
  }
  guess = std::clamp(guess, floor, ceil);

  double lo = guess, hi = guess;
  double f = frac(guess);
  if (f >= a_target) {
    r.fraction_upper = f;
    for (;;) {
      if (lo <= floor) {
        r.lower = floor;
        r.upper = hi;
        r.message = "fraction already above target at the search floor";
        return r;
      }
      lo = std::max(floor, lo / opt.expansion);
      f = frac(lo);
      if (f < a_target) break;
      hi = lo;
      r.fraction_upper = f;
    }
    r.fraction_lower = f;
  } else {
    r.fraction_lower = f;
    for (;;) {
      if (hi >= ceil) {
        r.lower = lo;
        r.upper = ceil;
        std::ostringstream os;
        os << "no bracket: fraction " << r.fraction_lower << " < " << a_target
           << " up to g0|alpha| = " << ceil;
        r.message = os.str();
        return r;
      }
      hi = std::min(ceil, hi * opt.expansion);
      f = frac(hi);
      if (f >= a_target) break;
      lo = hi;
      r.fraction_lower = f;
    }
    r.fraction_upper = f;
  }
  while (hi / lo - 1.0 > opt.rel_tol) {
    const double mid = std::sqrt(lo * hi);
    f = frac(mid);
    if (f >= a_target) {
      hi = mid;
      r.fraction_upper = f;
    } else {
      lo = mid;
      r.fraction_lower = f;
    }
  }
  r.lower = lo;
  r.upper = hi;
  r.g0_alpha = std::sqrt(lo * hi);
  return r;
}

}  // namespace frohlich::analysis
