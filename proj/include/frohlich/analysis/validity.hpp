#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frohlich/core/mode_system.hpp"
#include "frohlich/rate/rate_model.hpp"

namespace frohlich::analysis {

/// Margin that "much greater/smaller than" must clear.
inline constexpr double validity_margin = 10.0;

/// Checks of the assumptions behind the adiabatic elimination of the cavity.
struct ValidityFlags {
  double cavity_over_heating = 0.0;   // kappa / (n_eff gamma)
  double kappa_over_coupling = 0.0;   // kappa / (g0 |alpha|)
  double omega_over_coupling = 0.0;   // omega_1 / (g0 |alpha|)
  bool fast_cavity = false;
  bool weak_coupling = false;
  std::optional<bool> sidebands_negligible;  // needs occupations

  bool ok() const { return fast_cavity && weak_coupling && sidebands_negligible.value_or(true); }

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (!fast_cavity) v.emplace_back("kappa is not much larger than n_th gamma");
    if (!weak_coupling) v.emplace_back("g0|alpha| is not much smaller than kappa and omega_1");
    if (sidebands_negligible && !*sidebands_negligible)
      v.emplace_back("two-phonon sideband terms are not negligible");
    return v;
  }
};

/// Mean thermal occupation with incoherent pumping folded in: n_th + Gamma_p / gamma.
inline double effective_thermal(const ModeSystem& s) { return s.mean_thermal() + s.pump_rate / s.gamma; }

inline ValidityFlags validity_flags(const ModeSystem& s, const Eigen::VectorXd* occupations = nullptr) {
  ValidityFlags f;
  const double heating = std::max(effective_thermal(s), 1.0) * s.gamma;
  f.cavity_over_heating = s.kappa / heating;
  const double g = s.coupling_product();
  const double inf = std::numeric_limits<double>::infinity();
  f.kappa_over_coupling = g > 0.0 ? s.kappa / g : inf;
  f.omega_over_coupling = g > 0.0 ? s.frequencies.front() / g : inf;
  f.fast_cavity = f.cavity_over_heating >= validity_margin;
  f.weak_coupling = f.kappa_over_coupling >= validity_margin && f.omega_over_coupling >= validity_margin;
  if (occupations) {
    const rate::RateModel m(s, rate::EquationForm::full);
    f.sidebands_negligible = m.simplified_validity(*occupations).sidebands_negligible;
  }
  return f;
}

}  // namespace frohlich::analysis
