#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "frohlich/constants.hpp"
#include "frohlich/core/mode_system.hpp"

namespace frohlich::rate {

enum class EquationForm {
  full,        // dissipation, two-phonon sidebands and redistribution
  simplified,  // dissipation and redistribution only
};

inline const char* to_string(EquationForm f) {
  return f == EquationForm::full ? "full" : "simplified";
}

/// Mean phonon numbers <n_l> at a given time.
struct MeanFieldState {
  Eigen::VectorXd occupations;
  double time = 0.0;

  double total() const { return occupations.sum(); }
  bool valid() const {
    return occupations.allFinite() && (occupations.array() >= 0.0).all();
  }
};

/// Diagnostics for whether dropping the two-phonon sideband terms is justified.
struct SimplifiedValidity {
  double detuning_over_bandwidth = 0.0;  // |Delta| / (omega_N - omega_1)
  double sideband_over_gamma = 0.0;      // largest sideband rate per mode, relative to gamma
  bool detuning_in_band = false;
  bool sidebands_negligible = false;
  bool ok() const { return detuning_in_band && sidebands_negligible; }
};

/// Mean-field rate equations for the mode occupations with the decorrelation
/// <n_l n_j> -> <n_l><n_j> (and <n(n-1)> -> n^2 - n) applied throughout.
/// All rate coefficients are tabulated at construction.
class RateModel {
 public:
  using Vector = Eigen::VectorXd;
  using Matrix = Eigen::MatrixXd;

  explicit RateModel(ModeSystem sys, EquationForm form = EquationForm::full)
      : sys_(std::move(sys)), form_(form) {
    const int n = sys_.n_modes;
    const auto& w = sys_.frequencies;
    const auto& u2 = sys_.coupling_sq;
    const auto& g = sys_.rate;
    thermal_ = Eigen::Map<const Vector>(sys_.thermal.data(), n);
    transfer_ = Matrix::Zero(n, n);
    sum_down_ = Matrix::Zero(n, n);
    sum_up_ = Matrix::Zero(n, n);
    pair_down_ = Vector::Zero(n);
    pair_up_ = Vector::Zero(n);
    for (int l = 0; l < n; ++l) {
      pair_down_(l) = 2.0 * u2(l, l) * g(2.0 * w[l]);
      pair_up_(l) = 2.0 * u2(l, l) * g(-2.0 * w[l]);
      for (int j = 0; j < n; ++j) {
        if (j == l) continue;
        transfer_(l, j) = 4.0 * u2(l, j) * g(w[l] - w[j]);
        sum_down_(l, j) = 4.0 * u2(l, j) * g(w[l] + w[j]);
        sum_up_(l, j) = 4.0 * u2(l, j) * g(-w[l] - w[j]);
      }
    }
  }

  const ModeSystem& system() const { return sys_; }
  EquationForm form() const { return form_; }
  int size() const { return sys_.n_modes; }
  double gamma() const { return sys_.gamma; }
  double pump_rate() const { return sys_.pump_rate; }
  const Vector& thermal() const { return thermal_; }

  /// Rate coefficient for moving one phonon from mode `from` to mode `to`
  /// (0-based), 4 U^2 Gamma(omega_from - omega_to).
  double transfer_rate(int from, int to) const { return transfer_(from, to); }

  void rhs(const Vector& n, Vector& out) const {
    if (form_ == EquationForm::full)
      rhs_full(n, out);
    else
      rhs_simplified(n, out);
  }

  Vector rhs(const Vector& n) const {
    Vector out(n.size());
    rhs(n, out);
    return out;
  }

  void rhs_simplified(const Vector& n, Vector& out) const {
    out.resize(n.size());
    out = -sys_.gamma * (n - thermal_);
    out.array() += sys_.pump_rate;
    add_redistribution(n, out);
  }

  void rhs_full(const Vector& n, Vector& out) const {
    rhs_simplified(n, out);
    const int dim = size();
    for (int l = 0; l < dim; ++l) {
      const double nl = n(l);
      double d = -pair_down_(l) * (nl * nl - nl) + pair_up_(l) * (nl * nl + 3.0 * nl + 2.0);
      for (int j = 0; j < dim; ++j) {
        if (j == l) continue;
        d += -sum_down_(l, j) * nl * n(j) + sum_up_(l, j) * (nl + 1.0) * (n(j) + 1.0);
      }
      out(l) += d;
    }
  }

  /// Contribution of the (l, j) redistribution pair to d<n_l>/dt.
  double redistribution_term(const Vector& n, int l, int j) const {
    if (l == j) return 0.0;
    return transfer_(j, l) * n(j) * (n(l) + 1.0) - transfer_(l, j) * n(l) * (n(j) + 1.0);
  }

  void jacobian(const Vector& n, Matrix& jac) const {
    const int dim = size();
    jac = Matrix::Zero(dim, dim);
    for (int l = 0; l < dim; ++l) {
      jac(l, l) = -sys_.gamma;
      for (int j = 0; j < dim; ++j) {
        if (j == l) continue;
        jac(l, l) += transfer_(j, l) * n(j) - transfer_(l, j) * (n(j) + 1.0);
        jac(l, j) += transfer_(j, l) * (n(l) + 1.0) - transfer_(l, j) * n(l);
      }
    }
    if (form_ == EquationForm::simplified) return;
    for (int l = 0; l < dim; ++l) {
      const double nl = n(l);
      jac(l, l) += -pair_down_(l) * (2.0 * nl - 1.0) + pair_up_(l) * (2.0 * nl + 3.0);
      for (int j = 0; j < dim; ++j) {
        if (j == l) continue;
        jac(l, l) += -sum_down_(l, j) * n(j) + sum_up_(l, j) * (n(j) + 1.0);
        jac(l, j) += -sum_down_(l, j) * nl + sum_up_(l, j) * (nl + 1.0);
      }
    }
  }

  /// Checks the conditions under which the simplified form is a good
  /// approximation, evaluated at occupations `n`.
  SimplifiedValidity simplified_validity(const Vector& n) const {
    SimplifiedValidity v;
    const auto& w = sys_.frequencies;
    const double bandwidth = w.back() - w.front();
    const double abs_det = std::abs(sys_.detuning);
    v.detuning_over_bandwidth = bandwidth > 0.0 ? abs_det / bandwidth : std::numeric_limits<double>::infinity();
    v.detuning_in_band = abs_det <= bandwidth + sys_.kappa;
    double worst = 0.0;
    for (int l = 0; l < size(); ++l) {
      double r = 0.5 * (pair_down_(l) + pair_up_(l)) * (n(l) + 1.0);
      for (int j = 0; j < size(); ++j)
        if (j != l) r += (sum_down_(l, j) + sum_up_(l, j)) * (n(j) + 1.0);
      worst = std::max(worst, r);
    }
    v.sideband_over_gamma = worst / sys_.gamma;
    v.sidebands_negligible = v.sideband_over_gamma < 0.1;
    return v;
  }

  /// T_eff = T + hbar omega0 Gamma_p / (kB gamma): the bath temperature that
  /// would give the same total phonon number as the pumped system.
  double effective_temperature() const {
    return sys_.temperature + constants::hbar * sys_.omega0 * sys_.pump_rate /
                                  (constants::boltzmann * sys_.gamma);
  }

 private:
  void add_redistribution(const Vector& n, Vector& out) const {
    const int dim = size();
    for (int l = 0; l < dim; ++l) {
      double d = 0.0;
      for (int j = 0; j < dim; ++j) {
        if (j == l) continue;
        d += transfer_(j, l) * n(j) * (n(l) + 1.0) - transfer_(l, j) * n(l) * (n(j) + 1.0);
      }
      out(l) += d;
    }
  }

  ModeSystem sys_;
  EquationForm form_;
  Vector thermal_;
  Matrix transfer_;   // 4 U^2 Gamma(omega_l - omega_j), phonon l -> j
  Matrix sum_down_;   // 4 U^2 Gamma(omega_l + omega_j)
  Matrix sum_up_;     // 4 U^2 Gamma(-omega_l - omega_j)
  Vector pair_down_;  // 2 U^2_ll Gamma(2 omega_l)
  Vector pair_up_;    // 2 U^2_ll Gamma(-2 omega_l)
};

inline Eigen::VectorXd rhs_full(const Eigen::VectorXd& n, const RateModel& m) {
  Eigen::VectorXd out;
  m.rhs_full(n, out);
  return out;
}

inline Eigen::VectorXd rhs_simplified(const Eigen::VectorXd& n, const RateModel& m) {
  Eigen::VectorXd out;
  m.rhs_simplified(n, out);
  return out;
}

}  // namespace frohlich::rate
