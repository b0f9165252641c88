#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "frohlich/errors.hpp"
#include "frohlich/ode/dormand_prince.hpp"
#include "frohlich/ode/rosenbrock.hpp"
#include "frohlich/rate/observables.hpp"
#include "frohlich/rate/rate_model.hpp"

namespace frohlich::rate {

enum class Method { rosenbrock, dormand_prince };

struct IntegrationOptions {
  double rtol = 1e-8;
  double atol = 0.0;  // 0: rtol times 1e-3 of the thermal scale
  Method method = Method::rosenbrock;
  std::size_t max_steps = 5'000'000;
  /// Total phonon number beyond which the run is declared unstable, as a
  /// multiple of (thermal total + N Gamma_p / gamma + 1).
  double runaway_factor = 1e9;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::size_t clamped = 0;
  ode::StepStats stats;
};

namespace detail {

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline double occupation_scale(const RateModel& m) {
  return m.thermal().sum() + m.size() * m.pump_rate() / m.gamma() + 1.0;
}

}  // namespace detail

/// Adaptive integrator for a RateModel with non-negativity clamping and a
/// runaway guard. Steps are taken one at a time so callers can stop on events.
class RateIntegrator {
 public:
  using Vector = Eigen::VectorXd;
  using Fn = std::function<void(double, const Vector&, Vector&)>;
  using JacFn = std::function<void(double, const Vector&, Eigen::MatrixXd&)>;

  RateIntegrator(const RateModel& model, IntegrationOptions opt)
      : model_(&model), opt_(opt), stepper_(make_stepper(model, opt)) {
    clamp_tol_ = 10.0 * control(model, opt).atol;
    runaway_ = opt.runaway_factor * detail::occupation_scale(model);
  }

  void reset(double t, const Vector& n) {
    std::visit([&](auto& s) { s.reset(t, n); }, stepper_);
  }

  double step(double t_stop) {
    const double t = std::visit([&](auto& s) { return s.step(t_stop); }, stepper_);
    Vector y = state();
    if (!y.allFinite()) fail("non-finite occupation", y);
    if (y.sum() > runaway_) fail("phonon number runaway (unstable drive)", y);
    bool touched = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y(i) < 0.0) {
        if (y(i) < -clamp_tol_) fail("occupation fell below zero beyond tolerance", y);
        y(i) = 0.0;
        ++clamped_;
        touched = true;
      }
    }
    if (touched) std::visit([&](auto& s) { s.set_state(y); }, stepper_);
    return t;
  }

  Vector dense(double t) const {
    Vector y = std::visit([&](const auto& s) -> Vector { return s.dense(t); }, stepper_);
    return y.cwiseMax(0.0);
  }

  double time() const {
    return std::visit([](const auto& s) { return s.time(); }, stepper_);
  }
  double previous_time() const {
    return std::visit([](const auto& s) { return s.previous_time(); }, stepper_);
  }
  Vector state() const {
    return std::visit([](const auto& s) -> Vector { return s.state(); }, stepper_);
  }
  std::size_t clamped() const { return clamped_; }
  ode::StepStats stats() const {
    return std::visit([](const auto& s) { return s.stats(); }, stepper_);
  }

  static ode::StepControl control(const RateModel& m, const IntegrationOptions& opt) {
    ode::StepControl c;
    c.rtol = opt.rtol;
    c.atol = opt.atol > 0.0 ? opt.atol
                            : opt.rtol * 1e-3 * std::max(1e-3, m.thermal().sum() +
                                                                   m.pump_rate() / m.gamma());
    c.max_steps = opt.max_steps;
    return c;
  }

 private:
  using Rb = ode::Rosenbrock23<Fn, JacFn>;
  using Dp = ode::DormandPrince<Vector, Fn>;

  static std::variant<Rb, Dp> make_stepper(const RateModel& m, const IntegrationOptions& opt) {
    const RateModel* mp = &m;
    Fn f = [mp](double, const Vector& y, Vector& dy) { mp->rhs(y, dy); };
    const auto ctl = control(m, opt);
    if (opt.method == Method::dormand_prince) return Dp(std::move(f), ctl);
    JacFn j = [mp](double, const Vector& y, Eigen::MatrixXd& jac) { mp->jacobian(y, jac); };
    return Rb(std::move(f), std::move(j), ctl);
  }

  [[noreturn]] void fail(const char* what, const Vector& y) const {
    std::ostringstream os;
    os << what << " at t = " << time();
    throw SolverError(os.str(), detail::to_std(y));
  }

  const RateModel* model_;
  IntegrationOptions opt_;
  std::variant<Rb, Dp> stepper_;
  double clamp_tol_ = 0.0;
  double runaway_ = 0.0;
  std::size_t clamped_ = 0;
};

/// Integrates from `initial` at t = 0 and reports the state at each sample time
/// (ascending, within [0, t_end]); t_end itself is always the last sample.
inline Trajectory integrate(const RateModel& model, const Eigen::VectorXd& initial, double t_end,
                            const std::vector<double>& sample_times,
                            const IntegrationOptions& opt = {}) {
  if (!(opt.rtol > 0.0)) throw ValidationError("tolerance must be positive");
  if (!(t_end >= 0.0)) throw ValidationError("t_end must be non-negative");
  if (initial.size() != model.size()) throw ValidationError("initial state has the wrong length");
  if (!initial.allFinite() || (initial.array() < 0.0).any())
    throw ValidationError("initial occupations must be finite and non-negative");

  std::vector<double> samples;
  for (double t : sample_times)
    if (t >= 0.0 && t < t_end) samples.push_back(t);
  std::sort(samples.begin(), samples.end());
  samples.push_back(t_end);

  Trajectory out;
  RateIntegrator integ(model, opt);
  integ.reset(0.0, initial);
  std::size_t next = 0;
  while (next < samples.size() && samples[next] <= 0.0) {
    out.times.push_back(samples[next]);
    out.states.push_back(initial);
    ++next;
  }
  while (next < samples.size()) {
    const double t = integ.step(t_end);
    while (next < samples.size() && samples[next] <= t) {
      out.times.push_back(samples[next]);
      out.states.push_back(samples[next] == t ? integ.state() : integ.dense(samples[next]));
      ++next;
    }
  }
  out.clamped = integ.clamped();
  out.stats = integ.stats();
  return out;
}

/// Evenly spaced samples 0, t_end/(n-1), ..., t_end.
inline std::vector<double> linear_samples(double t_end, int n) {
  std::vector<double> s;
  if (n < 2) return {t_end};
  for (int i = 0; i < n; ++i) s.push_back(t_end * i / (n - 1));
  return s;
}

inline Trajectory integrate(const RateModel& model, const Eigen::VectorXd& initial, double t_end,
                            int n_samples, const IntegrationOptions& opt = {}) {
  return integrate(model, initial, t_end, linear_samples(t_end, n_samples), opt);
}

enum class SteadyBranch { newton, integration };

inline const char* to_string(SteadyBranch b) {
  return b == SteadyBranch::newton ? "newton" : "integration";
}

struct SteadyStateOptions {
  double tol = 1e-8;  // residual ||rhs||_inf <= tol * gamma * N_tot
  IntegrationOptions integration;
  /// First integration span in units of 1/gamma; doubled on each retry.
  double initial_span = 5.0;
  /// Give up after integrating this long (units of 1/gamma).
  double max_span = 1e5;
  int newton_iterations = 60;
};

struct SteadyStateResult {
  Eigen::VectorXd occupations;
  double residual = 0.0;  // ||rhs||_inf / (gamma N_tot)
  SteadyBranch branch = SteadyBranch::newton;
  double integrated_time = 0.0;
  int newton_iterations = 0;
  std::size_t clamped = 0;
};

inline double relative_residual(const RateModel& m, const Eigen::VectorXd& n) {
  const double total = std::max(n.sum(), std::numeric_limits<double>::min());
  return m.rhs(n).cwiseAbs().maxCoeff() / (m.gamma() * total);
}

/// Damped Newton on rhs(n) = 0 from `start`. Returns the root only if it is
/// non-negative, meets the tolerance and is linearly stable.
inline std::optional<Eigen::VectorXd> newton_polish(const RateModel& m, Eigen::VectorXd n,
                                                    double tol, int max_iter, int* iterations) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd f = m.rhs(n);
  for (int it = 0; it < max_iter; ++it) {
    if (iterations) *iterations = it;
    if (relative_residual(m, n) <= tol) {
      m.jacobian(n, jac);
      const Eigen::VectorXcd ev = jac.eigenvalues();
      if ((ev.real().array() < 0.0).all()) return n;
      return std::nullopt;
    }
    m.jacobian(n, jac);
    const Eigen::VectorXd dx = jac.partialPivLu().solve(-f);
    if (!dx.allFinite()) return std::nullopt;
    const double f0 = f.norm();
    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k, lambda *= 0.5) {
      Eigen::VectorXd trial = (n + lambda * dx).cwiseMax(0.0);
      Eigen::VectorXd ft = m.rhs(trial);
      if (ft.allFinite() && ft.norm() < (1.0 - 1e-4 * lambda) * f0) {
        n = std::move(trial);
        f = std::move(ft);
        improved = true;
        break;
      }
    }
    if (!improved) return std::nullopt;
  }
  if (iterations) *iterations = max_iter;
  return std::nullopt;
}

/// Steady state reached from the thermal distribution: integrate for a while,
/// then polish with Newton; if Newton does not give a stable non-negative root,
/// keep integrating until the residual itself meets the tolerance.
inline SteadyStateResult steady_state(const RateModel& model, const SteadyStateOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw ValidationError("tolerance must be positive");
  const double tau = 1.0 / model.gamma();
  RateIntegrator integ(model, opt.integration);
  integ.reset(0.0, model.thermal());

  SteadyStateResult res;
  double span = opt.initial_span * tau;
  double target = 0.0;
  for (;;) {
    target += span;
    while (integ.time() < target) integ.step(target);
    res.integrated_time = integ.time();
    res.clamped = integ.clamped();
    const Eigen::VectorXd n = integ.state();

    int iters = 0;
    if (auto root = newton_polish(model, n, opt.tol, opt.newton_iterations, &iters)) {
      res.occupations = *root;
      res.branch = SteadyBranch::newton;
      res.newton_iterations = iters;
      res.residual = relative_residual(model, *root);
      return res;
    }
    const double r = relative_residual(model, n);
    if (r <= opt.tol) {
      res.occupations = n;
      res.branch = SteadyBranch::integration;
      res.residual = r;
      return res;
    }
    if (integ.time() >= opt.max_span * tau) {
      std::ostringstream os;
      os << "steady state not reached after t = " << integ.time() << " s (residual " << r << ")";
      throw SolverError(os.str(), detail::to_std(n));
    }
    span *= 2.0;
  }
}

/// Occupations reached from the thermal state after a fixed time (the
/// "steady state at t" convention used for the stochastic simulations).
inline Eigen::VectorXd state_at_time(const RateModel& model, double t,
                                     const IntegrationOptions& opt = {}) {
  return integrate(model, model.thermal(), t, std::vector<double>{}, opt).states.back();
}

struct CondensationTime {
  double time = 0.0;            // s; first time a(t) >= threshold * a_ss
  double steady_fraction = 0.0; // a_ss
  double initial_fraction = 0.0;
};

/// First time the condensate fraction, starting from the thermal state, reaches
/// `threshold` times its steady value.
inline CondensationTime condensation_time(const RateModel& model, double threshold = 0.9,
                                          const SteadyStateOptions& opt = {}) {
  const auto ss = steady_state(model, opt);
  const auto cf = condensate_fraction(ss.occupations, model);
  if (!cf.fraction) throw SolverError("condensate fraction undefined (no phonons)");
  CondensationTime out;
  out.steady_fraction = *cf.fraction;
  const int target = cf.target_mode;
  auto frac = [&](const Eigen::VectorXd& n) { return n(target) / n.sum(); };
  const double goal = threshold * out.steady_fraction;
  out.initial_fraction = frac(model.thermal());
  if (out.initial_fraction >= goal) return out;

  RateIntegrator integ(model, opt.integration);
  integ.reset(0.0, model.thermal());
  const double t_max = opt.max_span / model.gamma();
  while (integ.time() < t_max) {
    const double t = integ.step(t_max);
    if (frac(integ.state()) >= goal) {
      double lo = integ.previous_time(), hi = t;
      for (int k = 0; k < 100 && hi - lo > 1e-12 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        (frac(integ.dense(mid)) >= goal ? hi : lo) = mid;
      }
      out.time = hi;
      return out;
    }
  }
  throw SolverError("condensate fraction never reached the threshold");
}

}  // namespace frohlich::rate
