#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "frohlich/errors.hpp"
#include "frohlich/ode/step_control.hpp"

namespace frohlich::ode {

/// Linearly implicit Rosenbrock 2(3) pair of Shampine and Reichelt (ode23s),
/// for stiff autonomous systems y' = f(y) with a dense Jacobian.
/// `Rhs` is rhs(t, y, dydt) and `Jac` is jac(t, y, J) on Eigen::VectorXd / MatrixXd.
template <class Rhs, class Jac>
class Rosenbrock23 {
 public:
  using Vector = Eigen::VectorXd;
  using Matrix = Eigen::MatrixXd;

  Rosenbrock23(Rhs rhs, Jac jac, StepControl ctl)
      : rhs_(std::move(rhs)), jac_(std::move(jac)), ctl_(ctl) {}

  void reset(double t, const Vector& y) {
    t_ = t;
    y_ = y;
    f0_.resize(y.size());
    rhs_(t_, y_, f0_);
    ++stats_.rhs_evaluations;
    h_ = ctl_.initial_step > 0.0 ? ctl_.initial_step : initial_step_guess(y_, f0_, ctl_);
    started_ = true;
  }

  double step(double t_stop) {
    if (!started_) throw SolverError("Rosenbrock23::step called before reset");
    const double d = 1.0 / (2.0 + std::sqrt(2.0));
    const double e32 = 6.0 + std::sqrt(2.0);
    const Eigen::Index n = y_.size();

    J_.resize(n, n);
    jac_(t_, y_, J_);
    ++stats_.jacobian_evaluations;

    for (;;) {
      const double h_min = min_step_at(t_, ctl_);
      const double h = std::min({h_, ctl_.max_step, t_stop - t_});
      if (h < h_min && t_stop - t_ > h_min) {
        if (!rejected_last_) {
          h_ = h_min;
          continue;
        }
        std::ostringstream os;
        os << "step size underflow at t = " << t_ << " (h = " << h << ")";
        throw SolverError(os.str());
      }
      if (stats_.accepted + stats_.rejected >= ctl_.max_steps)
        throw SolverError("step budget exhausted");

      const Matrix W = Matrix::Identity(n, n) - h * d * J_;
      const Eigen::PartialPivLU<Matrix> lu(W);
      k1_ = lu.solve(f0_);
      tmp_ = y_ + 0.5 * h * k1_;
      f1_.resize(n);
      rhs_(t_ + 0.5 * h, tmp_, f1_);
      k2_ = lu.solve(f1_ - k1_) + k1_;
      y_new_ = y_ + h * k2_;
      f2_.resize(n);
      rhs_(t_ + h, y_new_, f2_);
      k3_ = lu.solve(f2_ - e32 * (k2_ - f1_) - 2.0 * (k1_ - f0_));
      stats_.rhs_evaluations += 2;

      const Vector err = (h / 6.0) * (k1_ - 2.0 * k2_ + k3_);
      const double e = scaled_error(err, y_, y_new_, ctl_.rtol, ctl_.atol);
      const double factor = e == 0.0 ? 5.0 : std::clamp(0.8 * std::pow(e, -1.0 / 3.0), 0.2, 5.0);
      if (std::isfinite(e) && e <= 1.0) {
        t_prev_ = t_;
        y_prev_ = y_;
        h_last_ = h;
        t_ += h;
        y_.swap(y_new_);
        f0_.swap(f2_);
        ++stats_.accepted;
        h_ = h * (rejected_last_ ? std::min(1.0, factor) : factor);
        rejected_last_ = false;
        return t_;
      }
      ++stats_.rejected;
      rejected_last_ = true;
      h_ = std::isfinite(e) ? h * std::max(0.2, factor) : 0.25 * h;
    }
  }

  /// Continuous extension on the last accepted step.
  Vector dense(double t) const {
    const double d = 1.0 / (2.0 + std::sqrt(2.0));
    const double s = (t - t_prev_) / h_last_;
    return y_prev_ + h_last_ * (s * (1.0 - s) / (1.0 - 2.0 * d) * k1_ +
                                s * (s - 2.0 * d) / (1.0 - 2.0 * d) * k2_);
  }

  /// Replaces the current state (after a projection) and refreshes the slope.
  void set_state(const Vector& y) {
    y_ = y;
    rhs_(t_, y_, f0_);
    ++stats_.rhs_evaluations;
  }

  double time() const { return t_; }
  double previous_time() const { return t_prev_; }
  const Vector& state() const { return y_; }
  const Vector& slope() const { return f0_; }
  const StepStats& stats() const { return stats_; }

 private:
  Rhs rhs_;
  Jac jac_;
  StepControl ctl_;
  StepStats stats_;
  bool started_ = false;
  bool rejected_last_ = false;
  double t_ = 0.0, t_prev_ = 0.0, h_ = 0.0, h_last_ = 1.0;
  Vector y_, y_prev_, y_new_, tmp_, f0_, f1_, f2_, k1_, k2_, k3_;
  Matrix J_;
};

template <class Rhs, class Jac>
Rosenbrock23<Rhs, Jac> make_rosenbrock(Rhs rhs, Jac jac, StepControl ctl) {
  return Rosenbrock23<Rhs, Jac>(std::move(rhs), std::move(jac), ctl);
}

}  // namespace frohlich::ode
