#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "frohlich/errors.hpp"
#include "frohlich/ode/step_control.hpp"

namespace frohlich::ode {

/// Explicit Dormand-Prince 5(4) with FSAL and the 4th-order continuous
/// extension of dopri5. `State` is any Eigen dense type (real or complex);
/// `Rhs` is callable as rhs(t, y, dydt).
template <class State, class Rhs>
class DormandPrince {
 public:
  DormandPrince(Rhs rhs, StepControl ctl) : rhs_(std::move(rhs)), ctl_(ctl) {}

  /// Starts a new integration at (t, y). Must be called before step().
  void reset(double t, const State& y) {
    t_ = t;
    y_ = y;
    k1_.resizeLike(y);
    rhs_(t_, y_, k1_);
    ++stats_.rhs_evaluations;
    h_ = ctl_.initial_step > 0.0 ? ctl_.initial_step : initial_step_guess(y_, k1_, ctl_);
    started_ = true;
  }

  /// Takes one accepted step, never past t_stop. Returns the new time.
  double step(double t_stop) {
    if (!started_) throw SolverError("DormandPrince::step called before reset");
    const double direction = 1.0;
    for (;;) {
      const double h_min = min_step_at(t_, ctl_);
      double h = std::min({h_, ctl_.max_step, t_stop - t_});
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
      attempt(h);
      const double err = scaled_error(err_, y_, y_new_, ctl_.rtol, ctl_.atol);
      const double factor =
          err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (std::isfinite(err) && err <= 1.0) {
        t_prev_ = t_;
        h_last_ = h;
        if (ctl_.dense_output) {
          y_prev_ = y_;
          k1_prev_ = k1_;
        }
        t_ += direction * h;
        y_.swap(y_new_);
        k1_.swap(k7_);
        if (ctl_.dense_output) build_dense(h);
        ++stats_.accepted;
        h_ = h * (rejected_last_ ? std::min(1.0, factor) : factor);
        rejected_last_ = false;
        return t_;
      }
      ++stats_.rejected;
      rejected_last_ = true;
      h_ = std::isfinite(err) ? h * std::max(0.2, factor) : 0.25 * h;
    }
  }

  /// Dense output on the last accepted step [t_prev, t].
  State dense(double t) const {
    if (!ctl_.dense_output) throw SolverError("dense output was disabled");
    const double theta = (t - t_prev_) / h_last_;
    const double theta1 = 1.0 - theta;
    return r1_ + theta * (r2_ + theta1 * (r3_ + theta * (r4_ + theta1 * r5_)));
  }

  /// Replaces the current state (e.g. after a projection); re-evaluates the slope.
  void set_state(const State& y) {
    y_ = y;
    rhs_(t_, y_, k1_);
    ++stats_.rhs_evaluations;
  }

  double time() const { return t_; }
  double previous_time() const { return t_prev_; }
  const State& state() const { return y_; }
  const StepStats& stats() const { return stats_; }

 private:
  void attempt(double h) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    k2_.resizeLike(y_);
    k3_.resizeLike(y_);
    k4_.resizeLike(y_);
    k5_.resizeLike(y_);
    k6_.resizeLike(y_);
    k7_.resizeLike(y_);

    tmp_ = y_ + h * a21 * k1_;
    rhs_(t_ + c2 * h, tmp_, k2_);
    tmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
    rhs_(t_ + c3 * h, tmp_, k3_);
    tmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs_(t_ + c4 * h, tmp_, k4_);
    tmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs_(t_ + c5 * h, tmp_, k5_);
    tmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs_(t_ + h, tmp_, k6_);
    y_new_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    rhs_(t_ + h, y_new_, k7_);
    stats_.rhs_evaluations += 6;
    err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
  }

  void build_dense(double h) {
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
    // k1_prev_ is the slope at the step start, k1_ (after swap) the slope at its end.
    r1_ = y_prev_;
    r2_ = y_ - y_prev_;
    r3_ = h * k1_prev_ - r2_;
    r4_ = r2_ - h * k1_ - r3_;
    r5_ = h * (d1 * k1_prev_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k1_);
  }

  Rhs rhs_;
  StepControl ctl_;
  StepStats stats_;
  bool started_ = false;
  bool rejected_last_ = false;
  double t_ = 0.0, t_prev_ = 0.0, h_ = 0.0, h_last_ = 1.0;
  State y_, y_prev_, y_new_, tmp_, err_;
  State k1_, k1_prev_, k2_, k3_, k4_, k5_, k6_, k7_;
  State r1_, r2_, r3_, r4_, r5_;
};

template <class State, class Rhs>
DormandPrince<State, Rhs> make_dormand_prince(Rhs rhs, StepControl ctl) {
  return DormandPrince<State, Rhs>(std::move(rhs), ctl);
}

}  // namespace frohlich::ode
