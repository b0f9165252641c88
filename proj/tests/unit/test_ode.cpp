#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "frohlich/errors.hpp"
#include "frohlich/ode/dormand_prince.hpp"
#include "frohlich/ode/rosenbrock.hpp"

using namespace frohlich;
using Catch::Approx;

TEST_CASE("Dormand-Prince integrates a harmonic oscillator") {
  using V = Eigen::VectorXd;
  auto f = [](double, const V& y, V& dy) {
    dy.resize(2);
    dy << y(1), -y(0);
  };
  ode::StepControl ctl;
  ctl.rtol = 1e-10;
  ctl.atol = 1e-12;
  auto dp = ode::make_dormand_prince<V>(f, ctl);
  V y0(2);
  y0 << 1.0, 0.0;
  dp.reset(0.0, y0);
  while (dp.time() < 10.0) dp.step(10.0);
  CHECK(dp.time() == 10.0);
  CHECK(dp.state()(0) == Approx(std::cos(10.0)).margin(1e-8));
  CHECK(dp.state()(1) == Approx(-std::sin(10.0)).margin(1e-8));
}

TEST_CASE("Dormand-Prince dense output is accurate inside a step") {
  using V = Eigen::VectorXd;
  auto f = [](double, const V& y, V& dy) { dy = -y; };
  ode::StepControl ctl;
  ctl.rtol = 1e-9;
  ctl.atol = 1e-12;
  auto dp = ode::make_dormand_prince<V>(f, ctl);
  dp.reset(0.0, V::Ones(1));
  double worst = 0.0;
  while (dp.time() < 5.0) {
    dp.step(5.0);
    const double a = dp.previous_time(), b = dp.time();
    for (double s : {0.1, 0.37, 0.5, 0.81}) {
      const double t = a + s * (b - a);
      worst = std::max(worst, std::abs(dp.dense(t)(0) - std::exp(-t)));
    }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("Dormand-Prince works on complex matrices") {
  using M = Eigen::MatrixXcd;
  const std::complex<double> i(0.0, 1.0);
  auto f = [&](double, const M& y, M& dy) { dy = -i * 2.0 * y; };
  ode::StepControl ctl;
  ctl.rtol = 1e-10;
  ctl.atol = 1e-12;
  auto dp = ode::make_dormand_prince<M>(f, ctl);
  dp.reset(0.0, M::Identity(2, 2));
  while (dp.time() < 1.0) dp.step(1.0);
  CHECK(std::abs(dp.state()(0, 0) - std::exp(-2.0 * i)) < 1e-8);
}

TEST_CASE("Rosenbrock handles a stiff linear system") {
  using V = Eigen::VectorXd;
  Eigen::MatrixXd a(2, 2);
  a << -1000.0, 999.0, 0.0, -1.0;
  auto f = [&](double, const V& y, V& dy) { dy = a * y; };
  auto j = [&](double, const V&, Eigen::MatrixXd& jac) { jac = a; };
  ode::StepControl ctl;
  ctl.rtol = 1e-8;
  ctl.atol = 1e-12;
  auto rb = ode::make_rosenbrock(f, j, ctl);
  V y0(2);
  y0 << 2.0, 1.0;
  rb.reset(0.0, y0);
  while (rb.time() < 10.0) rb.step(10.0);
  // exact: y2 = e^{-t}, y1 = e^{-t} + e^{-1000 t}; a second-order method
  // accumulates roughly steps * rtol of global error.
  CHECK(rb.state()(1) == Approx(std::exp(-10.0)).epsilon(1e-4));
  CHECK(rb.state()(0) == Approx(std::exp(-10.0)).epsilon(1e-4));
  // the stiff transient must not force explicit-size steps (h ~ 1e-3 over t = 10)
  CHECK(rb.stats().accepted < 10000);
}

TEST_CASE("Rosenbrock on a nonlinear logistic equation") {
  using V = Eigen::VectorXd;
  auto f = [](double, const V& y, V& dy) { dy = y.array() * (1.0 - y.array()); };
  auto j = [](double, const V& y, Eigen::MatrixXd& jac) {
    jac.resize(1, 1);
    jac(0, 0) = 1.0 - 2.0 * y(0);
  };
  ode::StepControl ctl;
  ctl.rtol = 1e-9;
  ctl.atol = 1e-12;
  auto rb = ode::make_rosenbrock(f, j, ctl);
  rb.reset(0.0, V::Constant(1, 0.01));
  double worst = 0.0;
  while (rb.time() < 8.0) {
    rb.step(8.0);
    const double t = 0.5 * (rb.previous_time() + rb.time());
    const double exact = 1.0 / (1.0 + 99.0 * std::exp(-t));
    worst = std::max(worst, std::abs(rb.dense(t)(0) - exact));
  }
  CHECK(rb.state()(0) == Approx(1.0 / (1.0 + 99.0 * std::exp(-8.0))).epsilon(1e-6));
  CHECK(worst < 1e-5);
}

TEST_CASE("step budget exhaustion raises a solver error") {
  using V = Eigen::VectorXd;
  auto f = [](double, const V& y, V& dy) { dy = -y; };
  ode::StepControl ctl;
  ctl.max_steps = 3;
  auto dp = ode::make_dormand_prince<V>(f, ctl);
  dp.reset(0.0, V::Ones(1));
  CHECK_THROWS_AS(
      [&] {
        while (dp.time() < 1e6) dp.step(1e6);
      }(),
      SolverError);
}
