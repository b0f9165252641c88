#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "frohlich/core/mode_system.hpp"
#include "frohlich/rate/integrate.hpp"
#include "frohlich/rate/observables.hpp"
#include "frohlich/rate/rate_model.hpp"
#include "params.hpp"

using namespace frohlich;
using namespace frohlich::rate;
using Catch::Approx;

namespace {

RateModel make(const SystemConfig& c, EquationForm f = EquationForm::full) {
  return RateModel(build_mode_system(c), f);
}

Eigen::VectorXd random_state(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

// Hand-written two-mode rate equations with every term spelled out.
Eigen::Vector2d two_mode_oracle(const ModeSystem& s, const Eigen::Vector2d& n) {
  const double w1 = s.frequencies[0], w2 = s.frequencies[1];
  const double u11 = s.coupling_sq(0, 0), u22 = s.coupling_sq(1, 1), u12 = s.coupling_sq(0, 1);
  const auto& G = s.rate;
  const double g = s.gamma, p = s.pump_rate;
  const double n1 = n(0), n2 = n(1);
  Eigen::Vector2d d;
  d(0) = -g * (n1 - s.thermal[0]) + p                                      //
         - 2 * u11 * G(2 * w1) * (n1 * n1 - n1)                            //
         + 2 * u11 * G(-2 * w1) * (n1 * n1 + 3 * n1 + 2)                   //
         - 4 * u12 * G(w1 + w2) * n1 * n2                                  //
         + 4 * u12 * G(-w1 - w2) * (n1 + 1) * (n2 + 1)                     //
         + 4 * u12 * G(w2 - w1) * n2 * (n1 + 1)                            //
         - 4 * u12 * G(w1 - w2) * n1 * (n2 + 1);
  d(1) = -g * (n2 - s.thermal[1]) + p                                      //
         - 2 * u22 * G(2 * w2) * (n2 * n2 - n2)                            //
         + 2 * u22 * G(-2 * w2) * (n2 * n2 + 3 * n2 + 2)                   //
         - 4 * u12 * G(w1 + w2) * n1 * n2                                  //
         + 4 * u12 * G(-w1 - w2) * (n1 + 1) * (n2 + 1)                     //
         + 4 * u12 * G(w1 - w2) * n1 * (n2 + 1)                            //
         - 4 * u12 * G(w2 - w1) * n2 * (n1 + 1);
  return d;
}

}  // namespace

TEST_CASE("zero coupling leaves pure thermal relaxation") {
  auto c = testparams::band(5, 0.0);
  const auto m = make(c);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const auto n = random_state(rng, 5, 1e4);
    const Eigen::VectorXd expect = -m.gamma() * (n - m.thermal());
    CHECK((m.rhs(n) - expect).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("full equations match a hand-written two-mode oracle") {
  for (double g : {1e3, 1e4, 4e4}) {
    auto c = testparams::pair(g);
    c.pump_rate = 3.0;
    const auto m = make(c);
    std::mt19937_64 rng(7);
    for (int k = 0; k < 50; ++k) {
      const Eigen::Vector2d n = random_state(rng, 2, 20.0);
      const Eigen::Vector2d a = m.rhs(n), b = two_mode_oracle(m.system(), n);
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * (b.cwiseAbs().maxCoeff() + m.gamma()));
    }
  }
}

TEST_CASE("drive moves the thermal state") {
  const auto m = make(testparams::band(5, 5.0));
  CHECK(m.rhs(m.thermal()).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("simplified form conserves energy up to dissipation and pumping") {
  std::mt19937_64 rng(2024);
  for (int n : {2, 5, 12}) {
    auto c = testparams::band(n, 7.0);
    c.pump_rate = 40.0;
    const auto m = make(c, EquationForm::simplified);
    for (int k = 0; k < 1000; ++k) {
      const auto s = random_state(rng, n, 5e4);
      const double lhs = m.rhs(s).sum();
      const double expect = -m.gamma() * (s.sum() - m.thermal().sum()) + n * c.pump_rate;
      CHECK(std::abs(lhs - expect) <= 1e-10 * (std::abs(expect) + m.gamma() * s.sum()));
    }
  }
}

TEST_CASE("redistribution terms are pairwise antisymmetric") {
  const auto m = make(testparams::band(6, 3.0));
  std::mt19937_64 rng(3);
  const auto n = random_state(rng, 6, 1e3);
  for (int l = 0; l < 6; ++l)
    for (int j = 0; j < 6; ++j)
      CHECK(m.redistribution_term(n, l, j) ==
            Approx(-m.redistribution_term(n, j, l)).margin(1e-14 * n.sum()));
}

TEST_CASE("analytic Jacobian agrees with finite differences") {
  for (auto form : {EquationForm::full, EquationForm::simplified}) {
    const auto m = make(testparams::band(4, 6.0, -4e4), form);
    std::mt19937_64 rng(11);
    const auto n = random_state(rng, 4, 1e4);
    Eigen::MatrixXd jac;
    m.jacobian(n, jac);
    for (int j = 0; j < 4; ++j) {
      const double h = 1e-3 * (1.0 + n(j));
      Eigen::VectorXd a = n, b = n;
      a(j) += h;
      b(j) -= h;
      const Eigen::VectorXd fd = (m.rhs(a) - m.rhs(b)) / (2 * h);
      for (int i = 0; i < 4; ++i)
        CHECK(jac(i, j) == Approx(fd(i)).epsilon(1e-6).margin(1e-9 * jac.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("undriven relaxation follows the closed form") {
  const auto m = make(testparams::band(3, 0.0));
  const double t_end = 30.0;
  const auto tr = integrate(m, Eigen::VectorXd::Zero(3), t_end, 7);
  REQUIRE(tr.times.size() == 7);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    for (int l = 0; l < 3; ++l)
      CHECK(tr.states[k](l) ==
            Approx(m.thermal()(l) * (1.0 - std::exp(-m.gamma() * t))).epsilon(1e-6).margin(1e-6));
  }
}

TEST_CASE("both integrators agree on a driven trajectory") {
  const auto m = make(testparams::band(5, 5.0));
  IntegrationOptions rb, dp;
  dp.method = Method::dormand_prince;
  const auto a = integrate(m, m.thermal(), 20.0, 5, rb);
  const auto b = integrate(m, m.thermal(), 20.0, 5, dp);
  for (std::size_t k = 0; k < a.states.size(); ++k)
    CHECK((a.states[k] - b.states[k]).cwiseAbs().maxCoeff() <= 1e-5 * a.states[k].sum());
}

TEST_CASE("occupations stay non-negative at zero temperature") {
  auto c = testparams::band(4, 20.0);
  c.temperature = 0.0;
  const auto m = make(c);
  Eigen::VectorXd start(4);
  start << 0.0, 50.0, 0.0, 3.0;
  const auto tr = integrate(m, start, 100.0, 50);
  for (const auto& s : tr.states) CHECK((s.array() >= 0.0).all());
}

TEST_CASE("zero coupling steady state is the Bose-Einstein distribution") {
  const auto m = make(testparams::band(5, 0.0));
  const auto ss = steady_state(m);
  CHECK((ss.occupations - m.thermal()).cwiseAbs().maxCoeff() <= 1e-8 * m.thermal().maxCoeff());
}

TEST_CASE("Newton steady state matches long-time integration") {
  const auto m = make(testparams::band(5, 2.0));
  const auto ss = steady_state(m);
  CHECK(ss.residual <= 1e-8);
  const auto late = state_at_time(m, 400.0 / m.gamma());
  CHECK((ss.occupations - late).cwiseAbs().maxCoeff() <= 1e-6 * late.sum());
}

TEST_CASE("simplified steady total equals the thermal total") {
  const auto m = make(testparams::band(5, 5.0), EquationForm::simplified);
  const auto ss = steady_state(m);
  CHECK(ss.occupations.sum() == Approx(m.thermal().sum()).epsilon(1e-7));
}

TEST_CASE("pumping raises the simplified steady total by N Gamma_p / gamma") {
  auto c = testparams::band(5, 5.0);
  c.pump_rate = 2000.0;
  const auto m = make(c, EquationForm::simplified);
  const auto ss = steady_state(m);
  CHECK(ss.occupations.sum() ==
        Approx(5 * c.pump_rate / *c.gamma + m.thermal().sum()).epsilon(1e-7));
  CHECK(m.effective_temperature() > c.temperature);
}

TEST_CASE("red detuning condenses into the lowest mode, blue into the highest") {
  const auto red = make(testparams::band(5, 5.0, -1e5));
  const auto blue = make(testparams::band(5, 5.0, 1e5));
  const auto sr = steady_state(red).occupations;
  const auto sb = steady_state(blue).occupations;
  const auto cr = condensate_fraction(sr, red);
  const auto cb = condensate_fraction(sb, blue);
  CHECK(cr.argmax_mode == 0);
  CHECK(cb.argmax_mode == 4);
  CHECK(cr.target_mode == 0);
  CHECK(cb.target_mode == 4);
  const auto th = red.thermal();
  CHECK(*cr.fraction > th(0) / th.sum());
  CHECK(*cb.fraction > th(4) / th.sum());
}

TEST_CASE("condensate fraction of an empty system is undefined") {
  const auto c = condensate_fraction(Eigen::VectorXd::Zero(3), -1.0);
  CHECK_FALSE(c.fraction.has_value());
}

TEST_CASE("net transition rate sign") {
  const auto sym = make(testparams::band(5, 5.0, 0.0));
  const Eigen::VectorXd n = Eigen::VectorXd::Constant(5, 100.0);
  for (int j = 1; j < 5; ++j) CHECK(net_transition_rate(sym, n, j, 0) == Approx(0.0).margin(1e-12));
  const auto red = make(testparams::band(5, 5.0, -1e5));
  for (int j = 1; j < 5; ++j) CHECK(net_transition_rate(red, n, j, 0) > 0.0);
  CHECK_THROWS_AS(net_transition_rate(red, n, 2, 2), ValidationError);
}

TEST_CASE("lowest mode dominates the N = 5 chain by 20 ms") {
  const auto m = make(testparams::chain5(0.01 * 1e6));
  const auto n = state_at_time(m, 0.02);
  Eigen::Index arg;
  n.maxCoeff(&arg);
  CHECK(arg == 0);
}

TEST_CASE("condensation time scales as the inverse square of the coupling") {
  const auto a = condensation_time(make(testparams::band(5, 3.0)));
  const auto b = condensation_time(make(testparams::band(5, 30.0)));
  const double ca = a.time * 9.0, cb = b.time * 900.0;
  CHECK(ca == Approx(cb).epsilon(0.15));
}

TEST_CASE("runaway is reported as a solver failure") {
  const auto m = make(testparams::band(5, 5.0, 1e6));
  CHECK_THROWS_AS(steady_state(m), SolverError);
}

TEST_CASE("simplified validity diagnostics") {
  const auto m = make(testparams::band(5, 5.0));
  const auto v = m.simplified_validity(m.thermal());
  CHECK(v.detuning_in_band);
  const auto far = make(testparams::band(5, 5.0, -1e7));
  CHECK_FALSE(far.simplified_validity(far.thermal()).detuning_in_band);
}
