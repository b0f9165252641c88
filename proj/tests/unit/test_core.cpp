#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "frohlich/core/config.hpp"
#include "frohlich/core/mode_system.hpp"
#include "frohlich/core/rates.hpp"
#include "frohlich/core/spectrum.hpp"
#include "params.hpp"

using namespace frohlich;
using Catch::Approx;

TEST_CASE("single membrane keeps its bare frequency") {
  const auto w = mode_frequencies(1, 3.0, 2.0);
  REQUIRE(w.size() == 1);
  CHECK(w[0] == Approx(3.0).epsilon(1e-15));
}

TEST_CASE("mode frequencies of two coupled membranes") {
  // omega^2 = omega0^2 -/+ k/m for N = 2 (cos(pi/3) = 1/2).
  const double w0 = 1e8, km = w0 * w0 / 3.0;
  const auto w = mode_frequencies(2, w0, km);
  CHECK(w[0] == Approx(std::sqrt(w0 * w0 - km)).epsilon(1e-14));
  CHECK(w[1] == Approx(std::sqrt(w0 * w0 + km)).epsilon(1e-14));
}

TEST_CASE("too strong inter-membrane coupling is rejected") {
  CHECK_THROWS_AS(mode_frequencies(5, 1.0, 0.6), ValidationError);
}

TEST_CASE("multi-cavity coupling: direct sum against closed form") {
  for (int n = 2; n <= 30; ++n) {
    const double w0 = 1e6;
    const auto w = mode_frequencies(n, w0, w0 * w0 / 10.0);
    const auto direct = effective_coupling_squared(w, w0, n);
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        // independent long-double evaluation of the sum over cavities
        long double s = 0.0L;
        const long double step = std::numbers::pi_v<long double> / (n + 1);
        for (int k = 1; k <= n; ++k) {
          const long double u = static_cast<long double>(w0) /
                                std::sqrt(static_cast<long double>(w[i - 1]) * w[j - 1]) *
                                std::sin(k * i * step) * std::sin(k * j * step);
          s += u * u;
        }
        CHECK(direct(i - 1, j - 1) == Approx(static_cast<double>(s)).epsilon(1e-12));
        const double exact = full_array_coupling_exact(i, j, w, w0);
        CHECK(direct(i - 1, j - 1) == Approx(exact).epsilon(1e-12));
        if (classify_pair(i, j, n) == PairKind::generic)
          CHECK(direct(i - 1, j - 1) ==
                Approx(full_array_coupling_closed_form(i, j, w, w0)).epsilon(1e-12));
      }
  }
}

TEST_CASE("special pairs are exactly the mirror pairs") {
  CHECK(classify_pair(3, 3, 5) == PairKind::special_diagonal);
  CHECK(classify_pair(1, 5, 5) == PairKind::special_mirror);
  CHECK(classify_pair(2, 4, 5) == PairKind::special_mirror);
  CHECK(classify_pair(1, 2, 5) == PairKind::generic);
  CHECK(classify_pair(2, 2, 4) == PairKind::generic);
}

TEST_CASE("single cavity coupling reduces to the first row of the multi-cavity sum") {
  const auto w = mode_frequencies(4, 2.0, 0.5);
  const auto u = coupling_matrix(w, 2.0);
  const auto u2 = effective_coupling_squared(w, 2.0, 1);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(u2(i, j) == Approx(u(i, j) * u(i, j)).epsilon(1e-14));
  CHECK(u(0, 1) == Approx(u(1, 0)).epsilon(1e-15));
}

TEST_CASE("thermal occupations of the two-membrane reference system") {
  const auto sys = build_mode_system(testparams::pair(0.0));
  CHECK(sys.thermal[0] == Approx(1.15).margin(0.01));
  CHECK(sys.thermal[1] == Approx(0.71).margin(0.01));
}

TEST_CASE("thermal occupation limits") {
  CHECK(thermal_occupation(1e6, 0.0) == 0.0);
  const double w = 1e6, t = 10.0;  // kT >> hbar w
  CHECK(thermal_occupation(w, t) ==
        Approx(thermal_occupation_classical(w, t) - 0.5).epsilon(1e-6));
}

TEST_CASE("transition rate is a Lorentzian centred at minus the detuning") {
  const double kappa = 1e5, det = -3e4;
  const TransitionRate g(2.0, 3, kappa, det);
  const double eps2 = std::pow(2.0 * 2.0 / 4.0, 2);
  CHECK(g.peak() == Approx(eps2 * 4.0 / kappa).epsilon(1e-14));
  CHECK(g(-det + 123.0) == Approx(g(-det - 123.0)).epsilon(1e-14));
  CHECK(g(-det + 0.5 * kappa) == Approx(0.5 * g.peak()).epsilon(1e-14));
  for (double w : {-2e5, -1e4, 0.0, 7e4, 3e5})
    CHECK(2.0 * g.correlation(w).real() == Approx(g(w)).epsilon(1e-13));
  // consistency with the photon spectral density
  CHECK(g(1e4) == Approx(4.0 * 1.0 / 16.0 * photon_spectral_density(1e4, kappa, det, 4.0))
                      .epsilon(1e-13));
}

TEST_CASE("drive conversions round-trip") {
  const double kappa = 3e5, lambda = 1064e-9;
  for (double p : {1e-9, 5e-6, 7e-3}) {
    const double e = power_to_drive(p, lambda, kappa);
    CHECK(drive_to_power(e, lambda, kappa) == Approx(p).epsilon(1e-13));
  }
  SystemConfig c = testparams::band(5, 0.0);
  c.drive = AlphaMagnitude{123.0};
  CHECK(std::abs(coherent_amplitude(c)) == Approx(123.0).epsilon(1e-14));
  c.drive = DriveStrength{drive_strength(c)};
  CHECK(std::abs(coherent_amplitude(c)) == Approx(123.0).epsilon(1e-14));
}

TEST_CASE("coherent amplitude phase") {
  // kappa/2 - i Delta with Delta = 0 gives alpha = -2iE/kappa.
  const auto a = coherent_amplitude(1.0, 2.0, 0.0);
  CHECK(a.real() == Approx(0.0).margin(1e-15));
  CHECK(a.imag() == Approx(-1.0));
}

TEST_CASE("g0 from the frequency curvature and zero-point length") {
  SystemConfig c = testparams::band(5, 1.0);
  c.g0.reset();
  c.mass = 40e-12;
  c.omega0 = 2.0 * std::numbers::pi * 134e3;
  c.coupling_ratio = c.omega0 * c.omega0 / 10.0;
  c.big_g = 2.0 * std::numbers::pi * 15e6 * 1e18;
  const double x0sq = constants::hbar / (2.0 * 40e-12 * c.omega0);
  CHECK(single_photon_coupling(c) == Approx(*c.big_g * x0sq).epsilon(1e-14));
  CHECK(single_photon_coupling(c) == Approx(1.5e-4).epsilon(0.05));
}

TEST_CASE("validation collects every problem") {
  SystemConfig c;
  c.n_membranes = 3;
  c.omega0 = 1.0;
  c.coupling_ratio = 0.1;
  c.kappa = 1.0;
  c.gamma = 1.0;
  c.quality_factor = 10.0;
  c.g0 = 1.0;
  try {
    validate(c);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("gamma or quality_factor") != std::string::npos);
    CHECK(msg.find("alpha_magnitude") != std::string::npos);
    CHECK(msg.find("drive_strength") != std::string::npos);
    CHECK(msg.find("input_power") != std::string::npos);
  }
}

TEST_CASE("validation rejects out-of-range values") {
  auto c = testparams::band(5, 1.0);
  CHECK_NOTHROW(validate(c));
  auto bad = c;
  bad.temperature = -1.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = c;
  bad.n_cavities = 6;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = c;
  bad.coupling_ratio = 0.6e12;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = c;
  bad.g0.reset();
  bad.big_g = 1.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = c;
  bad.g0 = 0.0;  // zero coupling is a valid (thermal) configuration
  CHECK_NOTHROW(validate(bad));
}

TEST_CASE("quality factor sets the damping") {
  auto c = testparams::band(5, 1.0);
  c.gamma.reset();
  c.quality_factor = 1e7;
  CHECK(mechanical_damping(c) == Approx(0.1));
}

TEST_CASE("with_coupling_product sets g0|alpha|") {
  auto c = testparams::band(5, 1.0);
  c.g0 = 2e-4;
  const auto d = with_coupling_product(c, 5.0);
  CHECK(coupling_product(d) == Approx(5.0).epsilon(1e-14));
}

TEST_CASE("mode system bundles consistent quantities") {
  auto c = testparams::band(5, 5.0);
  c.n_cavities = 5;
  const auto s = build_mode_system(c);
  CHECK(s.coupling_product() == Approx(5.0));
  CHECK(s.cavity_couplings.size() == 5);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(5, 5);
  for (const auto& u : s.cavity_couplings) sum += u.cwiseProduct(u);
  CHECK((sum - s.coupling_sq).cwiseAbs().maxCoeff() < 1e-12 * s.coupling_sq.maxCoeff());
  CHECK(s.rate.peak() == Approx(4.0 * std::pow(2.0 * 5.0 / 6.0, 2) / 1e5));
}
