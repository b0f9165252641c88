#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "frohlich/errors.hpp"
#include "frohlich/ode/dormand_prince.hpp"
#include "frohlich/quantum/lindblad.hpp"

namespace frohlich::quantum {

struct DensityEvolutionOptions {
  double tol = 1e-8;           // relative tolerance of the integrator
  double trace_tol = 1e-8;     // abort when |Tr rho - 1| exceeds this
  double positivity_tol = 1e-6;
  double dimension_budget = 4e3;
};

struct DensityEvolution {
  std::vector<double> times;
  Eigen::MatrixXd occupations;  // one row per sample, one column per phonon mode
  Eigen::MatrixXcd final_state;
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;  // of the final state
};

inline Eigen::VectorXd phonon_means(const LindbladModel& m, const Eigen::MatrixXcd& rho) {
  return phonon_means(m, Eigen::VectorXd(rho.diagonal().real()));
}

/// Integrates the master equation from rho0 and samples phonon occupations.
/// The integrator preserves the trace exactly up to rounding; a drift beyond
/// trace_tol, loss of hermiticity or a negative eigenvalue aborts.
inline DensityEvolution density_matrix_evolve(const LindbladModel& m, const Eigen::MatrixXcd& rho0,
                                              double t_end, std::vector<double> samples,
                                              const DensityEvolutionOptions& opt = {}) {
  const auto d = static_cast<Eigen::Index>(m.dimension());
  if (d > opt.dimension_budget) {
    std::ostringstream os;
    os << "density-matrix integration limited to dimension " << opt.dimension_budget
       << ", model has " << d << " (" << (16.0 * d * d / 1e6) << " MB per matrix)";
    throw ValidationError(os.str());
  }
  if (rho0.rows() != d || rho0.cols() != d) throw ValidationError("rho0 has the wrong size");
  if (std::abs(rho0.trace() - 1.0) > opt.trace_tol) throw ValidationError("rho0 must have unit trace");
  if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("rho0 must be Hermitian");

  std::sort(samples.begin(), samples.end());
  samples.erase(std::remove_if(samples.begin(), samples.end(),
                               [&](double t) { return t < 0.0 || t > t_end; }),
                samples.end());
  if (samples.empty() || samples.back() < t_end) samples.push_back(t_end);

  const LiouvillianAction action(m);
  auto rhs = [&action](double, const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) {
    action(rho, out);
  };
  ode::StepControl ctl;
  ctl.rtol = opt.tol;
  ctl.atol = opt.tol * 1e-3;
  ctl.dense_output = false;
  auto integ = ode::make_dormand_prince<Eigen::MatrixXcd>(rhs, ctl);
  integ.reset(0.0, rho0);

  DensityEvolution out;
  out.occupations.resize(static_cast<Eigen::Index>(samples.size()), m.n_phonon_modes());
  auto check_trace = [&](const Eigen::MatrixXcd& rho) {
    const double e = std::abs(rho.trace() - 1.0);
    out.max_trace_error = std::max(out.max_trace_error, e);
    if (e > opt.trace_tol) {
      std::ostringstream os;
      os << "trace drifted by " << e << " at t = " << integ.time();
      throw SolverError(os.str(), {integ.time(), e});
    }
  };
  for (std::size_t s = 0; s < samples.size(); ++s) {
    while (integ.time() < samples[s]) {
      integ.step(samples[s]);
      check_trace(integ.state());
    }
    out.times.push_back(samples[s]);
    out.occupations.row(static_cast<Eigen::Index>(s)) = phonon_means(m, integ.state()).transpose();
  }
  out.final_state = integ.state();
  const double herm = (out.final_state - out.final_state.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-8) throw SolverError("density matrix lost hermiticity");
  const Eigen::MatrixXcd h = 0.5 * (out.final_state + out.final_state.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  if (out.min_eigenvalue < -opt.positivity_tol) {
    std::ostringstream os;
    os << "density matrix has a negative eigenvalue " << out.min_eigenvalue;
    throw SolverError(os.str());
  }
  return out;
}

/// Density matrix of a single Fock state.
inline Eigen::MatrixXcd fock_density(const LindbladModel& m, const std::vector<int>& occupations) {
  const auto d = static_cast<Eigen::Index>(m.dimension());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  const auto k = static_cast<Eigen::Index>(m.basis.index(occupations));
  rho(k, k) = 1.0;
  return rho;
}

}  // namespace frohlich::quantum
