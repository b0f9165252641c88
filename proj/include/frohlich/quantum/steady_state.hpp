#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "frohlich/errors.hpp"
#include "frohlich/quantum/lindblad.hpp"

namespace frohlich::quantum {

struct QuantumSteadyState {
  Eigen::VectorXd populations;           // diagonal of rho in the Fock basis
  std::optional<Eigen::MatrixXcd> rho;   // full density matrix when it was formed
  Eigen::VectorXd occupations;           // phonon means <n_l>
  std::string method;
  double residual = 0.0;
  int iterations = 0;
};

/// Classical rate matrix W (dp/dt = W p) of a population-closed model.
inline Eigen::SparseMatrix<double> pauli_rate_matrix(const LindbladModel& m) {
  if (!m.population_closed())
    throw ValidationError("populations do not close: the model has off-diagonal dynamics");
  const auto dim = static_cast<Eigen::Index>(m.dimension());
  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXd out_rate = Eigen::VectorXd::Zero(dim);
  for (const auto& c : m.channels) {
    for (Eigen::Index col = 0; col < c.op.outerSize(); ++col)
      for (SparseOp::InnerIterator it(c.op, col); it; ++it) {
        if (it.row() == col) continue;  // elastic: no population change
        const double r = c.rate * std::norm(it.value());
        if (r == 0.0) continue;
        t.emplace_back(it.row(), col, r);
        out_rate(col) += r;
      }
  }
  for (Eigen::Index k = 0; k < dim; ++k) t.emplace_back(k, k, -out_rate(k));
  Eigen::SparseMatrix<double> w(dim, dim);
  w.setFromTriplets(t.begin(), t.end());
  return w;
}

/// Exact steady state of a population-closed model from its rate matrix.
inline QuantumSteadyState steady_state_populations(const LindbladModel& m) {
  const Eigen::SparseMatrix<double> w = pauli_rate_matrix(m);
  const auto dim = w.rows();
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index col = 0; col < w.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(w, col); it; ++it)
      if (it.row() != 0) t.emplace_back(it.row(), col, it.value());
  // W is singular with a one-dimensional kernel; pin p_0 = 1 with a sparse
  // identity row (a dense normalisation row would ruin the fill-in) and
  // normalise afterwards.
  t.emplace_back(0, 0, 1.0);
  Eigen::SparseMatrix<double> a(dim, dim);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  rhs(0) = 1.0;
  const double scale = std::max(1e-300, (-Eigen::VectorXd(w.diagonal())).maxCoeff());
  auto residual_of = [&](const Eigen::VectorXd& q) {
    return (w * q).cwiseAbs().maxCoeff() / (scale * q.cwiseAbs().maxCoeff());
  };
  Eigen::VectorXd p;
  bool solved = false;
  if (dim > 4000) {
    // Direct factorisation fills in badly on multi-mode grids.
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-3);
    it.preconditioner().setFillfactor(2);
    it.setTolerance(1e-14);
    it.setMaxIterations(2000);
    it.compute(a);
    if (it.info() == Eigen::Success) {
      p = it.solve(rhs);
      solved = p.allFinite() && residual_of(p) < 1e-10;
    }
  }
  if (!solved) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SolverError("rate-matrix factorisation failed");
    p = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !p.allFinite()) throw SolverError("rate-matrix solve failed");
  }
  p = p.cwiseMax(0.0);
  p /= p.sum();
  QuantumSteadyState s;
  s.populations = p;
  s.occupations = phonon_means(m, p);
  s.method = "populations";
  s.residual = residual_of(p);
  return s;
}

/// Steady state from a sparse LU solve of the vectorised Liouvillian with the
/// first equation replaced by Tr(rho) = 1. Cost grows like dim^4; meant for small models.
inline QuantumSteadyState steady_state_direct(const LindbladModel& m, double dimension_budget = 400) {
  const auto d = static_cast<Eigen::Index>(m.dimension());
  if (d > dimension_budget) {
    std::ostringstream os;
    os << "direct Liouvillian solve limited to dimension " << dimension_budget << ", model has " << d;
    throw ValidationError(os.str());
  }
  const SparseOp l = liouvillian_matrix(m);
  std::vector<Eigen::Triplet<cplx>> t;
  for (Eigen::Index col = 0; col < l.outerSize(); ++col)
    for (SparseOp::InnerIterator it(l, col); it; ++it)
      if (it.row() != 0) t.emplace_back(it.row(), col, it.value());
  for (Eigen::Index k = 0; k < d; ++k) t.emplace_back(0, k * d + k, 1.0);
  SparseOp a(d * d, d * d);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  Eigen::SparseLU<SparseOp, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SolverError("Liouvillian factorisation failed");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d * d);
  rhs(0) = 1.0;
  const Eigen::VectorXcd v = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !v.allFinite()) throw SolverError("Liouvillian solve failed");
  Eigen::MatrixXcd rho = Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace();
  QuantumSteadyState s;
  s.populations = rho.diagonal().real();
  s.occupations = phonon_means(m, s.populations);
  const Eigen::VectorXcd lv = l * Eigen::Map<const Eigen::VectorXcd>(rho.data(), d * d);
  double scale = 0.0;
  for (Eigen::Index col = 0; col < l.outerSize(); ++col)
    for (SparseOp::InnerIterator it(l, col); it; ++it) scale = std::max(scale, std::abs(it.value()));
  s.residual = lv.cwiseAbs().maxCoeff() / scale;
  s.rho = std::move(rho);
  s.method = "direct";
  return s;
}

struct JumpChainOptions {
  double tol = 1e-10;       // relative GMRES residual
  int restart = 40;
  int max_iterations = 3000;
  double dense_budget = 3000;  // largest dimension for the dense eigendecomposition
};

/// Steady state through the jump-to-jump fixed point rho = M(rho),
///   M(rho) = -L_H^{-1} J(rho),  L_H(X) = -i (H_eff X - X H_eff^dag),
/// with L_H inverted exactly in the eigenbasis of H_eff and the fixed point
/// found by restarted GMRES on (I - M + u Tr) rho = u. Lab-frame
/// oscillations never need to be resolved in time, so this handles the full
/// optomechanical model where time stepping is hopeless.
class JumpChainSolver {
 public:
  JumpChainSolver(const LindbladModel& m, const JumpChainOptions& opt)
      : model_(&m), action_(m), opt_(opt) {
    const auto d = static_cast<Eigen::Index>(m.dimension());
    if (d > opt.dense_budget) {
      std::ostringstream os;
      os << "jump-chain solver limited to dimension " << opt.dense_budget << ", model has " << d;
      throw ValidationError(os.str());
    }
    const Eigen::MatrixXcd heff = Eigen::MatrixXcd(action_.effective_hamiltonian());
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(heff);
    if (es.info() != Eigen::Success) throw SolverError("eigendecomposition of H_eff failed");
    v_ = es.eigenvectors();
    lambda_ = es.eigenvalues();
    vinv_ = v_.partialPivLu().inverse();
    const double hn = std::max(1e-300, heff.cwiseAbs().maxCoeff());
    const double err = (heff * v_ - v_ * lambda_.asDiagonal()).cwiseAbs().maxCoeff() / hn;
    if (!(err < 1e-8)) throw SolverError("eigendecomposition of H_eff is inaccurate");
    inv_denom_.resize(d, d);
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < d; ++i) {
        const cplx den = lambda_(i) - std::conj(lambda_(j));
        dmin = std::min(dmin, std::abs(den));
        inv_denom_(i, j) = 1.0 / den;
      }
    if (!(dmin > 1e-14 * hn))
      throw SolverError("jump-chain solver needs every state to decay (H_eff has a real eigenvalue)");
  }

  /// M(rho) = -L_H^{-1} J(rho)
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const {
    const Eigen::MatrixXcd y = action_.jump_part(rho);
    Eigen::MatrixXcd z = vinv_ * (cplx(0.0, 1.0) * y) * vinv_.adjoint();
    z.array() *= inv_denom_.array();
    return -(v_ * z * v_.adjoint());
  }

  QuantumSteadyState solve(const Eigen::MatrixXcd& guess) const {
    const Eigen::MatrixXcd& u = guess;
    auto op = [&](const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd {
      return x - apply(x) + u * x.trace();
    };
    auto dot = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
      return (a.array().conjugate() * b.array()).sum();
    };
    const double bnorm = u.norm();
    Eigen::MatrixXcd x = guess;
    int total = 0;
    double rel = 1.0;
    const int m = opt_.restart;
    std::vector<Eigen::MatrixXcd> basis;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + 1, m);
    std::vector<cplx> cs(m), sn(m), g(m + 1);
    while (total < opt_.max_iterations) {
      Eigen::MatrixXcd r = u - op(x);
      const double beta = r.norm();
      rel = beta / bnorm;
      if (rel <= opt_.tol) break;
      basis.clear();
      basis.push_back(r / beta);
      h.setZero();
      std::fill(g.begin(), g.end(), cplx(0.0));
      g[0] = beta;
      int k = 0;
      for (; k < m && total < opt_.max_iterations; ++k) {
        ++total;
        Eigen::MatrixXcd w = op(basis[k]);
        for (int i = 0; i <= k; ++i) {
          h(i, k) = dot(basis[i], w);
          w -= h(i, k) * basis[i];
        }
        const double hn = w.norm();
        h(k + 1, k) = hn;
        for (int i = 0; i < k; ++i) {
          const cplx a = h(i, k), b = h(i + 1, k);
          h(i, k) = cs[i] * a + sn[i] * b;
          h(i + 1, k) = -std::conj(sn[i]) * a + cs[i] * b;
        }
        const cplx a = h(k, k), b = h(k + 1, k);
        const double r_ = std::sqrt(std::norm(a) + std::norm(b));
        if (std::abs(a) == 0.0) {
          cs[k] = 0.0;
          sn[k] = 1.0;
        } else {
          cs[k] = std::abs(a) / r_;
          sn[k] = (a / std::abs(a)) * std::conj(b) / r_;
        }
        h(k, k) = cs[k] * a + sn[k] * b;
        h(k + 1, k) = 0.0;
        g[k + 1] = -std::conj(sn[k]) * g[k];
        g[k] = cs[k] * g[k];
        rel = std::abs(g[k + 1]) / bnorm;
        if (hn > 0.0) basis.push_back(w / hn);
        if (rel <= opt_.tol || hn == 0.0) {
          ++k;
          break;
        }
      }
      Eigen::VectorXcd y(k);
      for (int i = k - 1; i >= 0; --i) {
        cplx s = g[i];
        for (int j = i + 1; j < k; ++j) s -= h(i, j) * y(j);
        y(i) = s / h(i, i);
      }
      for (int i = 0; i < k; ++i) x += y(i) * basis[i];
    }
    const double final_rel = (u - op(x)).norm() / bnorm;
    if (!(final_rel <= 10.0 * opt_.tol)) {
      std::ostringstream os;
      os << "jump-chain GMRES did not converge (relative residual " << final_rel << " after "
         << total << " iterations)";
      throw SolverError(os.str());
    }
    Eigen::MatrixXcd rho = 0.5 * (x + x.adjoint());
    rho /= rho.trace().real();
    QuantumSteadyState s;
    s.populations = rho.diagonal().real();
    s.occupations = phonon_means(*model_, s.populations);
    s.residual = final_rel;
    s.iterations = total;
    s.rho = std::move(rho);
    s.method = "jump-chain";
    return s;
  }

 private:
  const LindbladModel* model_;
  LiouvillianAction action_;
  JumpChainOptions opt_;
  Eigen::MatrixXcd v_, vinv_, inv_denom_;
  Eigen::VectorXcd lambda_;
};

inline QuantumSteadyState steady_state_jump_chain(const LindbladModel& m,
                                                  const JumpChainOptions& opt = {}) {
  const JumpChainSolver solver(m, opt);
  const Eigen::VectorXd p = thermal_populations(m);
  return solver.solve(Eigen::MatrixXcd(p.cast<cplx>().asDiagonal()));
}

/// Picks the cheapest exact method: population closure, then a direct solve
/// for small models, then the jump-chain iteration.
inline QuantumSteadyState steady_state(const LindbladModel& m) {
  if (m.population_closed()) return steady_state_populations(m);
  if (m.dimension() <= 120) return steady_state_direct(m);
  return steady_state_jump_chain(m);
}

}  // namespace frohlich::quantum
