#pragma once

#include <cmath>
#include <complex>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "frohlich/core/mode_system.hpp"
#include "frohlich/errors.hpp"
#include "frohlich/quantum/fock_basis.hpp"
#include "frohlich/quantum/operators.hpp"

namespace frohlich::quantum {

struct JumpChannel {
  std::string name;
  SparseOp op;
  double rate = 0.0;
};

enum class ModelKind { reduced, full };

/// d rho/dt = -i[H, rho] + sum_k rate_k D[L_k] rho on a truncated Fock space.
struct LindbladModel {
  ModelKind kind = ModelKind::reduced;
  FockBasis basis;
  SparseOp hamiltonian;
  std::vector<JumpChannel> channels;
  std::vector<int> phonon_modes;  // basis mode index of each phonon mode, in mode order
  int photon_mode = -1;           // basis mode index of the cavity mode, -1 if absent
  std::vector<double> thermal;    // thermal occupation of each phonon mode

  std::size_t dimension() const { return basis.dimension(); }
  int n_phonon_modes() const { return static_cast<int>(phonon_modes.size()); }

  /// sum_k rate_k L_k^dag L_k
  SparseOp decay_operator() const {
    SparseOp k(hamiltonian.rows(), hamiltonian.cols());
    for (const auto& c : channels) k += c.rate * SparseOp(c.op.adjoint() * c.op);
    return k;
  }

  /// H - (i/2) sum_k rate_k L_k^dag L_k
  SparseOp effective_hamiltonian() const {
    return hamiltonian - cplx(0.0, 0.5) * decay_operator();
  }

  /// True when H is diagonal and every jump maps basis states to basis states:
  /// populations then evolve independently of coherences.
  bool population_closed() const {
    if (!is_diagonal(hamiltonian)) return false;
    for (const auto& c : channels)
      if (!is_monomial(c.op)) return false;
    return true;
  }

  /// Phonon occupation <n_l> of each basis state, as a (dim x N) table.
  Eigen::MatrixXd occupation_table() const {
    const auto dim = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd t(dim, n_phonon_modes());
    for (Eigen::Index k = 0; k < dim; ++k)
      for (int l = 0; l < n_phonon_modes(); ++l)
        t(k, l) = basis.occupation(static_cast<std::size_t>(k), phonon_modes[l]);
    return t;
  }
};

/// Human-readable channel list for auditing a model.
inline std::string describe(const LindbladModel& m) {
  std::ostringstream os;
  os << (m.kind == ModelKind::reduced ? "reduced" : "full") << " model, dimension "
     << m.dimension() << ", cutoffs";
  for (int i = 0; i < m.basis.modes(); ++i) os << ' ' << m.basis.name(i) << '=' << m.basis.cutoff(i);
  os << "\nhamiltonian: " << m.hamiltonian.nonZeros() << " nonzeros"
     << (is_diagonal(m.hamiltonian) ? " (diagonal)" : "") << '\n';
  os << "channels:\n";
  os << std::setprecision(6);
  for (const auto& c : m.channels) os << "  " << std::left << std::setw(28) << c.name << c.rate << '\n';
  return os.str();
}

struct ReducedModelOptions {
  std::vector<int> cutoffs;            // one per phonon mode
  bool include_energy_shifts = false;  // cavity-induced H~ (diagonal, no effect on populations)
  bool include_free_hamiltonian = false;
  double dimension_budget = 2e6;
};

struct FullModelOptions {
  std::vector<int> phonon_cutoffs;
  int photon_cutoff = 5;
  double dimension_budget = 2e6;
};

namespace detail {

inline void check_budget(const std::vector<int>& cutoffs, double budget, const char* what) {
  const double dim = FockBasis::dimension_of(cutoffs);
  if (dim > budget) {
    std::ostringstream os;
    os << what << ": Hilbert-space dimension " << dim << " exceeds the budget of " << budget
       << " (cutoffs";
    for (int c : cutoffs) os << ' ' << c;
    os << "); lower the cutoffs or raise the budget";
    throw ValidationError(os.str());
  }
}

inline std::string idx(int l) { return std::to_string(l + 1); }

inline void add_channel(std::vector<JumpChannel>& out, std::string name, SparseOp op, double rate) {
  if (rate < 0.0) throw ValidationError("negative jump rate for channel " + name);
  if (rate == 0.0) return;
  op.prune(cplx(0.0), 0.0);
  out.push_back({std::move(name), std::move(op), rate});
}

}  // namespace detail

/// Mechanical master equation with the cavity adiabatically eliminated, in the
/// interaction picture of the free phonon Hamiltonian (every dissipator
/// commutes with it, so populations are unaffected by that choice).
inline LindbladModel build_reduced_lindblad(const ModeSystem& sys, const ReducedModelOptions& opt) {
  const int n = sys.n_modes;
  if (static_cast<int>(opt.cutoffs.size()) != n)
    throw ValidationError("reduced model needs one cutoff per phonon mode");
  if (sys.pump_rate > 0.0)
    throw ValidationError(
        "incoherent pumping has no Lindblad form in this model; set pump_rate = 0 for the "
        "quantum solvers");
  detail::check_budget(opt.cutoffs, opt.dimension_budget, "reduced model");

  std::vector<std::string> names;
  for (int l = 0; l < n; ++l) names.push_back("b" + detail::idx(l));
  LindbladModel m;
  m.kind = ModelKind::reduced;
  m.basis = FockBasis(opt.cutoffs, names);
  for (int l = 0; l < n; ++l) m.phonon_modes.push_back(l);
  m.thermal = sys.thermal;

  std::vector<SparseOp> b, bd;
  for (int l = 0; l < n; ++l) {
    b.push_back(annihilation(m.basis, l));
    bd.push_back(creation(m.basis, l));
  }
  const auto& w = sys.frequencies;
  const auto& G = sys.rate;
  const auto& u2 = sys.coupling_sq;
  auto& ch = m.channels;
  using detail::add_channel;
  using detail::idx;

  for (int l = 0; l < n; ++l) {
    add_channel(ch, "b" + idx(l), b[l], sys.gamma * (1.0 + sys.thermal[l]));
    add_channel(ch, "b" + idx(l) + "^dag", bd[l], sys.gamma * sys.thermal[l]);
  }
  for (int l = 0; l < n; ++l) {
    add_channel(ch, "b" + idx(l) + " b" + idx(l), SparseOp(b[l] * b[l]), u2(l, l) * G(2.0 * w[l]));
    add_channel(ch, "b" + idx(l) + "^dag b" + idx(l) + "^dag", SparseOp(bd[l] * bd[l]),
                u2(l, l) * G(-2.0 * w[l]));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double c = 4.0 * u2(i, j);
      const std::string si = idx(i), sj = idx(j);
      add_channel(ch, "b" + si + " b" + sj, SparseOp(b[i] * b[j]), c * G(w[i] + w[j]));
      add_channel(ch, "b" + si + "^dag b" + sj + "^dag", SparseOp(bd[i] * bd[j]),
                  c * G(-w[i] - w[j]));
      add_channel(ch, "b" + si + " b" + sj + "^dag", SparseOp(b[i] * bd[j]), c * G(w[i] - w[j]));
      add_channel(ch, "b" + si + "^dag b" + sj, SparseOp(bd[i] * b[j]), c * G(w[j] - w[i]));
    }
  // Collective dephasing, one channel per cavity: sum_i U_{k,ii} (b^dag b + b b^dag).
  for (int k = 0; k < sys.n_cavities; ++k) {
    const auto& uk = sys.cavity_couplings[k];
    SparseOp a = diagonal(m.basis, [&](const std::vector<int>& occ) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += uk(i, i) * (2.0 * occ[i] + 1.0);
      return s;
    });
    add_channel(ch, "dephasing[" + std::to_string(k + 1) + "]", std::move(a), G(0.0));
  }

  m.hamiltonian = SparseOp(m.dimension(), m.dimension());
  if (opt.include_free_hamiltonian)
    m.hamiltonian += diagonal(m.basis, [&](const std::vector<int>& occ) {
      double e = 0.0;
      for (int l = 0; l < n; ++l) e += w[l] * occ[l];
      return e;
    });
  if (opt.include_energy_shifts) {
    auto shift = [&](double x) { return G.energy_shift(x); };
    m.hamiltonian += diagonal(m.basis, [&](const std::vector<int>& occ) {
      double e = 0.0;
      for (int k = 0; k < sys.n_cavities; ++k) {
        const auto& uk = sys.cavity_couplings[k];
        double a = 0.0;
        for (int i = 0; i < n; ++i) {
          const double ni = occ[i], u = uk(i, i) * uk(i, i);
          e += u * (shift(2.0 * w[i]) * ni * (ni - 1.0) + shift(-2.0 * w[i]) * (ni + 1.0) * (ni + 2.0));
          a += uk(i, i) * (2.0 * ni + 1.0);
        }
        e += shift(0.0) * a * a;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j) {
            const double ni = occ[i], nj = occ[j], c = 4.0 * uk(i, j) * uk(i, j);
            e += c * (shift(w[i] + w[j]) * ni * nj + shift(-w[i] - w[j]) * (ni + 1.0) * (nj + 1.0) +
                      shift(w[i] - w[j]) * ni * (nj + 1.0) + shift(w[j] - w[i]) * (ni + 1.0) * nj);
          }
      }
      return e;
    });
  }
  return m;
}

/// Cavity fluctuation mode d plus N <= 2 phonon modes with the linearised
/// quadratic coupling, in the lab frame:
///   H = -Delta d^dag d + sum_j omega_j b_j^dag b_j
///       + eps (alpha d^dag + alpha^* d) [sum_j U_jj X_j^2 + sum_{i<j} 2 U_ij X_i X_j],
/// with X = b + b^dag and eps = 2 g0 / (N+1). Basis order: d first, then b_1, b_2.
inline LindbladModel build_full_lindblad(const ModeSystem& sys, const FullModelOptions& opt) {
  const int n = sys.n_modes;
  if (n > 2) throw ValidationError("the full optomechanical model is limited to N <= 2");
  if (sys.n_cavities != 1) throw ValidationError("the full optomechanical model needs one cavity");
  if (sys.pump_rate > 0.0)
    throw ValidationError("incoherent pumping has no Lindblad form; set pump_rate = 0");
  if (static_cast<int>(opt.phonon_cutoffs.size()) != n)
    throw ValidationError("full model needs one phonon cutoff per mode");
  if (opt.photon_cutoff < 1) throw ValidationError("photon cutoff must be >= 1");
  std::vector<int> cutoffs{opt.photon_cutoff};
  cutoffs.insert(cutoffs.end(), opt.phonon_cutoffs.begin(), opt.phonon_cutoffs.end());
  detail::check_budget(cutoffs, opt.dimension_budget, "full model");

  std::vector<std::string> names{"d"};
  for (int l = 0; l < n; ++l) names.push_back("b" + detail::idx(l));
  LindbladModel m;
  m.kind = ModelKind::full;
  m.basis = FockBasis(cutoffs, names);
  m.photon_mode = 0;
  for (int l = 0; l < n; ++l) m.phonon_modes.push_back(l + 1);
  m.thermal = sys.thermal;

  const SparseOp d = annihilation(m.basis, 0);
  const SparseOp dd = creation(m.basis, 0);
  std::vector<SparseOp> b, x;
  for (int l = 0; l < n; ++l) {
    b.push_back(annihilation(m.basis, l + 1));
    x.push_back(b.back() + SparseOp(b.back().adjoint()));
  }
  const double eps = 2.0 * sys.g0 / (n + 1);
  const cplx alpha = sys.cavity_amplitude;
  SparseOp coupling(m.dimension(), m.dimension());
  for (int j = 0; j < n; ++j) coupling += sys.coupling(j, j) * SparseOp(x[j] * x[j]);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) coupling += 2.0 * sys.coupling(i, j) * SparseOp(x[i] * x[j]);
  const SparseOp field = alpha * dd + std::conj(alpha) * d;

  m.hamiltonian = -sys.detuning * number(m.basis, 0);
  for (int j = 0; j < n; ++j) m.hamiltonian += sys.frequencies[j] * number(m.basis, j + 1);
  m.hamiltonian += eps * SparseOp(field * coupling);
  m.hamiltonian.prune(cplx(0.0), 0.0);

  detail::add_channel(m.channels, "d", d, sys.kappa);
  for (int l = 0; l < n; ++l) {
    detail::add_channel(m.channels, "b" + detail::idx(l), b[l], sys.gamma * (1.0 + sys.thermal[l]));
    detail::add_channel(m.channels, "b" + detail::idx(l) + "^dag", SparseOp(b[l].adjoint()),
                        sys.gamma * sys.thermal[l]);
  }
  return m;
}

/// L(rho) = -i (H_eff rho - rho H_eff^dag) + sum_k rate_k L_k rho L_k^dag.
class LiouvillianAction {
 public:
  explicit LiouvillianAction(const LindbladModel& m)
      : heff_(m.effective_hamiltonian()) {
    for (const auto& c : m.channels) jumps_.push_back(c.op * std::sqrt(c.rate));
  }

  void operator()(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
    const cplx mi(0.0, -1.0);
    out.noalias() = mi * (heff_ * rho);
    // rho H_eff^dag = (H_eff rho^dag)^dag
    const Eigen::MatrixXcd t = heff_ * rho.adjoint();
    out -= mi * t.adjoint();
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      const Eigen::MatrixXcd lr = jumps_[k] * rho;
      out += (jumps_[k] * lr.adjoint()).adjoint();
    }
  }

  Eigen::MatrixXcd operator()(const Eigen::MatrixXcd& rho) const {
    Eigen::MatrixXcd out(rho.rows(), rho.cols());
    (*this)(rho, out);
    return out;
  }

  /// J(rho) = sum_k rate_k L_k rho L_k^dag only.
  Eigen::MatrixXcd jump_part(const Eigen::MatrixXcd& rho) const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      const Eigen::MatrixXcd lr = jumps_[k] * rho;
      out += (jumps_[k] * lr.adjoint()).adjoint();
    }
    return out;
  }

  const SparseOp& effective_hamiltonian() const { return heff_; }

 private:
  SparseOp heff_;
  std::vector<SparseOp> jumps_;
};

/// Vectorised Liouvillian acting on column-major vec(rho):
///   vec(A X B) = (B^T (x) A) vec(X).
inline SparseOp liouvillian_matrix(const LindbladModel& m) {
  const SparseOp id = identity(m.basis);
  const SparseOp heff = m.effective_hamiltonian();
  const cplx mi(0.0, -1.0);
  SparseOp l = mi * kron(id, heff);
  l += cplx(0.0, 1.0) * kron(SparseOp(heff.conjugate()), id);
  for (const auto& c : m.channels) l += c.rate * kron(SparseOp(c.op.conjugate()), c.op);
  l.prune(cplx(0.0), 0.0);
  return l;
}

/// Phonon occupations <n_l> = Tr(rho n_l) from the diagonal of rho.
inline Eigen::VectorXd phonon_means(const LindbladModel& m, const Eigen::VectorXd& populations) {
  return m.occupation_table().transpose() * populations;
}

/// Thermal product state of the phonon modes (cavity mode in vacuum),
/// truncated to the cutoffs and renormalised; returned as basis populations.
inline Eigen::VectorXd thermal_populations(const LindbladModel& m) {
  const auto dim = static_cast<Eigen::Index>(m.dimension());
  Eigen::VectorXd p(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto occ = m.basis.occupations(static_cast<std::size_t>(k));
    double w = 1.0;
    if (m.photon_mode >= 0 && occ[m.photon_mode] != 0) w = 0.0;
    for (int l = 0; l < m.n_phonon_modes(); ++l) {
      const double nb = m.thermal[l];
      const int q = occ[m.phonon_modes[l]];
      w *= nb > 0.0 ? std::pow(nb / (nb + 1.0), q) / (nb + 1.0) : (q == 0 ? 1.0 : 0.0);
    }
    p(k) = w;
  }
  return p / p.sum();
}

}  // namespace frohlich::quantum
