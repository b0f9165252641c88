#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "frohlich/errors.hpp"
#include "frohlich/parallel.hpp"
#include "frohlich/quantum/lindblad.hpp"
#include "frohlich/quantum/philox.hpp"

namespace frohlich::quantum {

struct McwfOptions {
  std::optional<std::uint64_t> seed;  // required
  int n_traj = 1000;
  double t_end = 0.0;
  std::vector<double> sample_times;   // t_end is always added
  /// Initial phonon Fock state (cavity in vacuum). When empty, every
  /// trajectory starts from a Fock state drawn from the truncated thermal
  /// distribution, which unravels the thermal product state.
  std::vector<int> initial_fock;
  unsigned workers = 0;               // 0: FROHLICH_WORKERS or hardware
  double boundary_threshold = 1e-3;   // warn when cutoff-level weight exceeds this
  double dense_budget = 3000;         // largest dimension for the eigen propagator
};

struct WindowAverage {
  Eigen::VectorXd mean;
  Eigen::VectorXd standard_error;
  int samples = 0;
};

struct TrajectoryEnsemble {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> trajectories;  // per trajectory: samples x phonon modes
  Eigen::MatrixXd mean;                       // samples x phonon modes
  Eigen::MatrixXd standard_error;
  int n_traj = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd boundary_weight;            // mean weight at the cutoff level per mode
  bool truncation_warning = false;
  std::vector<std::uint64_t> jumps_per_channel;
  std::string propagator;

  std::uint64_t total_jumps() const {
    std::uint64_t s = 0;
    for (auto j : jumps_per_channel) s += j;
    return s;
  }

  /// Time average over samples in [t_lo, t_hi] per trajectory, then the mean
  /// and standard error across trajectories (which are independent).
  WindowAverage window_average(double t_lo, double t_hi) const {
    std::vector<Eigen::Index> idx;
    for (std::size_t s = 0; s < times.size(); ++s)
      if (times[s] >= t_lo && times[s] <= t_hi) idx.push_back(static_cast<Eigen::Index>(s));
    if (idx.empty()) throw ValidationError("averaging window contains no samples");
    const auto modes = mean.cols();
    std::vector<Eigen::VectorXd> per;
    per.reserve(trajectories.size());
    for (const auto& tr : trajectories) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(modes);
      for (auto s : idx) a += tr.row(s).transpose();
      per.push_back(a / static_cast<double>(idx.size()));
    }
    WindowAverage w;
    w.samples = static_cast<int>(idx.size());
    w.mean = pairwise_sum(per) / static_cast<double>(per.size());
    std::vector<Eigen::VectorXd> dev;
    dev.reserve(per.size());
    for (const auto& p : per) dev.push_back((p - w.mean).array().square().matrix());
    const double n = static_cast<double>(per.size());
    w.standard_error = n > 1 ? Eigen::VectorXd((pairwise_sum(dev) / (n * (n - 1.0))).cwiseSqrt())
                             : Eigen::VectorXd::Zero(modes);
    return w;
  }
};

namespace detail {

using SparseState = std::vector<std::pair<Eigen::Index, cplx>>;

/// Data shared by every trajectory of the diagonal propagator.
struct DiagonalData {
  Eigen::VectorXcd h;                    // diagonal of H_eff
  std::vector<SparseOp> jumps;           // sqrt(rate) L_k
  std::vector<Eigen::VectorXd> weights;  // ||sqrt(rate) L_k |n>||^2 per basis state
};

inline std::shared_ptr<const DiagonalData> diagonal_data(const LindbladModel& m) {
  auto d = std::make_shared<DiagonalData>();
  d->h = Eigen::VectorXcd(m.effective_hamiltonian().diagonal());
  for (const auto& c : m.channels) {
    SparseOp op = c.op * std::sqrt(c.rate);
    Eigen::VectorXd w(op.cols());
    for (Eigen::Index k = 0; k < op.outerSize(); ++k) {
      double s = 0.0;
      for (SparseOp::InnerIterator it(op, k); it; ++it) s += std::norm(it.value());
      w(k) = s;
    }
    d->jumps.push_back(std::move(op));
    d->weights.push_back(std::move(w));
  }
  return d;
}

/// Propagator for a diagonal H_eff on a sparse state. Fock states stay Fock
/// states under monomial jumps, so each trajectory costs O(jumps).
class DiagonalEngine {
 public:
  DiagonalEngine(const LindbladModel& m, std::shared_ptr<const DiagonalData> data)
      : model_(&m), data_(std::move(data)) {}

  void start(SparseState psi) {
    psi_ = std::move(psi);
    normalize();
  }

  double norm2(double tau) const {
    double s = 0.0;
    for (const auto& [k, c] : psi_) s += std::norm(c) * std::exp(2.0 * data_->h(k).imag() * tau);
    return s;
  }

  std::optional<double> exact_jump_time(double r) const {
    if (psi_.size() != 1) return std::nullopt;
    const double g = -2.0 * data_->h(psi_[0].first).imag();
    if (g <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(r) / g;
  }

  void advance(double tau) {
    for (auto& [k, c] : psi_) c *= std::exp(cplx(0.0, -1.0) * data_->h(k) * tau);
    normalize();
  }

  /// Normalised occupations and cutoff-level weights tau ahead of the current state.
  void measure(double tau, Eigen::Ref<Eigen::VectorXd> occ, Eigen::Ref<Eigen::VectorXd> edge) const {
    double norm = 0.0;
    occ.setZero();
    edge.setZero();
    for (const auto& [k, c] : psi_) {
      const double p = std::norm(c) * std::exp(2.0 * data_->h(k).imag() * tau);
      norm += p;
      for (int l = 0; l < model_->n_phonon_modes(); ++l) {
        const int mode = model_->phonon_modes[l];
        const int q = model_->basis.occupation(static_cast<std::size_t>(k), mode);
        occ(l) += p * q;
        if (q == model_->basis.cutoff(mode)) edge(l) += p;
      }
    }
    occ /= norm;
    edge /= norm;
  }

  double channel_weight(std::size_t ch) const {
    if (psi_.size() == 1) return data_->weights[ch](psi_[0].first);
    const SparseState out = apply(ch);
    double s = 0.0;
    for (const auto& [k, c] : out) s += std::norm(c);
    return s;
  }

  std::size_t n_channels() const { return data_->jumps.size(); }

  void jump(std::size_t ch) {
    psi_ = apply(ch);
    normalize();
  }

 private:
  SparseState apply(std::size_t ch) const {
    SparseState out;
    const SparseOp& op = data_->jumps[ch];
    for (const auto& [k, c] : psi_)
      for (SparseOp::InnerIterator it(op, k); it; ++it) out.emplace_back(it.row(), it.value() * c);
    if (out.size() > 1) {
      std::sort(out.begin(), out.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      SparseState merged;
      for (const auto& e : out) {
        if (!merged.empty() && merged.back().first == e.first)
          merged.back().second += e.second;
        else
          merged.push_back(e);
      }
      out.swap(merged);
    }
    return out;
  }

  void normalize() {
    double s = 0.0;
    for (const auto& [k, c] : psi_) s += std::norm(c);
    const double inv = 1.0 / std::sqrt(s);
    for (auto& e : psi_) e.second *= inv;
  }

  const LindbladModel* model_;
  std::shared_ptr<const DiagonalData> data_;
  SparseState psi_;
};

/// Shared eigendecomposition of a dense H_eff plus measurement tables.
struct EigenData {
  Eigen::MatrixXcd v, vinv;
  Eigen::VectorXcd lambda;
  std::vector<SparseOp> jumps;
  Eigen::MatrixXd occ_table, edge_table;
};

inline std::shared_ptr<const EigenData> decompose(const LindbladModel& m) {
  const Eigen::MatrixXcd heff = Eigen::MatrixXcd(m.effective_hamiltonian());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(heff);
  if (es.info() != Eigen::Success) throw SolverError("eigendecomposition of H_eff failed");
  auto d = std::make_shared<EigenData>();
  d->v = es.eigenvectors();
  d->lambda = es.eigenvalues();
  d->vinv = d->v.partialPivLu().inverse();
  const double hn = std::max(1e-300, heff.cwiseAbs().maxCoeff());
  const double err = (heff * d->v - d->v * d->lambda.asDiagonal()).cwiseAbs().maxCoeff() / hn;
  if (!(err < 1e-8)) throw SolverError("eigendecomposition of H_eff is inaccurate");
  for (const auto& c : m.channels) d->jumps.push_back(c.op * std::sqrt(c.rate));
  const auto dim = static_cast<Eigen::Index>(m.dimension());
  d->occ_table = m.occupation_table();
  d->edge_table = Eigen::MatrixXd::Zero(dim, m.n_phonon_modes());
  for (Eigen::Index k = 0; k < dim; ++k)
    for (int l = 0; l < m.n_phonon_modes(); ++l) {
      const int mode = m.phonon_modes[l];
      if (m.basis.occupation(static_cast<std::size_t>(k), mode) == m.basis.cutoff(mode))
        d->edge_table(k, l) = 1.0;
    }
  return d;
}

/// Exact propagation psi(t) = V exp(-i Lambda t) V^{-1} psi for a general H_eff.
class EigenEngine {
 public:
  explicit EigenEngine(std::shared_ptr<const EigenData> eig) : eig_(std::move(eig)) {}

  void start(const Eigen::VectorXcd& psi) {
    psi_ = psi / psi.norm();
    coeff_ = eig_->vinv * psi_;
  }

  Eigen::VectorXcd state_at(double tau) const {
    const Eigen::VectorXcd ph = (cplx(0.0, -1.0) * eig_->lambda * tau).array().exp();
    return eig_->v * (ph.array() * coeff_.array()).matrix();
  }

  double norm2(double tau) const { return state_at(tau).squaredNorm(); }
  std::optional<double> exact_jump_time(double) const { return std::nullopt; }

  void advance(double tau) { start(state_at(tau)); }

  void measure(double tau, Eigen::Ref<Eigen::VectorXd> occ, Eigen::Ref<Eigen::VectorXd> edge) const {
    const Eigen::VectorXd p = state_at(tau).cwiseAbs2();
    const double n = p.sum();
    occ = eig_->occ_table.transpose() * p / n;
    edge = eig_->edge_table.transpose() * p / n;
  }

  std::size_t n_channels() const { return eig_->jumps.size(); }
  double channel_weight(std::size_t ch) const { return (eig_->jumps[ch] * psi_).squaredNorm(); }
  void jump(std::size_t ch) { start(Eigen::VectorXcd(eig_->jumps[ch] * psi_)); }

 private:
  std::shared_ptr<const EigenData> eig_;
  Eigen::VectorXcd psi_, coeff_;
};

/// Solves norm2(tau) = r on [0, hi] (norm2 decreasing) by Illinois regula
/// falsi on log(norm2), which is close to linear in tau.
template <class Engine>
double locate_jump(const Engine& e, double r, double hi) {
  const double target = std::log(r);
  double lo = 0.0, flo = std::log(e.norm2(0.0)) - target;
  double fhi = std::log(e.norm2(hi)) - target;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= 1e-15 * std::max(1.0, hi) + 4e-16 * hi) break;
    double mid = (flo * hi - fhi * lo) / (flo - fhi);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const double fm = std::log(e.norm2(mid)) - target;
    if (std::abs(fm) < 1e-14) return mid;
    if (fm > 0.0) {
      lo = mid;
      flo = fm;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      fhi = fm;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  return hi;
}

struct TrajectoryResult {
  Eigen::MatrixXd occupations;  // samples x modes
  Eigen::VectorXd edge_weight;  // summed over samples
  std::vector<std::uint64_t> jumps;
};

template <class Engine, class State>
TrajectoryResult run_trajectory(Engine& e, State psi0, const std::vector<double>& samples,
                                double t_end, Philox& rng, int n_modes) {
  TrajectoryResult out;
  out.occupations.resize(static_cast<Eigen::Index>(samples.size()), n_modes);
  out.edge_weight = Eigen::VectorXd::Zero(n_modes);
  out.jumps.assign(e.n_channels(), 0);
  Eigen::VectorXd occ(n_modes), edge(n_modes);
  std::vector<double> w(e.n_channels());

  e.start(std::move(psi0));
  double t = 0.0;
  std::size_t s = 0;
  auto record_until = [&](double t_stop, bool inclusive) {
    while (s < samples.size() && (samples[s] < t_stop || (inclusive && samples[s] <= t_stop))) {
      e.measure(samples[s] - t, occ, edge);
      out.occupations.row(static_cast<Eigen::Index>(s)) = occ.transpose();
      out.edge_weight += edge;
      ++s;
    }
  };
  for (;;) {
    const double r = rng.uniform_open0();
    const double remaining = t_end - t;
    double tau;
    if (auto exact = e.exact_jump_time(r)) {
      tau = *exact;
    } else {
      tau = e.norm2(remaining) > r ? std::numeric_limits<double>::infinity()
                                    : locate_jump(e, r, remaining);
    }
    if (!(tau < remaining)) {
      record_until(t_end, true);
      return out;
    }
    record_until(t + tau, false);
    e.advance(tau);
    t += tau;
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) total += (w[k] = e.channel_weight(k));
    if (!(total > 0.0)) throw SolverError("jump with no active channel");
    const double pick = rng.uniform() * total;
    std::size_t ch = 0;
    double acc = w[0];
    while (ch + 1 < w.size() && acc <= pick) acc += w[++ch];
    while (w[ch] == 0.0 && ch > 0) --ch;
    e.jump(ch);
    ++out.jumps[ch];
  }
}

/// Fock state drawn from the truncated thermal distribution of every phonon mode.
inline std::vector<int> sample_thermal_fock(const LindbladModel& m, Philox& rng) {
  std::vector<int> occ(static_cast<std::size_t>(m.basis.modes()), 0);
  for (int l = 0; l < m.n_phonon_modes(); ++l) {
    const int mode = m.phonon_modes[l];
    const int cut = m.basis.cutoff(mode);
    const double nb = m.thermal[l];
    if (nb <= 0.0) continue;
    const double x = nb / (nb + 1.0);
    // P(q) = x^q (1 - x) / (1 - x^{cut+1}); inverse CDF
    const double u = rng.uniform() * (1.0 - std::pow(x, cut + 1));
    double cdf = 0.0, p = 1.0 - x;
    int q = 0;
    for (; q < cut; ++q) {
      cdf += p;
      if (u < cdf) break;
      p *= x;
    }
    occ[mode] = q;
  }
  return occ;
}

inline std::vector<double> prepare_samples(std::vector<double> s, double t_end) {
  std::sort(s.begin(), s.end());
  s.erase(std::remove_if(s.begin(), s.end(), [&](double t) { return t < 0.0 || t >= t_end; }),
          s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  s.push_back(t_end);
  return s;
}

}  // namespace detail

/// Quantum-jump unravelling of the model: waiting times from the decay of the
/// norm under H_eff, jump channel chosen with probability proportional to
/// rate_k ||L_k psi||^2. Trajectory i draws from Philox stream i, so the
/// ensemble is identical for any worker count.
inline TrajectoryEnsemble mcwf_evolve(const LindbladModel& m, const McwfOptions& opt) {
  if (!opt.seed) throw ValidationError("a seed is required for stochastic simulations");
  if (opt.n_traj < 1) throw ValidationError("need at least one trajectory");
  if (!(opt.t_end > 0.0)) throw ValidationError("t_end must be positive");
  std::vector<int> init_phonons = opt.initial_fock;
  if (!init_phonons.empty() && static_cast<int>(init_phonons.size()) != m.n_phonon_modes())
    throw ValidationError("initial Fock state needs one occupation per phonon mode");

  const auto samples = detail::prepare_samples(opt.sample_times, opt.t_end);
  const int modes = m.n_phonon_modes();
  const std::uint64_t seed = *opt.seed;
  const bool diagonal = is_diagonal(m.effective_hamiltonian());
  std::shared_ptr<const detail::EigenData> eig;
  std::shared_ptr<const detail::DiagonalData> diag;
  if (diagonal) {
    diag = detail::diagonal_data(m);
  } else {
    if (static_cast<double>(m.dimension()) > opt.dense_budget) {
      std::ostringstream os;
      os << "MCWF with a non-diagonal H_eff is limited to dimension " << opt.dense_budget
         << ", model has " << m.dimension();
      throw ValidationError(os.str());
    }
    eig = detail::decompose(m);
  }

  auto initial_occ = [&](Philox& rng) {
    if (init_phonons.empty()) return detail::sample_thermal_fock(m, rng);
    std::vector<int> occ(static_cast<std::size_t>(m.basis.modes()), 0);
    for (int l = 0; l < modes; ++l) occ[m.phonon_modes[l]] = init_phonons[l];
    return occ;
  };

  std::vector<detail::TrajectoryResult> results(static_cast<std::size_t>(opt.n_traj));
  parallel_for(results.size(), opt.workers ? opt.workers : worker_count(), [&](std::size_t i) {
    Philox rng(seed, i);
    const auto k = static_cast<Eigen::Index>(m.basis.index(initial_occ(rng)));
    if (diagonal) {
      detail::DiagonalEngine e(m, diag);
      results[i] = detail::run_trajectory(e, detail::SparseState{{k, cplx(1.0)}}, samples,
                                          opt.t_end, rng, modes);
    } else {
      detail::EigenEngine e(eig);
      Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.dimension()));
      psi(k) = 1.0;
      results[i] = detail::run_trajectory(e, psi, samples, opt.t_end, rng, modes);
    }
  });

  TrajectoryEnsemble ens;
  ens.times = samples;
  ens.n_traj = opt.n_traj;
  ens.seed = seed;
  ens.propagator = diagonal ? "diagonal" : "eigen";
  ens.jumps_per_channel.assign(m.channels.size(), 0);
  std::vector<Eigen::MatrixXd> occ;
  std::vector<Eigen::VectorXd> edges;
  for (auto& r : results) {
    for (std::size_t k = 0; k < r.jumps.size(); ++k) ens.jumps_per_channel[k] += r.jumps[k];
    edges.push_back(r.edge_weight);
    occ.push_back(std::move(r.occupations));
  }
  const double n = opt.n_traj;
  ens.mean = pairwise_sum(occ) / n;
  std::vector<Eigen::MatrixXd> dev;
  dev.reserve(occ.size());
  for (const auto& o : occ) dev.push_back((o - ens.mean).array().square().matrix());
  ens.standard_error = n > 1 ? Eigen::MatrixXd((pairwise_sum(dev) / (n * (n - 1.0))).cwiseSqrt())
                             : Eigen::MatrixXd::Zero(ens.mean.rows(), ens.mean.cols());
  ens.boundary_weight = pairwise_sum(edges) / (n * static_cast<double>(samples.size()));
  ens.truncation_warning = (ens.boundary_weight.array() > opt.boundary_threshold).any();
  ens.trajectories = std::move(occ);
  return ens;
}

}  // namespace frohlich::quantum
