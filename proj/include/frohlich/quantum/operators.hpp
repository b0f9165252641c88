#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "frohlich/quantum/fock_basis.hpp"

namespace frohlich::quantum {

using cplx = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

/// A sparse operator with a human-readable label, e.g. "b1 b2^dag".
struct NamedOperator {
  std::string name;
  SparseOp op;
};

inline SparseOp identity(const FockBasis& basis) {
  SparseOp id(basis.dimension(), basis.dimension());
  id.setIdentity();
  return id;
}

/// Truncated annihilation operator of `mode`: a|n> = sqrt(n)|n-1>.
inline SparseOp annihilation(const FockBasis& basis, int mode) {
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(basis.dimension());
  const auto s = static_cast<Eigen::Index>(basis.stride(mode));
  for (Eigen::Index k = 0; k < dim; ++k) {
    const int n = basis.occupation(static_cast<std::size_t>(k), mode);
    if (n > 0) t.emplace_back(k - s, k, std::sqrt(static_cast<double>(n)));
  }
  SparseOp a(dim, dim);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

/// Truncated creation operator; maps the cutoff level to zero.
inline SparseOp creation(const FockBasis& basis, int mode) {
  return SparseOp(annihilation(basis, mode).adjoint());
}

/// Diagonal operator with entries f(occupations of basis state k).
inline SparseOp diagonal(const FockBasis& basis, const std::function<double(const std::vector<int>&)>& f) {
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(basis.dimension());
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double v = f(basis.occupations(static_cast<std::size_t>(k)));
    if (v != 0.0) t.emplace_back(k, k, v);
  }
  SparseOp d(dim, dim);
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

inline SparseOp number(const FockBasis& basis, int mode) {
  return diagonal(basis, [mode](const std::vector<int>& n) { return static_cast<double>(n[mode]); });
}

/// Kronecker product of two sparse matrices (A (x) B).
inline SparseOp kron(const SparseOp& a, const SparseOp& b) {
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()) * static_cast<std::size_t>(b.nonZeros()));
  for (Eigen::Index ca = 0; ca < a.outerSize(); ++ca)
    for (SparseOp::InnerIterator ia(a, ca); ia; ++ia)
      for (Eigen::Index cb = 0; cb < b.outerSize(); ++cb)
        for (SparseOp::InnerIterator ib(b, cb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
  SparseOp out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

/// True when every column holds at most one nonzero, i.e. the operator maps
/// each basis state to a multiple of a single basis state.
inline bool is_monomial(const SparseOp& op) {
  for (Eigen::Index c = 0; c < op.outerSize(); ++c) {
    int count = 0;
    for (SparseOp::InnerIterator it(op, c); it; ++it)
      if (it.value() != cplx(0.0)) ++count;
    if (count > 1) return false;
  }
  return true;
}

inline bool is_diagonal(const SparseOp& op) {
  for (Eigen::Index c = 0; c < op.outerSize(); ++c)
    for (SparseOp::InnerIterator it(op, c); it; ++it)
      if (it.row() != it.col() && it.value() != cplx(0.0)) return false;
  return true;
}

/// max |A - A^dag| relative to max |A| (0 for the zero operator).
inline double hermiticity_error(const SparseOp& op) {
  const SparseOp diff = op - SparseOp(op.adjoint());
  double dmax = 0.0, amax = 0.0;
  for (Eigen::Index c = 0; c < diff.outerSize(); ++c)
    for (SparseOp::InnerIterator it(diff, c); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  for (Eigen::Index c = 0; c < op.outerSize(); ++c)
    for (SparseOp::InnerIterator it(op, c); it; ++it) amax = std::max(amax, std::abs(it.value()));
  return amax > 0.0 ? dmax / amax : 0.0;
}

}  // namespace frohlich::quantum
