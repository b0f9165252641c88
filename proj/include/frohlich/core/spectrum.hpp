#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frohlich/constants.hpp"
#include "frohlich/errors.hpp"

namespace frohlich {

/// Normal-mode frequencies of a harmonic chain of N membranes with on-site
/// frequency omega0 and nearest-neighbour ratio k/m:
///   omega_j^2 = omega0^2 - 2 (k/m) cos(j pi / (N+1)),  j = 1..N (ascending).
inline std::vector<double> mode_frequencies(int n_modes, double omega0, double coupling_ratio) {
  if (n_modes < 1) throw ValidationError("need at least one membrane");
  const double step = constants::pi / (n_modes + 1);
  std::vector<double> out(static_cast<std::size_t>(n_modes));
  for (int j = 1; j <= n_modes; ++j) {
    const double radicand = omega0 * omega0 - 2.0 * coupling_ratio * std::cos(j * step);
    if (!(radicand > 0.0))
      throw ValidationError("mode " + std::to_string(j) +
                            " has non-positive squared frequency; reduce coupling_ratio");
    out[static_cast<std::size_t>(j - 1)] = std::sqrt(radicand);
  }
  return out;
}

/// Coupling of cavity k (1-based, k = 1 is the single-cavity case) to the
/// mode pair (i, j), both 1-based.
inline double cavity_mode_coupling(int cavity, int i, int j, const std::vector<double>& freqs,
                                   double omega0) {
  const int n = static_cast<int>(freqs.size());
  const double step = constants::pi / (n + 1);
  return omega0 / std::sqrt(freqs[i - 1] * freqs[j - 1]) * std::sin(cavity * i * step) *
         std::sin(cavity * j * step);
}

/// U_{i,j} for a single cavity at the first membrane.
inline Eigen::MatrixXd coupling_matrix(const std::vector<double>& freqs, double omega0) {
  const int n = static_cast<int>(freqs.size());
  Eigen::MatrixXd u(n, n);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) u(i - 1, j - 1) = cavity_mode_coupling(1, i, j, freqs, omega0);
  return u;
}

/// Effective squared coupling with M cavities on the first M membranes:
///   U~^2_{i,j} = sum_{k=1..M} U_{k,i,j}^2.
inline Eigen::MatrixXd effective_coupling_squared(const std::vector<double>& freqs, double omega0,
                                                  int n_cavities) {
  const int n = static_cast<int>(freqs.size());
  if (n_cavities < 1 || n_cavities > n)
    throw ValidationError("number of cavities must satisfy 1 <= M <= N");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k <= n_cavities; ++k)
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        const double u = cavity_mode_coupling(k, i, j, freqs, omega0);
        out(i - 1, j - 1) += u * u;
      }
  return out;
}

enum class PairKind {
  generic,           // closed form (3/8 diagonal, 1/4 off-diagonal) is exact
  special_diagonal,  // i = j = (N+1)/2: direct sum gives 1/2
  special_mirror,    // i + j = N+1, i != j: direct sum gives 3/8
};

/// Index pairs for which the M = N closed form does not hold. Only i + j = N+1
/// makes a cosine sum over k resonant; for i = j that is 2i = N+1.
inline PairKind classify_pair(int i, int j, int n_modes) {
  if (i + j != n_modes + 1) return PairKind::generic;
  return i == j ? PairKind::special_diagonal : PairKind::special_mirror;
}

/// Closed form of U~^2_{i,j} for M = N as published:
///   (N+1) omega0^2 / (omega_i omega_j) * {3/8 if i = j, 1/4 otherwise}.
/// Valid only for PairKind::generic.
inline double full_array_coupling_closed_form(int i, int j, const std::vector<double>& freqs,
                                              double omega0) {
  const int n = static_cast<int>(freqs.size());
  const double scale = (n + 1) * omega0 * omega0 / (freqs[i - 1] * freqs[j - 1]);
  return scale * (i == j ? 3.0 / 8.0 : 1.0 / 4.0);
}

/// Closed form extended to the special pairs (derived from the same cosine sums).
inline double full_array_coupling_exact(int i, int j, const std::vector<double>& freqs,
                                        double omega0) {
  const int n = static_cast<int>(freqs.size());
  const double scale = (n + 1) * omega0 * omega0 / (freqs[i - 1] * freqs[j - 1]);
  switch (classify_pair(i, j, n)) {
    case PairKind::special_diagonal: return scale * 0.5;
    case PairKind::special_mirror: return scale * 3.0 / 8.0;
    case PairKind::generic: break;
  }
  return full_array_coupling_closed_form(i, j, freqs, omega0);
}

}  // namespace frohlich
