#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "frohlich/core/mode_system.hpp"
#include "frohlich/errors.hpp"
#include "frohlich/quantum/lindblad.hpp"
#include "frohlich/quantum/steady_state.hpp"

namespace frohlich::quantum {

/// D_i = |<n_i>_MC - <n_i>_de| / <n_i>_MC per mode; empty where the stochastic
/// occupation is zero.
inline std::vector<std::optional<double>> compare_with_decorrelation(const Eigen::VectorXd& stochastic,
                                                                     const Eigen::VectorXd& meanfield) {
  if (stochastic.size() != meanfield.size())
    throw ValidationError("compared occupation vectors differ in length");
  std::vector<std::optional<double>> d;
  for (Eigen::Index i = 0; i < stochastic.size(); ++i) {
    if (stochastic(i) == 0.0)
      d.emplace_back(std::nullopt);
    else
      d.emplace_back(std::abs(stochastic(i) - meanfield(i)) / stochastic(i));
  }
  return d;
}

struct CutoffSelection {
  std::vector<int> cutoffs;
  Eigen::VectorXd occupations;  // steady state at the accepted cutoffs
  Eigen::VectorXd edge_weight;  // steady probability of sitting at each mode's cutoff
  int rounds = 0;
};

/// Raises per-mode cutoffs in steps of 2 until, for every mode, the steady
/// probability at the cutoff is below `edge_weight` and raising that cutoff by
/// 2 shifts no steady occupation by more than `rel_shift`. Uses the exact
/// population steady state of the reduced model.
inline CutoffSelection choose_cutoffs(const ModeSystem& sys, std::vector<int> start,
                                      double rel_shift = 0.01, double edge_weight = 1e-3,
                                      double budget = 2e6, int max_rounds = 50) {
  ReducedModelOptions opt;
  opt.dimension_budget = budget;
  struct Solved {
    Eigen::VectorXd occupations, edge;
  };
  auto solve = [&](const std::vector<int>& c) {
    opt.cutoffs = c;
    const auto m = build_reduced_lindblad(sys, opt);
    const auto ss = steady_state_populations(m);
    const Eigen::MatrixXd occ = m.occupation_table();
    Solved out{ss.occupations, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.size()))};
    for (Eigen::Index k = 0; k < occ.rows(); ++k)
      for (Eigen::Index l = 0; l < occ.cols(); ++l)
        if (occ(k, l) == c[static_cast<std::size_t>(l)]) out.edge(l) += ss.populations(k);
    return out;
  };
  CutoffSelection sel;
  sel.cutoffs = std::move(start);
  for (sel.rounds = 0; sel.rounds < max_rounds; ++sel.rounds) {
    const auto base = solve(sel.cutoffs);
    std::vector<int> next = sel.cutoffs;
    bool changed = false;
    for (std::size_t l = 0; l < next.size(); ++l) {
      bool raise = base.edge(static_cast<Eigen::Index>(l)) > edge_weight;
      if (!raise) {
        auto trial = sel.cutoffs;
        trial[l] += 2;
        const Eigen::VectorXd alt = solve(trial).occupations;
        raise = ((alt - base.occupations).array().abs() / alt.array().abs().max(1e-300)).maxCoeff() > rel_shift;
      }
      if (raise) {
        next[l] += 2;
        changed = true;
      }
    }
    if (!changed) {
      sel.occupations = base.occupations;
      sel.edge_weight = base.edge;
      return sel;
    }
    sel.cutoffs = next;
  }
  throw SolverError("cutoff selection did not settle");
}

}  // namespace frohlich::quantum
