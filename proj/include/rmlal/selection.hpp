#pragma once

#include "rmlal/solver.hpp"

namespace rmlal {

/// Per-candidate selection scores over the pool.
///   a_j: uncertainty (margin) score, in (0, C]
///   b_j: pool representativeness, in (0, 1]
///   c_j: labeled-set redundancy, in (0, 1]
///   H = a + beta1 * b - beta2 * c
struct SelectionScores {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd H;
};

/// Relaxed selection indicator over the pool simplex; the returned solution
/// is always a one-hot vertex.
struct AlphaVector {
  Eigen::VectorXd alpha;
};

Eigen::VectorXd score_uncertainty(const ModelState& state, const GramCache& caches,
                                  const KernelConfig& kernel);
Eigen::VectorXd score_representativeness(const ModelState& state, const GramCache& caches,
                                         const KernelConfig& kernel);
Eigen::VectorXd score_redundancy(const ModelState& state, const GramCache& caches,
                                 const Eigen::MatrixXd& y_L, const KernelConfig& kernel);

SelectionScores compute_scores(const ModelState& state, const GramCache& caches,
                               const Eigen::MatrixXd& y_L, const SolverConfig& solver,
                               const KernelConfig& kernel);

/// argmax of a linear objective over the simplex {alpha >= 0, sum = 1}: the
/// maximum sits at a vertex, so no LP machinery is needed. Ties break to the
/// lowest index.
AlphaVector solve_alpha(const Eigen::VectorXd& H);

struct QueryResult {
  int index = -1;          // dataset index of the selected instance
  int pool_position = -1;  // its position inside split.pool_idx
  ModelState model;
  bool stable = false;     // selection was identical in two consecutive rounds
  int alternations = 0;
};

/// Alternating selection: solve the classifier for the current candidate,
/// re-score the pool, move to the new argmax, and repeat until the chosen
/// index is stable or the alternation cap is hit. Chains are started from
/// the top `exploration_starts` initially ranked candidates (solves shared
/// between chains) and the visited candidate with the best exact objective
/// is returned; self-reinforced fixed points make a single chain unreliable.
QueryResult query_next(const ExperimentSplit& split, const GramCache& caches,
                       const Eigen::MatrixXd& y_L, const SolverConfig& solver,
                       const KernelConfig& kernel, const ModelState* warm_start = nullptr,
                       int max_alternations = 5, int exploration_starts = 3);

}  // namespace rmlal
