#pragma once

#include "rmlal/rng.hpp"
#include "rmlal/selection.hpp"

namespace rmlal {

/// Uniform draw from the pool.
int random_query(const std::vector<int>& pool, Rng& rng);

/// Classical minimum-margin baseline: argmin over the pool of the summed
/// absolute decision values, ties to the lowest dataset index position.
int minmargin_query(const ModelState& state, const GramCache& caches,
                    const std::vector<int>& pool);

/// Same alternating pipeline as query_next but with every half-quadratic
/// weight frozen at 1 (quadratic loss ablation).
QueryResult mse_variant_query(const ExperimentSplit& split, const GramCache& caches,
                              const Eigen::MatrixXd& y_L, const SolverConfig& solver,
                              const KernelConfig& kernel,
                              const ModelState* warm_start = nullptr,
                              int max_alternations = 5, int exploration_starts = 3);

}  // namespace rmlal
