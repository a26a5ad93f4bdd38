#include <cmath>

#include "rmlal/baselines.hpp"

namespace rmlal {

int random_query(const std::vector<int>& pool, Rng& rng) {
  if (pool.empty()) throw query_error("random_query: pool is empty");
  return pool[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool.size())))];
}

int minmargin_query(const ModelState& state, const GramCache& caches,
                    const std::vector<int>& pool) {
  if (pool.empty()) throw query_error("minmargin_query: pool is empty");
  if (static_cast<int>(pool.size()) != caches.u()) {
    throw dimension_error("minmargin_query: pool size does not match caches");
  }
  const Eigen::MatrixXd f_U = predict_all(state, caches.K_LU);
  int best = 0;
  double best_margin = f_U.col(0).cwiseAbs().sum();
  for (int j = 1; j < f_U.cols(); ++j) {
    const double margin = f_U.col(j).cwiseAbs().sum();
    if (margin < best_margin) {
      best_margin = margin;
      best = j;
    }
  }
  return pool[static_cast<std::size_t>(best)];
}

QueryResult mse_variant_query(const ExperimentSplit& split, const GramCache& caches,
                              const Eigen::MatrixXd& y_L, const SolverConfig& solver,
                              const KernelConfig& kernel, const ModelState* warm_start,
                              int max_alternations, int exploration_starts) {
  SolverConfig mse = solver;
  mse.weight_mode = WeightMode::mse;
  return query_next(split, caches, y_L, mse, kernel, warm_start, max_alternations,
                    exploration_starts);
}

}  // namespace rmlal
