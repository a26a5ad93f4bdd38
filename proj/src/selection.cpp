#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "rmlal/selection.hpp"

namespace rmlal {

namespace {

Eigen::VectorXd uncertainty_from_predictions(const Eigen::MatrixXd& f_U, double gamma) {
  const int u = static_cast<int>(f_U.cols());
  const int c = static_cast<int>(f_U.rows());
  Eigen::VectorXd a(u);
  for (int j = 0; j < u; ++j) {
    double sum = 0.0;
    for (int k = 0; k < c; ++k) {
      const double f = f_U(k, j);
      sum += std::exp(-gamma * (1.0 + 2.0 * std::abs(f) + f * f));
    }
    a(j) = sum;
  }
  return a;
}

Eigen::VectorXd representativeness_from_predictions(const Eigen::MatrixXd& f_U,
                                                    const GramCache& caches, double gamma) {
  const int u = static_cast<int>(f_U.cols());
  Eigen::VectorXd b(u);
  for (int j = 0; j < u; ++j) {
    double sum = 0.0;
    for (int i = 0; i < u; ++i) {
      sum += std::exp(-gamma * (f_U.col(j) - f_U.col(i)).squaredNorm()) * caches.w_UU(j, i);
    }
    b(j) = sum / static_cast<double>(u);
  }
  return b;
}

Eigen::VectorXd redundancy_from_predictions(const Eigen::MatrixXd& f_U,
                                            const GramCache& caches,
                                            const Eigen::MatrixXd& y_L, double gamma) {
  const int u = static_cast<int>(f_U.cols());
  const int l = caches.l();
  Eigen::VectorXd c(u);
  for (int j = 0; j < u; ++j) {
    double sum = 0.0;
    for (int i = 0; i < l; ++i) {
      sum += std::exp(-gamma * (f_U.col(j) - y_L.row(i).transpose()).squaredNorm()) *
             caches.w_UL(j, i);
    }
    c(j) = sum / static_cast<double>(l);
  }
  return c;
}

}  // namespace

Eigen::VectorXd score_uncertainty(const ModelState& state, const GramCache& caches,
                                  const KernelConfig& kernel) {
  return uncertainty_from_predictions(predict_all(state, caches.K_LU), kernel.gamma_label());
}

Eigen::VectorXd score_representativeness(const ModelState& state, const GramCache& caches,
                                         const KernelConfig& kernel) {
  return representativeness_from_predictions(predict_all(state, caches.K_LU), caches,
                                             kernel.gamma_label());
}

Eigen::VectorXd score_redundancy(const ModelState& state, const GramCache& caches,
                                 const Eigen::MatrixXd& y_L, const KernelConfig& kernel) {
  return redundancy_from_predictions(predict_all(state, caches.K_LU), caches, y_L,
                                     kernel.gamma_label());
}

SelectionScores compute_scores(const ModelState& state, const GramCache& caches,
                               const Eigen::MatrixXd& y_L, const SolverConfig& solver,
                               const KernelConfig& kernel) {
  const Eigen::MatrixXd f_U = predict_all(state, caches.K_LU);
  const double gamma = kernel.gamma_label();
  SelectionScores scores;
  scores.a = uncertainty_from_predictions(f_U, gamma);
  scores.b = representativeness_from_predictions(f_U, caches, gamma);
  scores.c = redundancy_from_predictions(f_U, caches, y_L, gamma);
  scores.H = scores.a + solver.beta1 * scores.b - solver.beta2 * scores.c;
  return scores;
}

AlphaVector solve_alpha(const Eigen::VectorXd& H) {
  if (H.size() == 0) throw query_error("solve_alpha: empty pool");
  if (!H.allFinite()) throw domain_error("solve_alpha: H contains non-finite entries");
  int best = 0;
  for (int j = 1; j < H.size(); ++j) {
    if (H(j) > H(best)) best = j;
  }
  AlphaVector alpha;
  alpha.alpha = Eigen::VectorXd::Zero(H.size());
  alpha.alpha(best) = 1.0;
  return alpha;
}

QueryResult query_next(const ExperimentSplit& split, const GramCache& caches,
                       const Eigen::MatrixXd& y_L, const SolverConfig& solver,
                       const KernelConfig& kernel, const ModelState* warm_start,
                       int max_alternations, int exploration_starts) {
  if (caches.u() == 0) throw query_error("query_next: pool is empty");
  if (max_alternations < 1) throw config_error("query_next: alternation cap must be >= 1");
  if (exploration_starts < 1) throw config_error("query_next: need at least one start");

  const auto one_hot_index = [](const AlphaVector& alpha) {
    for (int j = 0; j < alpha.alpha.size(); ++j) {
      if (alpha.alpha(j) == 1.0) return j;
    }
    throw domain_error("alpha vector is not one-hot");
  };

  // Initial ranking comes from the scores of a warm model when available,
  // otherwise from a candidate-free robust fit.
  ModelState scoring_state;
  if (warm_start) {
    scoring_state = *warm_start;
  } else {
    scoring_state = solve_fit(caches, y_L, solver, kernel).first;
  }
  const SelectionScores initial = compute_scores(scoring_state, caches, y_L, solver, kernel);
  std::vector<int> ranked(static_cast<std::size_t>(caches.u()));
  for (int j = 0; j < caches.u(); ++j) ranked[static_cast<std::size_t>(j)] = j;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](int a, int b) { return initial.H(a) > initial.H(b); });

  // Candidate-conditioned scores are self-reinforcing (solving for q raises
  // q's own margin score), so a single alternation chain parks at whichever
  // fixed point the initial ranking hits. The alternation therefore runs
  // from the top-ranked starts, solves are shared across chains, and the
  // visited candidate with the best exact objective wins. Ties go to the
  // lowest pool index via the ordered map.
  struct Solved {
    ModelState state;
    double objective;
    bool stable = false;
    int rounds_to_stability = 0;
  };
  std::map<int, Solved> solved;
  int total_rounds = 0;
  const auto solve_candidate = [&](int q) -> Solved& {
    auto it = solved.find(q);
    if (it == solved.end()) {
      Solved entry;
      entry.state =
          solve_for_candidate(q, caches, y_L, solver, kernel, &scoring_state).first;
      if (solver.weight_mode == WeightMode::mcc) {
        entry.objective = objective_mcc(entry.state, caches, y_L, q, solver, kernel);
      } else {
        const HQWeights unit =
            hq_weights(entry.state.theta, q, caches, y_L, kernel, WeightMode::mse);
        entry.objective = -objective_hq(entry.state, unit, caches, y_L, q, solver);
      }
      it = solved.emplace(q, std::move(entry)).first;
    }
    return it->second;
  };

  const int starts = std::min(exploration_starts, caches.u());
  for (int s = 0; s < starts; ++s) {
    int candidate = ranked[static_cast<std::size_t>(s)];
    for (int round = 0; round < max_alternations; ++round) {
      ++total_rounds;
      Solved& entry = solve_candidate(candidate);
      const SelectionScores scores =
          compute_scores(entry.state, caches, y_L, solver, kernel);
      const int next = one_hot_index(solve_alpha(scores.H));
      if (next == candidate) {
        if (!entry.stable || round + 1 < entry.rounds_to_stability) {
          entry.rounds_to_stability = round + 1;
        }
        entry.stable = true;
        break;
      }
      candidate = next;
    }
  }

  int best = -1;
  double best_objective = -std::numeric_limits<double>::infinity();
  for (const auto& [q, entry] : solved) {
    if (entry.objective > best_objective) {
      best_objective = entry.objective;
      best = q;
    }
  }

  QueryResult result;
  result.pool_position = best;
  result.index = split.pool_idx[static_cast<std::size_t>(best)];
  result.model = solved.at(best).state;
  result.stable = solved.at(best).stable;
  result.alternations = result.stable ? solved.at(best).rounds_to_stability : total_rounds;
  return result;
}

}  // namespace rmlal
