#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rmlal/selection.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace rmlal;
using namespace rmlal::testsupport;

namespace {

struct Instance {
  MultiLabelDataset dataset;
  ExperimentSplit split;
  GramCache caches;
  Eigen::MatrixXd y_L;
  KernelConfig kernel;
};

Instance make_instance(int n, int t, int c, std::uint64_t seed, double test_fraction = 0.3,
                       double labeled_fraction = 0.4) {
  Instance inst{make_random(n, t, c, seed), {}, {}, {}, KernelConfig::defaults_for(t, c)};
  inst.split = make_split(inst.dataset, static_cast<int>(seed), test_fraction, labeled_fraction);
  inst.caches = build_gram(inst.dataset, inst.split, inst.kernel);
  inst.y_L.resize(inst.split.l(), c);
  for (int i = 0; i < inst.split.l(); ++i) {
    inst.y_L.row(i) =
        inst.dataset.labels.row(inst.split.labeled_idx[static_cast<std::size_t>(i)]).cast<double>();
  }
  return inst;
}

ModelState state_with_theta(const Eigen::MatrixXd& theta) {
  ModelState state = ModelState::zero(static_cast<int>(theta.rows()),
                                      static_cast<int>(theta.cols()), 1.0);
  state.theta = theta;
  return state;
}

Eigen::MatrixXd random_theta(int c, int l, std::uint64_t seed, double scale = 0.4) {
  Rng rng(seed);
  Eigen::MatrixXd theta(c, l);
  for (int k = 0; k < c; ++k) {
    for (int j = 0; j < l; ++j) theta(k, j) = scale * rng.normal();
  }
  return theta;
}

// Exhaustive alternative to the alternation: solve for every candidate and
// keep the one whose solved model maximizes the exact joint objective.
int exhaustive_best_candidate(const GramCache& caches, const Eigen::MatrixXd& y_L,
                              const SolverConfig& solver, const KernelConfig& kernel) {
  int best = -1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int q = 0; q < caches.u(); ++q) {
    const ModelState state = solve_for_candidate(q, caches, y_L, solver, kernel).first;
    const double value = exact_objective_oracle(state.theta, caches, y_L, q, solver, kernel);
    if (value > best_value) {
      best_value = value;
      best = q;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("score_uncertainty analytic and oracle cases") {
  const Instance inst = make_instance(14, 3, 2, 80);
  const int u = inst.split.u();
  const double gamma = inst.kernel.gamma_label();

  const ModelState zero = ModelState::zero(2, inst.split.l(), 1.0);
  const Eigen::VectorXd a0 = score_uncertainty(zero, inst.caches, inst.kernel);
  for (int j = 0; j < u; ++j) {
    CHECK(a0(j) == doctest::Approx(2.0 * std::exp(-gamma)).epsilon(1e-14));
  }

  const ModelState huge = state_with_theta(100.0 * random_theta(2, inst.split.l(), 81).cwiseAbs());
  const Eigen::VectorXd a_huge = score_uncertainty(huge, inst.caches, inst.kernel);
  CHECK(a_huge.maxCoeff() < 1e-6);

  const ModelState state = state_with_theta(random_theta(2, inst.split.l(), 82));
  const Eigen::VectorXd a = score_uncertainty(state, inst.caches, inst.kernel);
  for (int j = 0; j < std::min(u, 3); ++j) {
    double expected = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double f = prediction_oracle(state.theta, inst.caches.K_LU, k, j);
      expected += std::exp(-gamma * (1.0 + 2.0 * std::abs(f) + f * f));
    }
    CHECK(a(j) == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK((a.array() > 0.0).all());
  CHECK((a.array() <= 2.0).all());
}

TEST_CASE("score_representativeness cases") {
  SUBCASE("u = 1 pool scores exactly 1") {
    MultiLabelDataset ds = make_random(6, 2, 2, 83);
    ExperimentSplit split;
    split.labeled_idx = {0, 1, 2, 3};
    split.pool_idx = {4};
    split.test_idx = {5};
    const KernelConfig kernel = KernelConfig::defaults_for(2, 2);
    const GramCache caches = build_gram(ds, split, kernel);
    const ModelState state = state_with_theta(random_theta(2, 4, 84));
    const Eigen::VectorXd b = score_representativeness(state, caches, kernel);
    CHECK(b(0) == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("identical predictions reduce b to the mean similarity") {
    const Instance inst = make_instance(14, 3, 2, 85);
    const ModelState zero = ModelState::zero(2, inst.split.l(), 1.0);  // f identical (all 0)
    const Eigen::VectorXd b = score_representativeness(zero, inst.caches, inst.kernel);
    for (int j = 0; j < inst.split.u(); ++j) {
      CHECK(b(j) == doctest::Approx(inst.caches.w_UU.row(j).mean()).epsilon(1e-14));
    }
  }

  SUBCASE("random instance matches the double-loop oracle") {
    const Instance inst = make_instance(13, 3, 2, 86);
    const ModelState state = state_with_theta(random_theta(2, inst.split.l(), 87));
    const Eigen::VectorXd b = score_representativeness(state, inst.caches, inst.kernel);
    const double gamma = inst.kernel.gamma_label();
    const int u = inst.split.u();
    for (int j = 0; j < u; ++j) {
      double expected = 0.0;
      for (int i = 0; i < u; ++i) {
        double dist = 0.0;
        for (int k = 0; k < 2; ++k) {
          const double d = prediction_oracle(state.theta, inst.caches.K_LU, k, j) -
                           prediction_oracle(state.theta, inst.caches.K_LU, k, i);
          dist += d * d;
        }
        expected += std::exp(-gamma * dist) * inst.caches.w_UU(j, i);
      }
      expected /= u;
      CHECK(b(j) == doctest::Approx(expected).epsilon(1e-14));
      CHECK(b(j) > 0.0);
      CHECK(b(j) <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("score_redundancy cases") {
  SUBCASE("duplicate of the only labeled point scores 1 when it fits") {
    MultiLabelDataset ds = make_random(4, 2, 2, 88);
    ds.features.row(2) = ds.features.row(0);  // pool duplicate of labeled 0
    ExperimentSplit split;
    split.labeled_idx = {0};
    split.pool_idx = {2};
    split.test_idx = {1, 3};
    const KernelConfig kernel = KernelConfig::defaults_for(2, 2);
    const GramCache caches = build_gram(ds, split, kernel);
    Eigen::MatrixXd y_L = ds.labels.row(0).cast<double>();
    // Coefficients that reproduce y exactly at the labeled point: K_LL = (1).
    Eigen::MatrixXd theta(2, 1);
    theta << y_L(0, 0), y_L(0, 1);
    const Eigen::VectorXd c = score_redundancy(state_with_theta(theta), caches, y_L, kernel);
    CHECK(c(0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("predictions far from every labeled row push c to 0") {
    const Instance inst = make_instance(12, 3, 2, 89);
    const ModelState huge = state_with_theta(
        Eigen::MatrixXd::Constant(2, inst.split.l(), 50.0));
    const Eigen::VectorXd c = score_redundancy(huge, inst.caches, inst.y_L, inst.kernel);
    CHECK(c.maxCoeff() < 1e-6);
  }

  SUBCASE("random instance matches the loop oracle") {
    const Instance inst = make_instance(12, 3, 2, 90);
    const ModelState state = state_with_theta(random_theta(2, inst.split.l(), 91));
    const Eigen::VectorXd c = score_redundancy(state, inst.caches, inst.y_L, inst.kernel);
    const double gamma = inst.kernel.gamma_label();
    for (int j = 0; j < inst.split.u(); ++j) {
      double expected = 0.0;
      for (int i = 0; i < inst.split.l(); ++i) {
        double dist = 0.0;
        for (int k = 0; k < 2; ++k) {
          const double d =
              prediction_oracle(state.theta, inst.caches.K_LU, k, j) - inst.y_L(i, k);
          dist += d * d;
        }
        expected += std::exp(-gamma * dist) * inst.caches.w_UL(j, i);
      }
      expected /= inst.split.l();
      CHECK(c(j) == doctest::Approx(expected).epsilon(1e-14));
    }
  }
}

TEST_CASE("compute_scores assembles H = a + beta1 b - beta2 c") {
  const Instance inst = make_instance(15, 3, 2, 92);
  SolverConfig solver;
  solver.beta1 = 0.7;
  solver.beta2 = 0.3;
  const ModelState state = state_with_theta(random_theta(2, inst.split.l(), 93));
  const SelectionScores scores = compute_scores(state, inst.caches, inst.y_L, solver, inst.kernel);
  const Eigen::VectorXd expected = scores.a + solver.beta1 * scores.b - solver.beta2 * scores.c;
  CHECK((scores.H - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(scores.a.size() == inst.split.u());
}

TEST_CASE("solve_alpha is the simplex argmax with lowest-index ties") {
  Eigen::VectorXd h(3);
  h << 0.2, 0.9, 0.5;
  AlphaVector alpha = solve_alpha(h);
  CHECK(alpha.alpha(1) == 1.0);
  CHECK(alpha.alpha.sum() == doctest::Approx(1.0));

  Eigen::VectorXd flat = Eigen::VectorXd::Constant(4, 0.25);
  CHECK(solve_alpha(flat).alpha(0) == 1.0);

  CHECK_THROWS_AS(solve_alpha(Eigen::VectorXd()), query_error);

  SUBCASE("matches brute-force vertex enumeration") {
    Rng rng(94);
    for (int trial = 0; trial < 200; ++trial) {
      const int u = 2 + rng.uniform_int(5);
      Eigen::VectorXd scores(u);
      for (int j = 0; j < u; ++j) scores(j) = rng.normal();
      const AlphaVector chosen = solve_alpha(scores);
      // Enumerate all one-hot vertices; the linear objective alpha.H must be
      // maximal at the returned vertex.
      double best = -std::numeric_limits<double>::infinity();
      int best_j = -1;
      for (int j = 0; j < u; ++j) {
        if (scores(j) > best) {
          best = scores(j);
          best_j = j;
        }
      }
      CHECK(chosen.alpha(best_j) == 1.0);
      CHECK((chosen.alpha.array() == 0.0).count() == u - 1);
    }
  }

  SUBCASE("positive rescaling never changes the argmax") {
    Rng rng(95);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd scores(5);
      for (int j = 0; j < 5; ++j) scores(j) = rng.normal();
      const double scale = 0.01 + 10.0 * rng.uniform01();
      const AlphaVector base = solve_alpha(scores);
      const AlphaVector scaled = solve_alpha((scale * scores).eval());
      CHECK(base.alpha == scaled.alpha);
    }
  }
}

TEST_CASE("selected candidate's rank moves monotonically with the tradeoffs") {
  Rng rng(96);
  const auto rank_of = [](const Eigen::VectorXd& v, int index) {
    int rank = 0;
    for (int j = 0; j < v.size(); ++j) {
      if (v(j) < v(index)) ++rank;
    }
    return rank;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const int u = 3 + rng.uniform_int(6);
    Eigen::VectorXd a(u), b(u), c(u);
    for (int j = 0; j < u; ++j) {
      a(j) = rng.uniform01();
      b(j) = rng.uniform01();
      c(j) = rng.uniform01();
    }
    int previous_rank = -1;
    for (double beta1 : {0.0, 0.5, 1.0, 2.0, 8.0}) {
      const Eigen::VectorXd h = a + beta1 * b - 0.5 * c;
      int selected = 0;
      solve_alpha(h).alpha.maxCoeff(&selected);
      const int b_rank = rank_of(b, selected);
      if (previous_rank >= 0) CHECK(b_rank >= previous_rank);
      previous_rank = b_rank;
    }
    previous_rank = -1;
    for (double beta2 : {0.0, 0.5, 1.0, 2.0, 8.0}) {
      const Eigen::VectorXd h = a + 0.5 * b - beta2 * c;
      int selected = 0;
      solve_alpha(h).alpha.maxCoeff(&selected);
      const int neg_c_rank = rank_of((-c).eval(), selected);
      if (previous_rank >= 0) CHECK(neg_c_rank >= previous_rank);
      previous_rank = neg_c_rank;
    }
  }
}

TEST_CASE("a pool duplicate of a labeled point maximizes redundancy") {
  MultiLabelDataset ds = make_random(8, 2, 2, 97);
  // Labeled pair with opposite labels; pool has an exact duplicate of
  // labeled point 0 plus points progressively farther away.
  ds.features.row(0) << 0.0, 0.0;
  ds.features.row(1) << 4.0, 4.0;
  ds.labels.row(0) << 1, -1;
  ds.labels.row(1) << -1, 1;
  ds.features.row(2) = ds.features.row(0);
  ds.features.row(3) << 1.5, 0.0;
  ds.features.row(4) << 0.0, 2.5;
  ds.features.row(5) << 3.0, 1.0;
  ExperimentSplit split;
  split.labeled_idx = {0, 1};
  split.pool_idx = {2, 3, 4, 5};
  split.test_idx = {6, 7};
  const KernelConfig kernel = KernelConfig::defaults_for(2, 2);
  const GramCache caches = build_gram(ds, split, kernel);
  Eigen::MatrixXd y_L(2, 2);
  y_L << 1.0, -1.0, -1.0, 1.0;

  SolverConfig solver;
  solver.lambda = 0.01;
  const ModelState state = solve_fit(caches, y_L, solver, kernel).first;
  const Eigen::VectorXd c = score_redundancy(state, caches, y_L, kernel);
  int argmax = 0;
  c.maxCoeff(&argmax);
  CHECK(argmax == 0);  // the duplicate sits at pool position 0
}

TEST_CASE("query_next basics") {
  SolverConfig solver;
  solver.lambda = 0.05;

  SUBCASE("pool of size one returns that index") {
    MultiLabelDataset ds = make_random(8, 2, 2, 98);
    ExperimentSplit split;
    split.labeled_idx = {0, 1, 2, 3};
    split.pool_idx = {5};
    split.test_idx = {4, 6, 7};
    const KernelConfig kernel = KernelConfig::defaults_for(2, 2);
    const GramCache caches = build_gram(ds, split, kernel);
    Eigen::MatrixXd y_L(4, 2);
    for (int i = 0; i < 4; ++i) y_L.row(i) = ds.labels.row(i).cast<double>();
    const QueryResult result = query_next(split, caches, y_L, solver, kernel);
    CHECK(result.index == 5);
    CHECK(result.stable);
  }

  SUBCASE("identical pool points stabilize on the lowest index") {
    MultiLabelDataset ds = make_random(8, 2, 2, 99);
    ds.features.row(5) = ds.features.row(4);
    ds.labels.row(5) = ds.labels.row(4);
    ExperimentSplit split;
    split.labeled_idx = {0, 1, 2, 3};
    split.pool_idx = {4, 5};
    split.test_idx = {6, 7};
    const KernelConfig kernel = KernelConfig::defaults_for(2, 2);
    const GramCache caches = build_gram(ds, split, kernel);
    Eigen::MatrixXd y_L(4, 2);
    for (int i = 0; i < 4; ++i) y_L.row(i) = ds.labels.row(i).cast<double>();
    const QueryResult result = query_next(split, caches, y_L, solver, kernel);
    CHECK(result.index == 4);
    CHECK(result.stable);
    CHECK(result.alternations <= 2);
  }

  SUBCASE("empty pool throws") {
    MultiLabelDataset ds = make_random(6, 2, 2, 100);
    ExperimentSplit split;
    split.labeled_idx = {0, 1, 2, 3, 4, 5};
    const KernelConfig kernel = KernelConfig::defaults_for(2, 2);
    const GramCache caches = build_gram(ds, split, kernel);
    Eigen::MatrixXd y_L(6, 2);
    for (int i = 0; i < 6; ++i) y_L.row(i) = ds.labels.row(i).cast<double>();
    CHECK_THROWS_AS(query_next(split, caches, y_L, solver, kernel), query_error);
  }
}

TEST_CASE("query_next agrees with exhaustive per-candidate solve-and-score on toys") {
  SolverConfig solver;
  solver.lambda = 0.1;
  solver.tol_primal = 1e-8;
  solver.max_inner = 300;

  int agreements = 0;
  const int trials = 10;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    const int c = 2 + static_cast<int>(seed % 2);
    const Instance inst = make_instance(11, 3, c, 900 + seed, 0.2, 0.45);
    REQUIRE(inst.split.u() <= 6);
    REQUIRE(inst.split.l() <= 5);
    const QueryResult result = query_next(inst.split, inst.caches, inst.y_L, solver, inst.kernel);
    const int best = exhaustive_best_candidate(inst.caches, inst.y_L, solver, inst.kernel);
    if (result.pool_position == best) ++agreements;
  }
  CHECK(agreements == trials);
}
