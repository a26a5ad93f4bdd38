#include <cmath>

#include "rmlal/kernels.hpp"

namespace rmlal {

double gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma) {
  if (a.size() != b.size()) {
    throw dimension_error("gaussian_kernel: vector lengths " + std::to_string(a.size()) +
                          " and " + std::to_string(b.size()) + " differ");
  }
  if (!(gamma > 0.0)) throw config_error("gaussian_kernel: gamma must be positive");
  return std::exp(-gamma * (a - b).squaredNorm());
}

double correntropy_estimate(const std::vector<Eigen::VectorXd>& A,
                            const std::vector<Eigen::VectorXd>& B, double gamma) {
  if (A.empty() || A.size() != B.size()) {
    throw domain_error("correntropy_estimate: needs equally sized, non-empty samples");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    sum += gaussian_kernel(A[i], B[i], gamma);
  }
  return sum / static_cast<double>(A.size());
}

double consistency(const Eigen::VectorXd& x_i, const Eigen::VectorXd& y_i,
                   const Eigen::VectorXd& x_j, const Eigen::VectorXd& y_j,
                   const KernelConfig& config) {
  config.validate();
  const double label_factor = gaussian_kernel(y_i, y_j, config.gamma_label());
  const double w_ij = gaussian_kernel(x_i, x_j, config.gamma_x);
  return label_factor * w_ij;
}

TrainGram build_train_gram(const MultiLabelDataset& dataset,
                           const std::vector<int>& indices, double gamma_x) {
  if (!(gamma_x > 0.0)) throw config_error("build_train_gram: gamma_x must be positive");
  TrainGram gram;
  gram.indices = indices;
  gram.position.assign(static_cast<std::size_t>(dataset.n()), -1);
  const int m = static_cast<int>(indices.size());
  for (int i = 0; i < m; ++i) {
    gram.position[static_cast<std::size_t>(indices[static_cast<std::size_t>(i)])] = i;
  }
  gram.W.resize(m, m);
  for (int i = 0; i < m; ++i) {
    gram.W(i, i) = 1.0;
    const auto xi = dataset.features.row(indices[static_cast<std::size_t>(i)]);
    for (int j = i + 1; j < m; ++j) {
      const double v = std::exp(
          -gamma_x * (xi - dataset.features.row(indices[static_cast<std::size_t>(j)])).squaredNorm());
      gram.W(i, j) = v;
      gram.W(j, i) = v;
    }
  }
  return gram;
}

GramCache build_gram(const MultiLabelDataset& dataset, const ExperimentSplit& split,
                     const KernelConfig& config) {
  config.validate();
  std::vector<int> train = split.labeled_idx;
  train.insert(train.end(), split.pool_idx.begin(), split.pool_idx.end());
  return build_gram(build_train_gram(dataset, train, config.gamma_x), split);
}

GramCache build_gram(const TrainGram& gram, const ExperimentSplit& split) {
  const int l = split.l();
  const int u = split.u();
  auto row_of = [&](int dataset_idx) {
    const int pos = gram.position[static_cast<std::size_t>(dataset_idx)];
    if (pos < 0) throw dimension_error("split index missing from train gram");
    return pos;
  };
  GramCache cache;
  cache.K_LL.resize(l, l);
  cache.K_LU.resize(l, u);
  for (int i = 0; i < l; ++i) {
    const int gi = row_of(split.labeled_idx[static_cast<std::size_t>(i)]);
    for (int j = 0; j < l; ++j) {
      cache.K_LL(i, j) = gram.W(gi, row_of(split.labeled_idx[static_cast<std::size_t>(j)]));
    }
    for (int j = 0; j < u; ++j) {
      cache.K_LU(i, j) = gram.W(gi, row_of(split.pool_idx[static_cast<std::size_t>(j)]));
    }
  }
  cache.w_UU.resize(u, u);
  for (int i = 0; i < u; ++i) {
    const int gi = row_of(split.pool_idx[static_cast<std::size_t>(i)]);
    for (int j = 0; j < u; ++j) {
      cache.w_UU(i, j) = gram.W(gi, row_of(split.pool_idx[static_cast<std::size_t>(j)]));
    }
  }
  cache.w_UL = cache.K_LU.transpose();
  return cache;
}

HQWeights hq_weights(const Eigen::MatrixXd& theta, int q_pool, const GramCache& caches,
                     const Eigen::MatrixXd& y_L, const KernelConfig& config,
                     WeightMode mode) {
  const int l = caches.l();
  const int u = caches.u();
  const int c = static_cast<int>(theta.rows());
  if (theta.cols() != l || y_L.rows() != l || y_L.cols() != c) {
    throw dimension_error("hq_weights: theta/y_L shapes inconsistent with caches");
  }
  if (q_pool < 0 || q_pool >= u) throw query_error("hq_weights: candidate outside pool");

  const double gamma = config.gamma_label();
  HQWeights w;
  w.M.resize(l, c);
  w.N.resize(c);
  w.Hstar.resize(u);
  w.Vstar.resize(l);

  if (mode == WeightMode::mse) {
    w.M.setOnes();
    w.N.setOnes();
    w.Hstar = caches.w_UU.row(q_pool).transpose() / static_cast<double>(u);
    w.Vstar = caches.w_UL.row(q_pool).transpose() / static_cast<double>(l);
    return w;
  }

  // Predictions on the labeled set and the pool from the current theta.
  const Eigen::MatrixXd f_L = theta * caches.K_LL;  // C x l
  const Eigen::MatrixXd f_U = theta * caches.K_LU;  // C x u
  const Eigen::VectorXd f_q = f_U.col(q_pool);      // C

  for (int i = 0; i < l; ++i) {
    for (int k = 0; k < c; ++k) {
      const double r = y_L(i, k) - f_L(k, i);
      w.M(i, k) = std::exp(-gamma * r * r);
    }
  }
  for (int k = 0; k < c; ++k) {
    const double a = std::abs(f_q(k));
    w.N(k) = std::exp(-gamma * (1.0 + 2.0 * a + f_q(k) * f_q(k)));
  }
  for (int i = 0; i < u; ++i) {
    const double h = std::exp(-gamma * (f_q - f_U.col(i)).squaredNorm()) / static_cast<double>(u);
    w.Hstar(i) = h * caches.w_UU(q_pool, i);
  }
  for (int i = 0; i < l; ++i) {
    const double v =
        std::exp(-gamma * (f_q - y_L.row(i).transpose()).squaredNorm()) / static_cast<double>(l);
    w.Vstar(i) = v * caches.w_UL(q_pool, i);
  }
  return w;
}

}  // namespace rmlal
