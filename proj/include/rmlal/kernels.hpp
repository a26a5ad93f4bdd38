#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rmlal/dataset.hpp"

namespace rmlal {

/// Kernel sizes, written as gamma so that k(a,b) = exp(-gamma * ||a-b||^2).
/// One gamma per space: gamma_x for feature similarity, gamma_y for every
/// quantity living in label/output space. gamma_scale multiplies gamma_y to
/// drive the kernel-size study grid {gamma, 2*gamma, 4*gamma}.
struct KernelConfig {
  double gamma_x;
  double gamma_y;
  double gamma_scale = 1.0;

  static KernelConfig defaults_for(int feature_dim, int label_count, double scale = 1.0) {
    KernelConfig cfg;
    cfg.gamma_x = 1.0 / static_cast<double>(feature_dim);
    cfg.gamma_y = 1.0 / static_cast<double>(label_count);
    cfg.gamma_scale = scale;
    cfg.validate();
    return cfg;
  }

  /// Effective kernel size used in label space.
  double gamma_label() const { return gamma_y * gamma_scale; }

  void validate() const {
    if (!(gamma_x > 0.0) || !(gamma_y > 0.0) || !(gamma_scale > 0.0)) {
      throw config_error("kernel sizes must be strictly positive");
    }
  }
};

/// Precomputed Gaussian Gram blocks for one labeled/pool split.
/// K_* are feature-space kernel blocks used by the classifier; w_* are the
/// same kernel read as instance similarities among/against the pool.
struct GramCache {
  Eigen::MatrixXd K_LL;  // l x l
  Eigen::MatrixXd K_LU;  // l x u
  Eigen::MatrixXd w_UU;  // u x u
  Eigen::MatrixXd w_UL;  // u x l

  int l() const { return static_cast<int>(K_LL.rows()); }
  int u() const { return static_cast<int>(K_LU.cols()); }
};

/// Half-quadratic auxiliary weights, recomputed from the current classifier
/// at every outer reweighting step.
struct HQWeights {
  Eigen::MatrixXd M;      // l x C, fit weights m_ik
  Eigen::VectorXd N;      // C, margin weights n_qk for the current candidate
  Eigen::VectorXd Hstar;  // u, h_qi * w_qi
  Eigen::VectorXd Vstar;  // l, v_qi * w_qi
};

enum class WeightMode { mcc, mse };

double gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma);

/// Sample correntropy estimator: mean Gaussian kernel over paired samples.
double correntropy_estimate(const std::vector<Eigen::VectorXd>& A,
                            const std::vector<Eigen::VectorXd>& B, double gamma);

/// Label-aware consistency of two instances: the product of their label-space
/// and feature-space Gaussian similarities.
double consistency(const Eigen::VectorXd& x_i, const Eigen::VectorXd& y_i,
                   const Eigen::VectorXd& x_j, const Eigen::VectorXd& y_j,
                   const KernelConfig& config);

/// Feature kernel over a fixed index set, computed once per run and sliced
/// into per-round GramCache blocks as the labeled set grows.
struct TrainGram {
  Eigen::MatrixXd W;         // m x m, W(i,j) = k(x_{indices[i]}, x_{indices[j]})
  std::vector<int> indices;  // dataset row behind each gram row
  std::vector<int> position; // dataset row -> gram row (-1 if absent)
};

TrainGram build_train_gram(const MultiLabelDataset& dataset,
                           const std::vector<int>& indices, double gamma_x);

GramCache build_gram(const MultiLabelDataset& dataset, const ExperimentSplit& split,
                     const KernelConfig& config);
GramCache build_gram(const TrainGram& gram, const ExperimentSplit& split);

/// Auxiliary weights from the current coefficients. `theta` is C x l,
/// `q_pool` indexes the candidate inside the pool (column of K_LU). In mse
/// mode every exponential factor is frozen at 1, leaving only the structural
/// 1/u, 1/l and w factors.
HQWeights hq_weights(const Eigen::MatrixXd& theta, int q_pool, const GramCache& caches,
                     const Eigen::MatrixXd& y_L, const KernelConfig& config,
                     WeightMode mode = WeightMode::mcc);

}  // namespace rmlal
