#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "rmlal/dataset.hpp"
#include "rmlal/rng.hpp"

namespace rmlal::testsupport {

/// Latent-factor multi-label generator. Every instance carries a
/// low-dimensional latent vector that drives both its features and all of its
/// labels, so labels are learnable from features and correlated through the
/// shared latent space. Latents are drawn around a set of cluster centers,
/// which gives the feature kernel actual neighborhoods to resolve. Per-label
/// thresholds are placed at empirical score quantiles, which pins the
/// positive rate at cardinality / c and guarantees both classes exist for
/// every label.
inline MultiLabelDataset make_synthetic(const std::string& name, int n, int t, int c,
                                        double cardinality, std::uint64_t seed,
                                        double feature_noise = 0.5,
                                        double flip_prob = 0.0, int clusters = 12,
                                        double cluster_spread = 0.45) {
  Rng rng(seed);
  const int d = std::min(8, t);

  std::vector<Eigen::VectorXd> directions;
  for (int k = 0; k < c; ++k) {
    Eigen::VectorXd u(d);
    for (int j = 0; j < d; ++j) u(j) = rng.normal();
    directions.push_back(u.normalized());
  }
  Eigen::MatrixXd mixing(t, d);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < d; ++j) mixing(i, j) = rng.normal() / std::sqrt(static_cast<double>(d));
  }

  Eigen::MatrixXd centers(std::max(clusters, 1), d);
  for (int g = 0; g < centers.rows(); ++g) {
    for (int j = 0; j < d; ++j) centers(g, j) = clusters > 0 ? rng.normal() : 0.0;
  }
  const double spread = clusters > 0 ? cluster_spread : 1.0;

  Eigen::MatrixXd latent(n, d);
  for (int i = 0; i < n; ++i) {
    const int g = clusters > 0 ? rng.uniform_int(clusters) : 0;
    for (int j = 0; j < d; ++j) latent(i, j) = centers(g, j) + spread * rng.normal();
  }

  MultiLabelDataset ds;
  ds.name = name;
  ds.features.resize(n, t);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = mixing * latent.row(i).transpose();
    for (int j = 0; j < t; ++j) x(j) += feature_noise * rng.normal();
    ds.features.row(i) = x.transpose();
  }

  ds.labels.resize(n, c);
  const double positive_rate = std::clamp(cardinality / static_cast<double>(c), 0.05, 0.95);
  for (int k = 0; k < c; ++k) {
    Eigen::VectorXd scores = latent * directions[static_cast<std::size_t>(k)];
    std::vector<double> sorted(scores.data(), scores.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const int positives = std::clamp(static_cast<int>(std::lround(positive_rate * n)), 1, n - 1);
    const double threshold = 0.5 * (sorted[static_cast<std::size_t>(positives - 1)] +
                                    sorted[static_cast<std::size_t>(positives)]);
    for (int i = 0; i < n; ++i) {
      ds.labels(i, k) = scores(i) > threshold ? 1 : -1;
    }
  }

  if (flip_prob > 0.0) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < c; ++k) {
        if (rng.uniform01() < flip_prob) ds.labels(i, k) = -ds.labels(i, k);
      }
    }
    // Keep every label two-class after flipping.
    for (int k = 0; k < c; ++k) {
      bool pos = false, neg = false;
      for (int i = 0; i < n; ++i) (ds.labels(i, k) > 0 ? pos : neg) = true;
      if (!pos) ds.labels(0, k) = 1;
      if (!neg) ds.labels(0, k) = -1;
    }
  }

  for (int j = 0; j < t; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  for (int k = 0; k < c; ++k) ds.label_names.push_back("label" + std::to_string(k));
  ds.validate();
  return ds;
}

/// Small fully random dataset for property tests; labels are arbitrary signs.
inline MultiLabelDataset make_random(int n, int t, int c, std::uint64_t seed) {
  Rng rng(seed);
  MultiLabelDataset ds;
  ds.name = "random" + std::to_string(seed);
  ds.features.resize(n, t);
  ds.labels.resize(n, c);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < t; ++j) ds.features(i, j) = rng.normal();
    for (int k = 0; k < c; ++k) ds.labels(i, k) = rng.uniform01() < 0.5 ? -1 : 1;
  }
  // At least one mixed label column so splits are drawable.
  if (n >= 2) {
    ds.labels(0, 0) = 1;
    ds.labels(1, 0) = -1;
  }
  for (int j = 0; j < t; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  for (int k = 0; k < c; ++k) ds.label_names.push_back("label" + std::to_string(k));
  ds.validate();
  return ds;
}

}  // namespace rmlal::testsupport
