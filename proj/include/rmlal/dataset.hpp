#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rmlal/errors.hpp"

namespace rmlal {

/// A multi-label dataset: n instances with t features and C binary labels.
/// Label entries are stored as {-1,+1} throughout; loaders remap 0/1 inputs.
struct MultiLabelDataset {
  Eigen::MatrixXd features;  // n x t
  Eigen::MatrixXi labels;    // n x C, entries in {-1,+1}
  std::vector<std::string> label_names;
  std::vector<std::string> feature_names;
  std::string name;

  int n() const { return static_cast<int>(features.rows()); }
  int t() const { return static_cast<int>(features.cols()); }
  int c() const { return static_cast<int>(labels.cols()); }

  /// Throws if any structural invariant is broken (shape mismatch, label
  /// entries outside {-1,+1}, duplicate label names, degenerate sizes).
  void validate() const;
};

/// Ground-truth answer of the simulated oracle for one pool instance.
struct OracleAnswer {
  int instance;
  Eigen::VectorXi labels;  // length C, entries in {-1,+1}
};

/// Disjoint test / labeled / pool partition of {0..n-1}.
struct ExperimentSplit {
  std::vector<int> test_idx;
  std::vector<int> labeled_idx;
  std::vector<int> pool_idx;
  int seed = 0;

  int l() const { return static_cast<int>(labeled_idx.size()); }
  int u() const { return static_cast<int>(pool_idx.size()); }

  bool in_pool(int index) const;
  bool in_labeled(int index) const;

  /// Moves `index` from the pool to the labeled set (appended last).
  /// Throws query_error if the index is not in the pool.
  void promote(int index);

  /// Throws if the three sets are not a disjoint cover of {0..n-1}.
  void validate(int n) const;
};

MultiLabelDataset load_mulan_arff(const std::string& data_path,
                                  const std::string& label_header_path);

/// CSV fallback: header row required, first t columns are features, the last
/// `label_count` columns are 0/1 labels.
MultiLabelDataset load_csv(const std::string& path, int label_count);

void write_arff(const MultiLabelDataset& dataset, const std::string& data_path);
void write_labels_xml(const MultiLabelDataset& dataset, const std::string& path);
void write_csv(const MultiLabelDataset& dataset, const std::string& path);

/// Z-scores every feature column (population variance). Zero-variance
/// columns become all-zero.
MultiLabelDataset standardize_features(const MultiLabelDataset& dataset);

/// Random test/labeled/pool split. The initial labeled set is resampled with
/// deterministic seed offsets until at least one label column contains both
/// classes; see make_split in dataset.cpp for the rule.
ExperimentSplit make_split(const MultiLabelDataset& dataset, int seed,
                           double test_fraction = 0.5,
                           double init_labeled_fraction = 0.04);

/// Simulated oracle: ground-truth labels of one pool instance. The caller is
/// responsible for promoting the index afterwards.
OracleAnswer oracle_labels(const MultiLabelDataset& dataset,
                           const ExperimentSplit& split, int index);

void save_split(const ExperimentSplit& split, const std::string& dataset_name,
                const std::string& path);
ExperimentSplit load_split(const std::string& path,
                           std::string* dataset_name = nullptr);

}  // namespace rmlal
