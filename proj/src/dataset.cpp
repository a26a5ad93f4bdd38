#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "rmlal/dataset.hpp"
#include "rmlal/rng.hpp"

namespace rmlal {

void MultiLabelDataset::validate() const {
  if (features.rows() != labels.rows()) {
    throw dimension_error("feature rows (" + std::to_string(features.rows()) +
                          ") != label rows (" + std::to_string(labels.rows()) + ")");
  }
  if (n() < 1) throw empty_dataset_error("dataset '" + name + "' has no instances");
  if (c() < 2) throw schema_error("dataset '" + name + "' needs at least 2 labels");
  if (t() < 1) throw schema_error("dataset '" + name + "' needs at least 1 feature");
  if (static_cast<int>(label_names.size()) != c()) {
    throw schema_error("label name count does not match label columns");
  }
  if (static_cast<int>(feature_names.size()) != t()) {
    throw schema_error("feature name count does not match feature columns");
  }
  std::unordered_set<std::string> seen;
  for (const auto& l : label_names) {
    if (!seen.insert(l).second) throw schema_error("duplicate label name '" + l + "'");
  }
  for (int i = 0; i < n(); ++i) {
    for (int k = 0; k < c(); ++k) {
      const int v = labels(i, k);
      if (v != -1 && v != 1) {
        throw schema_error("label entry (" + std::to_string(i) + "," + std::to_string(k) +
                           ") is " + std::to_string(v) + ", expected -1 or +1");
      }
    }
  }
}

bool ExperimentSplit::in_pool(int index) const {
  return std::find(pool_idx.begin(), pool_idx.end(), index) != pool_idx.end();
}

bool ExperimentSplit::in_labeled(int index) const {
  return std::find(labeled_idx.begin(), labeled_idx.end(), index) != labeled_idx.end();
}

void ExperimentSplit::promote(int index) {
  const auto it = std::find(pool_idx.begin(), pool_idx.end(), index);
  if (it == pool_idx.end()) {
    throw query_error("index " + std::to_string(index) + " is not in the pool");
  }
  pool_idx.erase(it);
  labeled_idx.push_back(index);
}

void ExperimentSplit::validate(int n) const {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  auto mark = [&](const std::vector<int>& set, const char* which) {
    for (int idx : set) {
      if (idx < 0 || idx >= n) {
        throw config_error(std::string(which) + " index " + std::to_string(idx) + " out of range");
      }
      if (seen[static_cast<std::size_t>(idx)]++) {
        throw config_error("index " + std::to_string(idx) + " appears in two split sets");
      }
    }
  };
  mark(test_idx, "test");
  mark(labeled_idx, "labeled");
  mark(pool_idx, "pool");
  const std::size_t total = test_idx.size() + labeled_idx.size() + pool_idx.size();
  if (total != static_cast<std::size_t>(n)) {
    throw config_error("split covers " + std::to_string(total) + " of " + std::to_string(n) +
                       " instances");
  }
  if (labeled_idx.empty()) throw config_error("labeled set is empty");
}

MultiLabelDataset standardize_features(const MultiLabelDataset& dataset) {
  if (dataset.n() < 2) throw config_error("standardization needs at least 2 instances");
  MultiLabelDataset out = dataset;
  const double n = static_cast<double>(dataset.n());
  for (int j = 0; j < dataset.t(); ++j) {
    const double mean = dataset.features.col(j).mean();
    const double var = (dataset.features.col(j).array() - mean).square().sum() / n;
    if (var <= 0.0) {
      out.features.col(j).setZero();
    } else {
      out.features.col(j) = (dataset.features.col(j).array() - mean) / std::sqrt(var);
    }
  }
  return out;
}

namespace {

// The initial labeled set must expose both classes for at least one label,
// otherwise no per-label training signal exists at all.
bool has_mixed_label(const MultiLabelDataset& dataset, const std::vector<int>& labeled) {
  for (int k = 0; k < dataset.c(); ++k) {
    bool pos = false, neg = false;
    for (int idx : labeled) {
      (dataset.labels(idx, k) > 0 ? pos : neg) = true;
      if (pos && neg) return true;
    }
  }
  return false;
}

}  // namespace

ExperimentSplit make_split(const MultiLabelDataset& dataset, int seed,
                           double test_fraction, double init_labeled_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw config_error("test_fraction must lie in (0,1)");
  }
  if (!(init_labeled_fraction > 0.0 && init_labeled_fraction < 1.0)) {
    throw config_error("init_labeled_fraction must lie in (0,1)");
  }
  const int n = dataset.n();
  const int n_test = static_cast<int>(std::floor(n * test_fraction));
  const int n_rest = n - n_test;
  const int n_labeled = static_cast<int>(std::ceil(n_rest * init_labeled_fraction));
  if (n_labeled < 1 || n_labeled > n_rest) {
    throw config_error("fractions leave no room for an initial labeled set");
  }

  const int max_attempts = 200;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(fnv1a64("split") ^ (static_cast<std::uint64_t>(seed) * 0x9e3779b97f4a7c15ull +
                                static_cast<std::uint64_t>(attempt)));
    rng.shuffle(order);

    ExperimentSplit split;
    split.seed = seed;
    split.test_idx.assign(order.begin(), order.begin() + n_test);
    split.labeled_idx.assign(order.begin() + n_test, order.begin() + n_test + n_labeled);
    split.pool_idx.assign(order.begin() + n_test + n_labeled, order.end());
    if (has_mixed_label(dataset, split.labeled_idx)) {
      split.validate(n);
      return split;
    }
  }
  throw config_error(
      "could not draw an initial labeled set containing two classes for any label; "
      "raise init_labeled_fraction");
}

OracleAnswer oracle_labels(const MultiLabelDataset& dataset,
                           const ExperimentSplit& split, int index) {
  if (!split.in_pool(index)) {
    throw query_error("oracle asked about index " + std::to_string(index) +
                      " which is not in the pool");
  }
  OracleAnswer answer;
  answer.instance = index;
  answer.labels = dataset.labels.row(index).transpose();
  return answer;
}

void save_split(const ExperimentSplit& split, const std::string& dataset_name,
                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write split manifest '" + path + "'");
  out << "dataset " << dataset_name << '\n';
  out << "seed " << split.seed << '\n';
  auto emit = [&](const char* tag, const std::vector<int>& v) {
    out << tag;
    for (int idx : v) out << ' ' << idx;
    out << '\n';
  };
  emit("test", split.test_idx);
  emit("labeled", split.labeled_idx);
  emit("pool", split.pool_idx);
  if (!out) throw io_error("failed while writing '" + path + "'");
}

ExperimentSplit load_split(const std::string& path, std::string* dataset_name) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open split manifest '" + path + "'");
  ExperimentSplit split;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream is(line);
    std::string tag;
    if (!(is >> tag)) continue;
    if (tag == "dataset") {
      std::string rest;
      std::getline(is, rest);
      const std::size_t b = rest.find_first_not_of(' ');
      if (dataset_name) *dataset_name = b == std::string::npos ? "" : rest.substr(b);
    } else if (tag == "seed") {
      if (!(is >> split.seed)) throw parse_error("bad seed line", line_no);
    } else if (tag == "test" || tag == "labeled" || tag == "pool") {
      std::vector<int>& target = tag == "test"      ? split.test_idx
                                 : tag == "labeled" ? split.labeled_idx
                                                    : split.pool_idx;
      int idx;
      while (is >> idx) target.push_back(idx);
    } else {
      throw parse_error("unknown manifest tag '" + tag + "'", line_no);
    }
  }
  return split;
}

}  // namespace rmlal
