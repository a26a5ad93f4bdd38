#pragma once

#include <map>
#include <string>
#include <vector>

#include "rmlal/baselines.hpp"
#include "rmlal/eval.hpp"
#include "rmlal/metrics.hpp"

namespace rmlal {

struct DatasetSpec {
  std::string name;
  std::string arff_path;
  std::string xml_path;
  std::string csv_path;  // CSV fallback, used when arff_path is empty
  int csv_labels = 0;
};

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<std::string> strategies{"rmlal", "random"};
  std::vector<int> seeds{0, 1, 2, 3, 4};
  int budget = 100;
  int checkpoint_every = 4;
  double test_fraction = 0.5;
  double init_labeled_fraction = 0.04;
  double gamma_x_override = 0.0;  // 0 -> 1/t
  double gamma_y_override = 0.0;  // 0 -> 1/C
  double gamma_scale = 1.0;
  SolverConfig solver;
  std::string out_dir = "results";

  void validate() const;
  KernelConfig kernel_for(const MultiLabelDataset& dataset) const;
};

struct RunRecord {
  LearningCurve curve;
  std::vector<int> queries;       // dataset indices in query order
  std::vector<double> query_ms;   // selection wall time per query
  double seconds = 0.0;           // whole run, including checkpoint training
};

struct ResultsBundle {
  std::vector<RunRecord> runs;
  std::map<std::pair<std::string, int>, ExperimentSplit> splits;  // (dataset, seed)
  std::vector<std::pair<std::string, std::string>> errors;        // dataset -> message
  std::string config_json;
};

struct StrategySummary {
  std::string dataset;
  std::string strategy;
  WTLSummary wtl;
  double mean_final_f1 = 0.0;
  double std_final_f1 = 0.0;
};

/// One active-learning run: queries `budget` instances with the given
/// strategy and records micro-F1 on the test block at every checkpoint.
/// `dataset` must already be standardized.
RunRecord run_active_learning(const MultiLabelDataset& dataset, const ExperimentSplit& split,
                              const std::string& strategy, const SolverConfig& solver,
                              const KernelConfig& kernel, int budget, int checkpoint_every,
                              Rng& rng);

/// Full protocol over datasets x strategies x seeds. Datasets that fail to
/// load are recorded in bundle.errors and skipped.
ResultsBundle run_experiment(const ExperimentConfig& config);

/// Same, with the datasets already in memory (standardization happens here).
ResultsBundle run_experiment(const ExperimentConfig& config,
                             const std::vector<MultiLabelDataset>& datasets);

/// Recomputes a learning curve from a persisted query log; must reproduce the
/// recorded checkpoints exactly.
std::vector<std::pair<int, double>> replay_curve(const MultiLabelDataset& dataset,
                                                 const ExperimentSplit& split,
                                                 const std::vector<int>& queries,
                                                 int checkpoint_every);

std::vector<StrategySummary> summarize(const ResultsBundle& bundle,
                                       const std::string& baseline,
                                       double significance = 0.05);
std::vector<StrategySummary> summarize_curves(const std::vector<LearningCurve>& curves,
                                              const std::string& baseline,
                                              double significance = 0.05);

void emit_curves_csv(const ResultsBundle& bundle, const std::string& path);
void emit_queries_csv(const ResultsBundle& bundle, const std::string& path);
void emit_timing_csv(const ResultsBundle& bundle, const std::string& path);
void emit_summary_csv(const std::vector<StrategySummary>& table, const std::string& path);
std::vector<LearningCurve> load_curves_csv(const std::string& path);

/// Writes curves, query logs, split manifests and the config snapshot under
/// `out_dir` (created if needed). Files are written atomically.
void persist_bundle(const ResultsBundle& bundle, const std::string& out_dir);

ExperimentConfig config_from_json(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

}  // namespace rmlal
