#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "rmlal/experiment.hpp"

namespace rmlal {

namespace {

const std::set<std::string> kKnownStrategies = {"rmlal", "mse_variant", "minmargin", "random"};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw io_error("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw io_error("failed while writing '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

Eigen::MatrixXd labeled_targets(const MultiLabelDataset& dataset,
                                const std::vector<int>& labeled) {
  Eigen::MatrixXd y(static_cast<int>(labeled.size()), dataset.c());
  for (int i = 0; i < static_cast<int>(labeled.size()); ++i) {
    y.row(i) = dataset.labels.row(labeled[static_cast<std::size_t>(i)]).cast<double>();
  }
  return y;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<int>(idx.size()), m.cols());
  for (int i = 0; i < static_cast<int>(idx.size()); ++i) {
    out.row(i) = m.row(idx[static_cast<std::size_t>(i)]);
  }
  return out;
}

Eigen::MatrixXi rows_of(const Eigen::MatrixXi& m, const std::vector<int>& idx) {
  Eigen::MatrixXi out(static_cast<int>(idx.size()), m.cols());
  for (int i = 0; i < static_cast<int>(idx.size()); ++i) {
    out.row(i) = m.row(idx[static_cast<std::size_t>(i)]);
  }
  return out;
}

double checkpoint_f1(const MultiLabelDataset& dataset, const ExperimentSplit& split) {
  const Eigen::MatrixXi predictions =
      train_eval_classifier(rows_of(dataset.features, split.labeled_idx),
                            rows_of(dataset.labels, split.labeled_idx),
                            rows_of(dataset.features, split.test_idx));
  return micro_f1(predictions, rows_of(dataset.labels, split.test_idx));
}

// Warm start for the next round: the newly labeled point gets a zero
// coefficient appended to every label row.
ModelState extend_warm(const ModelState& state) {
  ModelState next = state;
  next.theta.conservativeResize(Eigen::NoChange, state.theta.cols() + 1);
  next.theta.col(next.theta.cols() - 1).setZero();
  return next;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (checkpoint_every < 1 || budget < checkpoint_every) {
    throw config_error("need budget >= checkpoint_every >= 1");
  }
  if (seeds.empty()) throw config_error("need at least one seed");
  if (strategies.empty()) throw config_error("need at least one strategy");
  for (const auto& s : strategies) {
    if (!kKnownStrategies.count(s)) throw config_error("unknown strategy '" + s + "'");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0) ||
      !(init_labeled_fraction > 0.0 && init_labeled_fraction < 1.0)) {
    throw config_error("fractions must lie in (0,1)");
  }
  if (gamma_x_override < 0.0 || gamma_y_override < 0.0 || !(gamma_scale > 0.0)) {
    throw config_error("kernel overrides must be positive (or 0 for automatic)");
  }
  solver.validate();
}

KernelConfig ExperimentConfig::kernel_for(const MultiLabelDataset& dataset) const {
  KernelConfig kernel = KernelConfig::defaults_for(dataset.t(), dataset.c(), gamma_scale);
  if (gamma_x_override > 0.0) kernel.gamma_x = gamma_x_override;
  if (gamma_y_override > 0.0) kernel.gamma_y = gamma_y_override;
  kernel.validate();
  return kernel;
}

RunRecord run_active_learning(const MultiLabelDataset& dataset, const ExperimentSplit& split0,
                              const std::string& strategy, const SolverConfig& solver,
                              const KernelConfig& kernel, int budget, int checkpoint_every,
                              Rng& rng) {
  if (!kKnownStrategies.count(strategy)) throw config_error("unknown strategy '" + strategy + "'");
  const auto started = std::chrono::steady_clock::now();

  ExperimentSplit split = split0;
  const bool needs_kernel = strategy != "random";
  TrainGram train_gram;
  if (needs_kernel) {
    std::vector<int> train = split.labeled_idx;
    train.insert(train.end(), split.pool_idx.begin(), split.pool_idx.end());
    train_gram = build_train_gram(dataset, train, kernel.gamma_x);
  }

  RunRecord record;
  record.curve.method = strategy;
  record.curve.seed = split.seed;
  record.curve.dataset = dataset.name;

  ModelState warm;
  bool have_warm = false;
  const int steps = std::min(budget, split.u());

  for (int step = 1; step <= steps; ++step) {
    const auto query_started = std::chrono::steady_clock::now();
    int chosen = -1;
    if (strategy == "random") {
      chosen = random_query(split.pool_idx, rng);
    } else {
      const GramCache caches = build_gram(train_gram, split);
      const Eigen::MatrixXd y_L = labeled_targets(dataset, split.labeled_idx);
      if (strategy == "minmargin") {
        const ModelState state =
            solve_fit(caches, y_L, solver, kernel, have_warm ? &warm : nullptr).first;
        chosen = minmargin_query(state, caches, split.pool_idx);
        warm = extend_warm(state);
      } else {
        const QueryResult result =
            strategy == "rmlal"
                ? query_next(split, caches, y_L, solver, kernel, have_warm ? &warm : nullptr)
                : mse_variant_query(split, caches, y_L, solver, kernel,
                                    have_warm ? &warm : nullptr);
        chosen = result.index;
        warm = extend_warm(result.model);
      }
      have_warm = true;
    }

    record.query_ms.push_back(
        1e3 * std::chrono::duration<double>(std::chrono::steady_clock::now() - query_started)
                  .count());

    oracle_labels(dataset, split, chosen);  // validates pool membership
    split.promote(chosen);
    record.queries.push_back(chosen);

    if (step % checkpoint_every == 0) {
      record.curve.checkpoints.emplace_back(step, checkpoint_f1(dataset, split));
    }
  }

  record.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return record;
}

std::vector<std::pair<int, double>> replay_curve(const MultiLabelDataset& dataset,
                                                 const ExperimentSplit& split0,
                                                 const std::vector<int>& queries,
                                                 int checkpoint_every) {
  ExperimentSplit split = split0;
  std::vector<std::pair<int, double>> checkpoints;
  int step = 0;
  for (int index : queries) {
    split.promote(index);
    ++step;
    if (step % checkpoint_every == 0) {
      checkpoints.emplace_back(step, checkpoint_f1(dataset, split));
    }
  }
  return checkpoints;
}

ResultsBundle run_experiment(const ExperimentConfig& config) {
  config.validate();
  ResultsBundle bundle;
  bundle.config_json = config_to_json(config);
  for (const auto& spec : config.datasets) {
    MultiLabelDataset dataset;
    try {
      dataset = spec.arff_path.empty() ? load_csv(spec.csv_path, spec.csv_labels)
                                       : load_mulan_arff(spec.arff_path, spec.xml_path);
      if (!spec.name.empty()) dataset.name = spec.name;
    } catch (const std::exception& ex) {
      bundle.errors.emplace_back(spec.name.empty() ? spec.arff_path + spec.csv_path : spec.name,
                                 ex.what());
      continue;
    }
    ExperimentConfig one = config;
    one.datasets.clear();
    ResultsBundle part = run_experiment(one, {dataset});
    bundle.runs.insert(bundle.runs.end(), part.runs.begin(), part.runs.end());
    bundle.splits.insert(part.splits.begin(), part.splits.end());
  }
  return bundle;
}

ResultsBundle run_experiment(const ExperimentConfig& config,
                             const std::vector<MultiLabelDataset>& datasets) {
  config.validate();
  ResultsBundle bundle;
  bundle.config_json = config_to_json(config);
  for (const auto& raw : datasets) {
    const MultiLabelDataset dataset = standardize_features(raw);
    const KernelConfig kernel = config.kernel_for(dataset);
    for (int seed : config.seeds) {
      const ExperimentSplit split =
          make_split(dataset, seed, config.test_fraction, config.init_labeled_fraction);
      bundle.splits.emplace(std::make_pair(dataset.name, seed), split);
      for (const auto& strategy : config.strategies) {
        Rng rng(fnv1a64(dataset.name + "|" + strategy + "|" + std::to_string(seed)));
        bundle.runs.push_back(run_active_learning(dataset, split, strategy, config.solver,
                                                  kernel, config.budget,
                                                  config.checkpoint_every, rng));
      }
    }
  }
  return bundle;
}

std::vector<StrategySummary> summarize(const ResultsBundle& bundle, const std::string& baseline,
                                       double significance) {
  std::vector<LearningCurve> curves;
  curves.reserve(bundle.runs.size());
  for (const auto& run : bundle.runs) curves.push_back(run.curve);
  return summarize_curves(curves, baseline, significance);
}

std::vector<StrategySummary> summarize_curves(const std::vector<LearningCurve>& all_curves,
                                              const std::string& baseline,
                                              double significance) {
  std::map<std::pair<std::string, std::string>, std::vector<LearningCurve>> grouped;
  for (const auto& curve : all_curves) {
    grouped[{curve.dataset, curve.method}].push_back(curve);
  }
  std::set<std::string> datasets;
  for (const auto& [key, curves] : grouped) datasets.insert(key.first);

  std::vector<StrategySummary> table;
  for (const auto& dataset : datasets) {
    const auto base_it = grouped.find({dataset, baseline});
    if (base_it == grouped.end()) {
      throw config_error("baseline strategy '" + baseline + "' has no runs on dataset '" +
                         dataset + "'");
    }
    for (const auto& [key, curves] : grouped) {
      if (key.first != dataset) continue;
      for (const auto& curve : curves) {
        if (curve.checkpoints.empty()) {
          throw config_error("strategy '" + key.second + "' has a run without checkpoints on '" +
                             dataset + "'");
        }
      }
      StrategySummary row;
      row.dataset = dataset;
      row.strategy = key.second;
      row.wtl = paired_ttest_wtl(curves, base_it->second, significance);
      double mean = 0.0;
      for (const auto& curve : curves) mean += curve.checkpoints.back().second;
      mean /= static_cast<double>(curves.size());
      double var = 0.0;
      for (const auto& curve : curves) {
        const double d = curve.checkpoints.back().second - mean;
        var += d * d;
      }
      row.mean_final_f1 = mean;
      row.std_final_f1 = curves.size() > 1
                             ? std::sqrt(var / static_cast<double>(curves.size() - 1))
                             : 0.0;
      table.push_back(std::move(row));
    }
  }
  return table;
}

void emit_curves_csv(const ResultsBundle& bundle, const std::string& path) {
  std::ostringstream out;
  out << "dataset,strategy,seed,queries,micro_f1\n";
  for (const auto& run : bundle.runs) {
    for (const auto& [queries, f1] : run.curve.checkpoints) {
      out << run.curve.dataset << ',' << run.curve.method << ',' << run.curve.seed << ','
          << queries << ',' << format_double(f1) << '\n';
    }
  }
  atomic_write(path, out.str());
}

void emit_queries_csv(const ResultsBundle& bundle, const std::string& path) {
  std::ostringstream out;
  out << "dataset,strategy,seed,step,query_index\n";
  for (const auto& run : bundle.runs) {
    for (std::size_t step = 0; step < run.queries.size(); ++step) {
      out << run.curve.dataset << ',' << run.curve.method << ',' << run.curve.seed << ','
          << step + 1 << ',' << run.queries[step] << '\n';
    }
  }
  atomic_write(path, out.str());
}

void emit_summary_csv(const std::vector<StrategySummary>& table, const std::string& path) {
  std::ostringstream out;
  out << "dataset,strategy,wins,ties,losses,mean_final_f1,std_final_f1\n";
  for (const auto& row : table) {
    out << row.dataset << ',' << row.strategy << ',' << row.wtl.wins << ',' << row.wtl.ties
        << ',' << row.wtl.losses << ',' << format_double(row.mean_final_f1) << ','
        << format_double(row.std_final_f1) << '\n';
  }
  atomic_write(path, out.str());
}

std::vector<LearningCurve> load_curves_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open curves file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw io_error("curves file '" + path + "' is empty");
  std::map<std::tuple<std::string, std::string, int>, LearningCurve> grouped;
  std::vector<std::tuple<std::string, std::string, int>> order;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string dataset, method, field;
    if (!std::getline(is, dataset, ',') || !std::getline(is, method, ',')) {
      throw parse_error("bad curves row", line_no);
    }
    int seed, queries;
    double f1;
    char comma;
    if (!(is >> seed >> comma >> queries >> comma >> f1)) {
      throw parse_error("bad curves row", line_no);
    }
    const auto key = std::make_tuple(dataset, method, seed);
    if (!grouped.count(key)) order.push_back(key);
    LearningCurve& curve = grouped[key];
    curve.dataset = dataset;
    curve.method = method;
    curve.seed = seed;
    curve.checkpoints.emplace_back(queries, f1);
  }
  std::vector<LearningCurve> curves;
  curves.reserve(order.size());
  for (const auto& key : order) curves.push_back(grouped.at(key));
  return curves;
}

void emit_timing_csv(const ResultsBundle& bundle, const std::string& path) {
  std::ostringstream out;
  out << "dataset,strategy,seed,run_seconds,mean_query_ms,max_query_ms\n";
  for (const auto& run : bundle.runs) {
    double mean = 0.0, peak = 0.0;
    for (double ms : run.query_ms) {
      mean += ms;
      peak = std::max(peak, ms);
    }
    if (!run.query_ms.empty()) mean /= static_cast<double>(run.query_ms.size());
    out << run.curve.dataset << ',' << run.curve.method << ',' << run.curve.seed << ','
        << format_double(run.seconds) << ',' << format_double(mean) << ','
        << format_double(peak) << '\n';
  }
  atomic_write(path, out.str());
}

void persist_bundle(const ResultsBundle& bundle, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  emit_curves_csv(bundle, out_dir + "/curves.csv");
  emit_queries_csv(bundle, out_dir + "/queries.csv");
  emit_timing_csv(bundle, out_dir + "/timing.csv");
  atomic_write(out_dir + "/config.json", bundle.config_json + "\n");
  std::filesystem::create_directories(out_dir + "/splits");
  for (const auto& [key, split] : bundle.splits) {
    save_split(split, key.first,
               out_dir + "/splits/" + key.first + "_seed" + std::to_string(key.second) + ".split");
  }
  if (!bundle.errors.empty()) {
    std::ostringstream out;
    for (const auto& [dataset, message] : bundle.errors) {
      out << dataset << ": " << message << '\n';
    }
    atomic_write(out_dir + "/errors.log", out.str());
  }
}

namespace {

using nlohmann::json;

}  // namespace

ExperimentConfig config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& ex) {
    throw config_error(std::string("config is not valid JSON: ") + ex.what());
  }
  ExperimentConfig config;
  if (j.contains("datasets")) {
    config.datasets.clear();
    for (const auto& d : j.at("datasets")) {
      DatasetSpec spec;
      spec.name = d.value("name", "");
      spec.arff_path = d.value("arff", "");
      spec.xml_path = d.value("xml", "");
      spec.csv_path = d.value("csv", "");
      spec.csv_labels = d.value("labels", 0);
      config.datasets.push_back(std::move(spec));
    }
  }
  if (j.contains("strategies")) config.strategies = j.at("strategies").get<std::vector<std::string>>();
  if (j.contains("seeds")) config.seeds = j.at("seeds").get<std::vector<int>>();
  config.budget = j.value("budget", config.budget);
  config.checkpoint_every = j.value("checkpoint_every", config.checkpoint_every);
  config.test_fraction = j.value("test_fraction", config.test_fraction);
  config.init_labeled_fraction = j.value("init_labeled_fraction", config.init_labeled_fraction);
  config.gamma_x_override = j.value("gamma_x", config.gamma_x_override);
  config.gamma_y_override = j.value("gamma_y", config.gamma_y_override);
  config.gamma_scale = j.value("gamma_scale", config.gamma_scale);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    config.solver.lambda = s.value("lambda", config.solver.lambda);
    config.solver.beta1 = s.value("beta1", config.solver.beta1);
    config.solver.beta2 = s.value("beta2", config.solver.beta2);
    config.solver.rho = s.value("rho", config.solver.rho);
    config.solver.max_outer = s.value("max_outer", config.solver.max_outer);
    config.solver.max_inner = s.value("max_inner", config.solver.max_inner);
    config.solver.tol_primal = s.value("tol_primal", config.solver.tol_primal);
    config.solver.tol_obj = s.value("tol_obj", config.solver.tol_obj);
  }
  config.out_dir = j.value("out_dir", config.out_dir);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str());
}

std::string config_to_json(const ExperimentConfig& config) {
  json j;
  j["datasets"] = json::array();
  for (const auto& d : config.datasets) {
    json spec;
    spec["name"] = d.name;
    if (!d.arff_path.empty()) {
      spec["arff"] = d.arff_path;
      spec["xml"] = d.xml_path;
    }
    if (!d.csv_path.empty()) {
      spec["csv"] = d.csv_path;
      spec["labels"] = d.csv_labels;
    }
    j["datasets"].push_back(spec);
  }
  j["strategies"] = config.strategies;
  j["seeds"] = config.seeds;
  j["budget"] = config.budget;
  j["checkpoint_every"] = config.checkpoint_every;
  j["test_fraction"] = config.test_fraction;
  j["init_labeled_fraction"] = config.init_labeled_fraction;
  j["gamma_x"] = config.gamma_x_override;
  j["gamma_y"] = config.gamma_y_override;
  j["gamma_scale"] = config.gamma_scale;
  j["solver"] = {{"lambda", config.solver.lambda},
                 {"beta1", config.solver.beta1},
                 {"beta2", config.solver.beta2},
                 {"rho", config.solver.rho},
                 {"max_outer", config.solver.max_outer},
                 {"max_inner", config.solver.max_inner},
                 {"tol_primal", config.solver.tol_primal},
                 {"tol_obj", config.solver.tol_obj}};
  j["out_dir"] = config.out_dir;
  return j.dump(2);
}

}  // namespace rmlal
