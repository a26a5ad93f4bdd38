#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "rmlal/experiment.hpp"

namespace {

using rmlal::ExperimentConfig;

// Dataset specs on the command line:
//   path/emotions.arff                (label header = same stem + .xml)
//   name=emotions,arff=e.arff,xml=e.xml
//   name=toy,csv=toy.csv,labels=6
rmlal::DatasetSpec parse_dataset_spec(const std::string& text) {
  rmlal::DatasetSpec spec;
  if (text.find('=') == std::string::npos) {
    const std::filesystem::path path(text);
    if (path.extension() == ".arff") {
      spec.arff_path = text;
      spec.xml_path = (std::filesystem::path(path).replace_extension(".xml")).string();
      spec.name = path.stem().string();
      return spec;
    }
    throw rmlal::config_error("dataset '" + text +
                              "': bare paths must end in .arff; use key=value form for CSV");
  }
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw rmlal::config_error("bad dataset field '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "name") spec.name = value;
    else if (key == "arff") spec.arff_path = value;
    else if (key == "xml") spec.xml_path = value;
    else if (key == "csv") spec.csv_path = value;
    else if (key == "labels") spec.csv_labels = std::stoi(value);
    else throw rmlal::config_error("unknown dataset field '" + key + "'");
  }
  if (spec.arff_path.empty() && spec.csv_path.empty()) {
    throw rmlal::config_error("dataset spec '" + text + "' names no data file");
  }
  if (spec.name.empty()) {
    const std::string& path = spec.arff_path.empty() ? spec.csv_path : spec.arff_path;
    spec.name = std::filesystem::path(path).stem().string();
  }
  return spec;
}

void print_summary(const std::vector<rmlal::StrategySummary>& table, const std::string& baseline) {
  std::printf("%-16s %-28s %5s %5s %6s %12s %12s\n", "dataset", "strategy", "win", "tie",
              "loss", "final_f1", "std");
  for (const auto& row : table) {
    std::printf("%-16s %-28s %5d %5d %6d %12.4f %12.4f\n", row.dataset.c_str(),
                row.strategy.c_str(), row.wtl.wins, row.wtl.ties, row.wtl.losses,
                row.mean_final_f1, row.std_final_f1);
  }
  std::printf("(win/tie/loss vs '%s', paired t-test, two-sided 5%%)\n", baseline.c_str());
}

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> dataset_specs;
  std::vector<std::string> strategies;
  std::vector<int> seeds;
  int budget = -1;
  int checkpoint_every = -1;
  std::string out_dir;
  double beta1 = -1.0, beta2 = -1.0, lambda = -1.0, gamma_scale = -1.0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--dataset", flags.dataset_specs, "dataset spec (repeatable)");
  cmd->add_option("--seeds", flags.seeds, "run seeds")->delimiter(',');
  cmd->add_option("--budget", flags.budget, "query budget per run");
  cmd->add_option("--checkpoint-every", flags.checkpoint_every, "checkpoint spacing");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--beta1", flags.beta1, "representativeness tradeoff");
  cmd->add_option("--beta2", flags.beta2, "redundancy tradeoff");
  cmd->add_option("--lambda", flags.lambda, "ridge weight");
  cmd->add_option("--gamma-scale", flags.gamma_scale, "label-space kernel size multiplier");
}

// Precedence: flag > config file > built-in default.
ExperimentConfig resolve_config(const CommonFlags& flags) {
  ExperimentConfig config;
  if (!flags.config_path.empty()) config = rmlal::load_config(flags.config_path);
  for (const auto& spec : flags.dataset_specs) {
    config.datasets.push_back(parse_dataset_spec(spec));
  }
  if (!flags.strategies.empty()) config.strategies = flags.strategies;
  if (!flags.seeds.empty()) config.seeds = flags.seeds;
  if (flags.budget > 0) config.budget = flags.budget;
  if (flags.checkpoint_every > 0) config.checkpoint_every = flags.checkpoint_every;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.beta1 >= 0.0) config.solver.beta1 = flags.beta1;
  if (flags.beta2 >= 0.0) config.solver.beta2 = flags.beta2;
  if (flags.lambda >= 0.0) config.solver.lambda = flags.lambda;
  if (flags.gamma_scale > 0.0) config.gamma_scale = flags.gamma_scale;
  return config;
}

int do_run(const ExperimentConfig& config) {
  if (config.datasets.empty()) {
    std::cerr << "no datasets given (use --dataset or a config file)\n";
    return 2;
  }
  config.validate();
  const rmlal::ResultsBundle bundle = rmlal::run_experiment(config);
  rmlal::persist_bundle(bundle, config.out_dir);
  std::cout << "wrote " << bundle.runs.size() << " runs to " << config.out_dir << "\n";
  for (const auto& [dataset, message] : bundle.errors) {
    std::cerr << "skipped " << dataset << ": " << message << "\n";
  }
  return bundle.runs.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust multi-label active learning toolkit"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment");
  add_common_flags(run_cmd, run_flags);
  run_cmd->add_option("--strategy", run_flags.strategies,
                      "strategy: rmlal | mse_variant | minmargin | random (repeatable)");

  std::string curves_path = "results/curves.csv";
  std::string baseline = "random";
  std::string summary_out;
  double significance = 0.05;
  CLI::App* summarize_cmd = app.add_subcommand("summarize", "win/tie/loss tables from curves");
  summarize_cmd->add_option("--in", curves_path, "curves CSV produced by run");
  summarize_cmd->add_option("--baseline", baseline, "baseline strategy");
  summarize_cmd->add_option("--out", summary_out, "also write a summary CSV here");
  summarize_cmd->add_option("--significance", significance, "t-test significance level");

  CommonFlags sweep_flags;
  std::vector<double> gamma_scales{1.0, 2.0, 4.0};
  std::vector<std::string> beta_pairs;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "kernel-size and tradeoff studies");
  add_common_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--gamma-scales", gamma_scales, "label kernel-size multipliers")
      ->delimiter(',');
  sweep_cmd->add_option("--beta-pairs", beta_pairs, "beta1:beta2 pairs, e.g. 1:1,1:0.1")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return do_run(resolve_config(run_flags));
    }

    if (summarize_cmd->parsed()) {
      const auto curves = rmlal::load_curves_csv(curves_path);
      const auto table = rmlal::summarize_curves(curves, baseline, significance);
      print_summary(table, baseline);
      if (!summary_out.empty()) rmlal::emit_summary_csv(table, summary_out);
      return 0;
    }

    if (sweep_cmd->parsed()) {
      ExperimentConfig base = resolve_config(sweep_flags);
      if (base.datasets.empty()) {
        std::cerr << "no datasets given (use --dataset or a config file)\n";
        return 2;
      }
      if (beta_pairs.empty()) beta_pairs = {"1:1", "1:0.1", "0.1:1"};

      rmlal::ResultsBundle merged;
      auto run_variant = [&](ExperimentConfig variant, const std::string& label) {
        variant.strategies = {"rmlal"};
        variant.validate();
        rmlal::ResultsBundle bundle = rmlal::run_experiment(variant);
        for (auto& run : bundle.runs) run.curve.method = label;
        merged.runs.insert(merged.runs.end(), bundle.runs.begin(), bundle.runs.end());
        merged.splits.insert(bundle.splits.begin(), bundle.splits.end());
        merged.errors.insert(merged.errors.end(), bundle.errors.begin(), bundle.errors.end());
        std::cout << "finished " << label << "\n";
      };

      for (double scale : gamma_scales) {
        ExperimentConfig variant = base;
        variant.gamma_scale = scale;
        char label[64];
        std::snprintf(label, sizeof(label), "rmlal[gs=%g]", scale);
        run_variant(variant, label);
      }
      for (const auto& pair : beta_pairs) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) {
          throw rmlal::config_error("beta pair '" + pair + "' must look like 1:0.1");
        }
        ExperimentConfig variant = base;
        variant.solver.beta1 = std::stod(pair.substr(0, colon));
        variant.solver.beta2 = std::stod(pair.substr(colon + 1));
        run_variant(variant, "rmlal[b1=" + pair.substr(0, colon) + ";b2=" +
                                 pair.substr(colon + 1) + "]");
      }
      merged.config_json = rmlal::config_to_json(base);
      rmlal::persist_bundle(merged, base.out_dir);
      std::cout << "wrote " << merged.runs.size() << " runs to " << base.out_dir << "\n";
      return merged.runs.empty() ? 1 : 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
