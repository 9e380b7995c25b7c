#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "suggestive/simulation.hpp"
#include "suggestive/synthetic.hpp"

namespace suggestive {

// Settings for `simulate`. JSON keys (all optional except "seeds"):
//
//   "dataset":       {"synthetic": {clusters, images, height, width, dims}}
//                    or {"path": DIR}   (DIR/features/*, DIR/labels/*)
//   "strategies":    ["random", "uncertainty", "suggestive"]
//   "k", "K":        8, 16
//   "budgets":       [0.1, 0.3, 0.5]
//   "seeds":         [..]  required, nonempty
//   "ensemble_size": 4
//   "noise":         learner descriptor noise, default 0.1
//   "output":        directory for the per-(strategy, seed) CSV files
//
// A run with seed s uses s for the synthetic dataset, the learner and the
// random strategy alike.
struct ExperimentConfig {
  std::optional<std::filesystem::path> dataset_path;
  SyntheticBenchmarkSpec synthetic;
  std::vector<StrategyKind> strategies{StrategyKind::kRandom, StrategyKind::kUncertainty,
                                       StrategyKind::kSuggestive};
  SuggestionConfig suggestion;
  std::vector<double> budgets{0.1, 0.3, 0.5};
  std::vector<std::uint64_t> seeds;
  Index ensemble_size = kDefaultEnsembleSize;
  double noise = kDefaultLearnerNoise;
  std::filesystem::path output = "simulation_out";

  void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Images from DIR/features (FeatureMap tensors, reduced by channel_mean) and
// DIR/labels (LabelMap tensors), paired by file name.
Dataset load_dataset_directory(const std::filesystem::path& dir);

// Output file name for one run, e.g. "suggestive_seed7.csv".
std::string run_file_name(StrategyKind kind, std::uint64_t seed);

}  // namespace suggestive
