#include "suggestive/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "suggestive/descriptor.hpp"
#include "suggestive/tensor_io.hpp"

namespace suggestive {

using nlohmann::json;

void ExperimentConfig::validate() const {
  suggestion.validate();
  if (budgets.empty()) throw ValidationError("config: budgets must not be empty");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 0.0 && budgets[i] <= 1.0)) {
      throw ValidationError("config: budget " + std::to_string(budgets[i]) +
                            " is outside (0, 1]");
    }
    if (i > 0 && !(budgets[i] > budgets[i - 1])) {
      throw ValidationError("config: budgets must be strictly increasing");
    }
  }
  if (seeds.empty()) throw ValidationError("config: at least one seed is required");
  if (strategies.empty()) throw ValidationError("config: no strategies given");
  if (ensemble_size < 2) throw ValidationError("config: ensemble_size must be at least 2");
  if (!(noise >= 0.0 && noise < 0.5)) throw ValidationError("config: noise must lie in [0, 0.5)");
  if (!dataset_path) synthetic.validate();
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  ExperimentConfig cfg;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ValidationError("config: top level must be an object");
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      if (d.contains("path")) {
        cfg.dataset_path = d.at("path").get<std::string>();
      } else if (d.contains("synthetic")) {
        const auto& s = d.at("synthetic");
        cfg.synthetic.clusters = s.value("clusters", cfg.synthetic.clusters);
        cfg.synthetic.images = s.value("images", cfg.synthetic.images);
        cfg.synthetic.height = s.value("height", cfg.synthetic.height);
        cfg.synthetic.width = s.value("width", cfg.synthetic.width);
        cfg.synthetic.dims = s.value("dims", cfg.synthetic.dims);
      } else {
        throw ValidationError("config: dataset needs \"path\" or \"synthetic\"");
      }
    }
    if (j.contains("strategies")) {
      cfg.strategies.clear();
      for (const auto& s : j.at("strategies")) {
        cfg.strategies.push_back(parse_strategy_kind(s.get<std::string>()));
      }
    }
    cfg.suggestion.k = j.value("k", cfg.suggestion.k);
    cfg.suggestion.K = j.value("K", cfg.suggestion.K);
    if (j.contains("budgets")) cfg.budgets = j.at("budgets").get<std::vector<double>>();
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.ensemble_size = j.value("ensemble_size", cfg.ensemble_size);
    cfg.noise = j.value("noise", cfg.noise);
    if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

Dataset load_dataset_directory(const std::filesystem::path& dir) {
  const auto features = list_tensor_files(dir / "features");
  const auto labels = list_tensor_files(dir / "labels");
  if (features.size() != labels.size()) {
    throw ValidationError("dataset: " + std::to_string(features.size()) + " feature files but " +
                          std::to_string(labels.size()) + " label files");
  }
  std::vector<ImageRecord> images;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto name = features[i].filename().string();
    if (labels[i].filename().string() != name) {
      throw ValidationError("dataset: feature file '" + name + "' has no matching label file");
    }
    images.push_back(ImageRecord{name, to_label_map(read_tensor(labels[i])),
                                 channel_mean(read_feature_map(features[i]))});
  }
  return Dataset(std::move(images));
}

std::string run_file_name(StrategyKind kind, std::uint64_t seed) {
  return to_string(kind) + "_seed" + std::to_string(seed) + ".csv";
}

}  // namespace suggestive
