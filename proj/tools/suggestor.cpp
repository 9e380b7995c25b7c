// suggestor: command-line front end for the annotation suggestion engine.
//
//   suggestor suggest   --features DIR --probs DIR --k INT --K INT --out FILE
//   suggestor oracle    --features DIR --probs DIR --k INT --K INT [--cap N]
//   suggestor eval      --pred DIR --gt DIR [--out FILE]
//   suggestor simulate  --config FILE
//   suggestor bootstrap --models INT --train INT --seed INT --out FILE
//
// Exit status: 0 success, 1 validation error, 2 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "suggestive/config.hpp"
#include "suggestive/descriptor.hpp"
#include "suggestive/metrics.hpp"
#include "suggestive/simulation.hpp"
#include "suggestive/suggestion.hpp"
#include "suggestive/synthetic.hpp"
#include "suggestive/tensor_io.hpp"
#include "suggestive/uncertainty.hpp"

namespace fs = std::filesystem;
using namespace suggestive;

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

struct LoadedPool {
  std::vector<std::string> names;
  Pool<double> pool;
};

// Feature and probability files are paired by name; position in the sorted
// listing is the image id.
LoadedPool load_pool(const fs::path& features_dir, const fs::path& probs_dir) {
  const auto features = list_tensor_files(features_dir);
  const auto probs = list_tensor_files(probs_dir);
  if (features.empty()) throw ValidationError("no feature files in " + features_dir.string());
  if (features.size() != probs.size()) {
    throw ValidationError(std::to_string(features.size()) + " feature files but " +
                          std::to_string(probs.size()) + " probability files");
  }
  LoadedPool out;
  const auto n = static_cast<Index>(features.size());
  std::vector<Descriptor<double>> descriptors(features.size());
  out.pool.uncertainty.resize(n);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto name = features[i].filename().string();
    if (probs[i].filename().string() != name) {
      throw ValidationError("feature file '" + name + "' has no matching probability file");
    }
    out.names.push_back(name);
    descriptors[i] = channel_mean(read_feature_map(features[i]));
    const auto stack = to_probability_stack(read_tensor(probs[i]));
    out.pool.uncertainty(static_cast<Index>(i)) = image_uncertainty(pixel_uncertainty(stack));
    out.pool.unannotated.push_back(static_cast<Index>(i));
  }
  out.pool.sim = similarity_matrix<double>(descriptors);
  return out;
}

SuggestionConfig make_config(Index k, Index K) {
  SuggestionConfig cfg{k, K, TieBreak::kLowestId};
  cfg.validate();
  return cfg;
}

std::string ids_text(const std::vector<Index>& ids, const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ' ';
    s += names[static_cast<std::size_t>(ids[i])];
  }
  return s;
}

void run_suggest(const fs::path& features, const fs::path& probs, Index k, Index K,
                 const fs::path& out_path) {
  const auto loaded = load_pool(features, probs);
  const auto result = greedy_select(loaded.pool, make_config(k, K));
  std::ostringstream csv;
  csv << "rank,id,name,uncertainty,marginal_gain,objective\n";
  CompensatedSum<double> running;
  for (std::size_t r = 0; r < result.selected.size(); ++r) {
    const Index id = result.selected[r];
    running += result.marginal_gains[r];
    csv << r + 1 << ',' << id << ',' << loaded.names[static_cast<std::size_t>(id)] << ','
        << fmt("%.9f", loaded.pool.uncertainty(id)) << ','
        << fmt("%.9f", result.marginal_gains[r]) << ',' << fmt("%.9f", running.value()) << '\n';
  }
  write_file_atomic(out_path, csv.str());
}

void run_oracle(const fs::path& features, const fs::path& probs, Index k, Index K,
                std::uint64_t cap) {
  const auto loaded = load_pool(features, probs);
  const auto cfg = make_config(k, K);
  const auto opt = brute_force_select(loaded.pool, cfg, cap);
  const auto greedy = greedy_select(loaded.pool, cfg);
  const auto candidates = std::min<std::size_t>(static_cast<std::size_t>(K),
                                                loaded.pool.unannotated.size());
  std::cout << "candidates=" << candidates << '\n'
            << "k=" << opt.selected.size() << '\n'
            << "subsets=" << binomial(candidates, opt.selected.size()) << '\n'
            << "optimal_objective=" << fmt("%.9f", opt.objective) << '\n'
            << "greedy_objective=" << fmt("%.9f", greedy.objective) << '\n'
            << "ratio=" << fmt("%.9f", opt.objective > 0 ? greedy.objective / opt.objective : 1.0)
            << '\n'
            << "optimal_ids=" << ids_text(opt.selected, loaded.names) << '\n'
            << "greedy_ids=" << ids_text(greedy.selected, loaded.names) << '\n';
}

void run_eval(const fs::path& pred_dir, const fs::path& gt_dir, const std::string& out_path) {
  const auto preds = list_tensor_files(pred_dir);
  const auto gts = list_tensor_files(gt_dir);
  if (preds.empty()) throw ValidationError("no prediction files in " + pred_dir.string());
  if (preds.size() != gts.size()) {
    throw ValidationError(std::to_string(preds.size()) + " prediction files but " +
                          std::to_string(gts.size()) + " ground-truth files");
  }
  std::ostringstream csv;
  csv << "name,mean_iu,pixel_f1\n";
  CompensatedSum<double> iu;
  CompensatedSum<double> f1;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto name = preds[i].filename().string();
    if (gts[i].filename().string() != name) {
      throw ValidationError("prediction '" + name + "' has no matching ground truth");
    }
    const auto pred = to_label_map(read_tensor(preds[i]));
    const auto gt = to_label_map(read_tensor(gts[i]));
    const double m = mean_iu(pred, gt);
    const double f = pixel_f1(pred, gt);
    iu += m;
    f1 += f;
    csv << name << ',' << fmt("%.6f", m) << ',' << fmt("%.6f", f) << '\n';
  }
  const auto n = static_cast<double>(preds.size());
  csv << "aggregate," << fmt("%.6f", iu.value() / n) << ',' << fmt("%.6f", f1.value() / n)
      << '\n';
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    write_file_atomic(out_path, csv.str());
  }
}

void run_simulate(const fs::path& config_path) {
  const auto cfg = load_experiment_config(config_path);
  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output.string());

  std::optional<Dataset> fixed;
  if (cfg.dataset_path) fixed = load_dataset_directory(*cfg.dataset_path);

  std::ostringstream summary;
  summary << "strategy,seed,budget_fraction,mean_iu,pixel_f1\n";
  for (const auto seed : cfg.seeds) {
    std::optional<Dataset> generated;
    if (!fixed) {
      auto spec = cfg.synthetic;
      spec.seed = seed;
      generated = make_synthetic_benchmark(spec).dataset;
    }
    const Dataset& ds = fixed ? *fixed : *generated;
    const NearestNeighborLearner learner(seed, cfg.noise, cfg.ensemble_size);
    for (const auto kind : cfg.strategies) {
      const auto strat = Strategy::make(kind, cfg.suggestion, seed);
      const auto curve = run_experiment(ds, strat, cfg.budgets, learner);
      const auto path = cfg.output / run_file_name(kind, seed);
      write_file_atomic(path, metric_curve_csv(curve));
      for (const auto& p : curve.points) {
        summary << to_string(kind) << ',' << seed << ',' << fmt("%.6f", p.budget_fraction) << ','
                << fmt("%.6f", p.mean_iu) << ',' << fmt("%.6f", p.pixel_f1) << '\n';
      }
      std::cout << path.string() << '\n';
    }
  }
  write_file_atomic(cfg.output / "summary.csv", summary.str());
}

void run_bootstrap(std::uint32_t models, std::uint32_t train, std::uint64_t seed,
                   const fs::path& out_path) {
  std::ostringstream text;
  write_bootstrap_plan(text, bootstrap_plan(models, train, seed));
  write_file_atomic(out_path, text.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Annotation suggestion engine"};
  app.require_subcommand(1);

  std::string features;
  std::string probs;
  std::string out;
  Index k = 8;
  Index K = 16;

  auto* suggest = app.add_subcommand("suggest", "Suggest the next images to annotate");
  suggest->add_option("--features", features, "Directory of feature-map tensors")->required();
  suggest->add_option("--probs", probs, "Directory of [N,H,W] probability stacks")->required();
  suggest->add_option("--k", k, "Images to suggest")->required();
  suggest->add_option("--K", K, "Uncertainty candidate pool size")->required();
  suggest->add_option("--out", out, "Output CSV")->required();

  std::uint64_t cap = kDefaultEnumerationCap;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive optimum and greedy/optimal ratio");
  oracle->add_option("--features", features)->required();
  oracle->add_option("--probs", probs)->required();
  oracle->add_option("--k", k)->required();
  oracle->add_option("--K", K)->required();
  oracle->add_option("--cap", cap, "Maximum number of subsets to enumerate");

  std::string pred;
  std::string gt;
  auto* eval = app.add_subcommand("eval", "Mean IU and pixel F1 per image and overall");
  eval->add_option("--pred", pred, "Directory of predicted label tensors")->required();
  eval->add_option("--gt", gt, "Directory of ground-truth label tensors")->required();
  eval->add_option("--out", out, "Write CSV here instead of standard output");

  std::string config;
  auto* simulate = app.add_subcommand("simulate", "Run the budgeted annotation simulation");
  simulate->add_option("--config", config, "Experiment JSON")->required();

  std::uint32_t models = kDefaultEnsembleSize;
  std::uint32_t train = 0;
  std::uint64_t seed = 0;
  auto* bootstrap = app.add_subcommand("bootstrap", "Write a bootstrap resampling plan");
  bootstrap->add_option("--models", models, "Ensemble size");
  bootstrap->add_option("--train", train, "Training set size")->required();
  bootstrap->add_option("--seed", seed, "Random seed")->required();
  bootstrap->add_option("--out", out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*suggest) run_suggest(features, probs, k, K, out);
    if (*oracle) run_oracle(features, probs, k, K, cap);
    if (*eval) run_eval(pred, gt, out);
    if (*simulate) run_simulate(config);
    if (*bootstrap) run_bootstrap(models, train, seed, out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
