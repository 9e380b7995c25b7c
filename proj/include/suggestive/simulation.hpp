#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "suggestive/metrics.hpp"
#include "suggestive/rng.hpp"
#include "suggestive/suggestion.hpp"
#include "suggestive/uncertainty.hpp"

namespace suggestive {

// One training image. `features` is whatever latent representation the
// learner consumes; the built-in learners treat it as a nonnegative
// descriptor.
struct ImageRecord {
  std::string name;
  LabelMap ground_truth;
  Eigen::VectorXd features;

  Index height() const { return ground_truth.rows(); }
  Index width() const { return ground_truth.cols(); }
  std::int64_t pixel_count() const { return ground_truth.size(); }
};

// Image id == position in images().
class Dataset {
 public:
  explicit Dataset(std::vector<ImageRecord> images);

  const std::vector<ImageRecord>& images() const { return images_; }
  Index size() const { return static_cast<Index>(images_.size()); }
  std::int64_t total_pixels() const { return total_pixels_; }

 private:
  std::vector<ImageRecord> images_;
  std::int64_t total_pixels_ = 0;
};

// Revealed-pixel accounting. Images are revealed whole and at most once.
class BudgetLedger {
 public:
  explicit BudgetLedger(const Dataset& ds);

  void reveal(Index id);
  bool is_revealed(Index id) const { return revealed_flags_.at(static_cast<std::size_t>(id)); }
  std::int64_t revealed_pixels() const { return revealed_pixels_; }
  std::int64_t total_pixels() const { return total_pixels_; }
  const std::vector<Index>& revealed_ids() const { return revealed_ids_; }
  std::vector<Index> unrevealed_ids() const;

  // Pixel count at which a budget fraction counts as reached:
  // ceil(fraction * total_pixels).
  std::int64_t threshold(double fraction) const;
  bool reached(double fraction) const { return revealed_pixels_ >= threshold(fraction); }

 private:
  std::vector<std::int64_t> pixel_counts_;
  std::vector<bool> revealed_flags_;
  std::vector<Index> revealed_ids_;
  std::int64_t revealed_pixels_ = 0;
  std::int64_t total_pixels_ = 0;
};

enum class StrategyKind { kRandom, kUncertainty, kSuggestive };

std::string to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(const std::string& name);

struct Strategy {
  StrategyKind kind = StrategyKind::kSuggestive;
  SuggestionConfig config;
  std::uint64_t seed = 0;

  // The uncertainty kind is the suggestion pipeline with K == k; make()
  // enforces that by overwriting K.
  static Strategy make(StrategyKind kind, SuggestionConfig config, std::uint64_t seed);
};

// What a learner reports after training on a revealed subset. Every vector
// is indexed by image id.
struct LearnerOutput {
  std::vector<Eigen::VectorXd> descriptors;
  std::vector<std::vector<ProbabilityMap<double>>> ensembles;
  std::vector<LabelMap> predictions;
};

// Retrains from scratch on the revealed set each call. Implementations must
// be deterministic in (dataset, revealed set) for a fixed construction seed.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual LearnerOutput train(const Dataset& ds, std::span<const Index> revealed) const = 0;
};

struct CurvePoint {
  double budget_fraction = 0;
  double mean_iu = 0;
  double pixel_f1 = 0;

  bool operator==(const CurvePoint&) const = default;
};

struct MetricCurve {
  std::vector<CurvePoint> points;

  bool operator==(const MetricCurve&) const = default;
};

struct StageRecord {
  std::vector<Index> unannotated;  // S_u when the stage started
  std::vector<Index> suggested;    // strategy output, in reveal order
  std::vector<Index> revealed;     // prefix of `suggested` actually revealed
};

struct ExperimentTrace {
  std::vector<StageRecord> stages;
  std::vector<Index> revealed_ids;
  std::int64_t revealed_pixels = 0;
};

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-image uncertainty scores: mean ensemble variance of each image.
Eigen::VectorXd uncertainty_scores(const LearnerOutput& out);

// Mean of per-image mean_iu and pixel_f1 over every image in the dataset.
CurvePoint evaluate(const Dataset& ds, const LearnerOutput& out);

// Ids a strategy would request next from `unannotated`, in reveal order.
// `rng` carries the random strategy's stream across stages.
std::vector<Index> select_next(const Strategy& strat, const LearnerOutput& out,
                               const std::vector<Index>& unannotated, SplitMix64& rng);

// Staged annotation loop. Each stage retrains the learner on the revealed
// set, asks the strategy for up to k images, and reveals them one at a time
// in the strategy's order. When a reveal reaches the next budget checkpoint
// the stage stops; the learner is retrained and the checkpoint recorded.
MetricCurve run_experiment(const Dataset& ds, const Strategy& strat,
                           std::span<const double> budgets, const Learner& learner,
                           ExperimentTrace* trace = nullptr);

// `budget_fraction,mean_iu,pixel_f1` header, one row per point, %.6f.
void write_metric_curve_csv(std::ostream& os, const MetricCurve& curve);
std::string metric_curve_csv(const MetricCurve& curve);

}  // namespace suggestive
