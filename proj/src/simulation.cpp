#include "suggestive/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace suggestive {

Dataset::Dataset(std::vector<ImageRecord> images) : images_(std::move(images)) {
  if (images_.empty()) throw ValidationError("dataset has no images");
  std::unordered_set<std::string> names;
  for (const auto& im : images_) {
    if (im.pixel_count() < 1) throw ValidationError("image '" + im.name + "' has no pixels");
    if (!names.insert(im.name).second) {
      throw ValidationError("duplicate image id '" + im.name + "'");
    }
    total_pixels_ += im.pixel_count();
  }
}

BudgetLedger::BudgetLedger(const Dataset& ds)
    : revealed_flags_(static_cast<std::size_t>(ds.size()), false),
      total_pixels_(ds.total_pixels()) {
  for (const auto& im : ds.images()) pixel_counts_.push_back(im.pixel_count());
}

void BudgetLedger::reveal(Index id) {
  if (id < 0 || id >= static_cast<Index>(pixel_counts_.size())) {
    throw ValidationError("reveal of unknown image id " + std::to_string(id));
  }
  const auto slot = static_cast<std::size_t>(id);
  if (revealed_flags_[slot]) {
    throw ValidationError("image id " + std::to_string(id) + " revealed twice");
  }
  revealed_flags_[slot] = true;
  revealed_ids_.push_back(id);
  revealed_pixels_ += pixel_counts_[slot];
}

std::vector<Index> BudgetLedger::unrevealed_ids() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < revealed_flags_.size(); ++i) {
    if (!revealed_flags_[i]) out.push_back(static_cast<Index>(i));
  }
  return out;
}

std::int64_t BudgetLedger::threshold(double fraction) const {
  const double exact = fraction * static_cast<double>(total_pixels_);
  // 0.3 * 1000 evaluates to 300.00000000000006; snap products that are
  // integral up to rounding before taking the ceiling.
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::ceil(exact));
}

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kRandom:
      return "random";
    case StrategyKind::kUncertainty:
      return "uncertainty";
    case StrategyKind::kSuggestive:
      return "suggestive";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(const std::string& name) {
  if (name == "random") return StrategyKind::kRandom;
  if (name == "uncertainty") return StrategyKind::kUncertainty;
  if (name == "suggestive") return StrategyKind::kSuggestive;
  throw ValidationError("unknown strategy '" + name +
                        "' (expected random, uncertainty or suggestive)");
}

Strategy Strategy::make(StrategyKind kind, SuggestionConfig config, std::uint64_t seed) {
  if (kind == StrategyKind::kUncertainty) config.K = config.k;
  config.validate();
  return Strategy{kind, config, seed};
}

Eigen::VectorXd uncertainty_scores(const LearnerOutput& out) {
  Eigen::VectorXd scores(static_cast<Index>(out.ensembles.size()));
  for (std::size_t i = 0; i < out.ensembles.size(); ++i) {
    scores(static_cast<Index>(i)) = image_uncertainty(pixel_uncertainty(out.ensembles[i]));
  }
  return scores;
}

CurvePoint evaluate(const Dataset& ds, const LearnerOutput& out) {
  if (static_cast<Index>(out.predictions.size()) != ds.size()) {
    throw ValidationError("learner returned " + std::to_string(out.predictions.size()) +
                          " predictions for " + std::to_string(ds.size()) + " images");
  }
  CompensatedSum<double> iu;
  CompensatedSum<double> f1;
  for (Index i = 0; i < ds.size(); ++i) {
    const auto& gt = ds.images()[static_cast<std::size_t>(i)].ground_truth;
    const auto& pred = out.predictions[static_cast<std::size_t>(i)];
    iu += mean_iu(pred, gt);
    f1 += pixel_f1(pred, gt);
  }
  const auto n = static_cast<double>(ds.size());
  return CurvePoint{0.0, iu.value() / n, f1.value() / n};
}

std::vector<Index> select_next(const Strategy& strat, const LearnerOutput& out,
                               const std::vector<Index>& unannotated, SplitMix64& rng) {
  if (unannotated.empty()) return {};
  const auto k = static_cast<std::size_t>(strat.config.k);
  switch (strat.kind) {
    case StrategyKind::kRandom: {
      // Partial Fisher-Yates over the sorted unannotated ids.
      std::vector<Index> ids = unannotated;
      const std::size_t take = std::min(k, ids.size());
      for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_below(ids.size() - i));
        std::swap(ids[i], ids[j]);
      }
      ids.resize(take);
      return ids;
    }
    case StrategyKind::kUncertainty:
    case StrategyKind::kSuggestive: {
      Pool<double> pool{unannotated, uncertainty_scores(out),
                        similarity_matrix<double>(out.descriptors)};
      if (strat.kind == StrategyKind::kUncertainty) {
        return top_k_uncertain(pool, strat.config.k);
      }
      return greedy_select(pool, strat.config).selected;
    }
  }
  return {};
}

namespace {

LearnerOutput train_at_stage(const Learner& learner, const Dataset& ds,
                             const std::vector<Index>& revealed, std::size_t stage) {
  try {
    LearnerOutput out = learner.train(ds, revealed);
    const auto n = static_cast<std::size_t>(ds.size());
    if (out.descriptors.size() != n || out.ensembles.size() != n || out.predictions.size() != n) {
      throw ValidationError("learner output does not cover every image");
    }
    return out;
  } catch (const std::exception& e) {
    throw ExperimentError("learner failed at stage " + std::to_string(stage) + " with " +
                          std::to_string(revealed.size()) + " revealed images: " + e.what());
  }
}

}  // namespace

MetricCurve run_experiment(const Dataset& ds, const Strategy& strat,
                           std::span<const double> budgets, const Learner& learner,
                           ExperimentTrace* trace) {
  strat.config.validate();
  if (strat.kind == StrategyKind::kUncertainty && strat.config.K != strat.config.k) {
    throw ValidationError("uncertainty strategy requires K == k");
  }
  if (budgets.empty()) throw ValidationError("no budget checkpoints given");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 0.0 && budgets[i] <= 1.0)) {
      throw ValidationError("budget " + std::to_string(budgets[i]) + " is outside (0, 1]");
    }
    if (i > 0 && !(budgets[i] > budgets[i - 1])) {
      throw ValidationError("budgets must be strictly increasing");
    }
  }

  BudgetLedger ledger(ds);
  SplitMix64 rng(strat.seed);
  MetricCurve curve;
  std::size_t next = 0;
  std::size_t stage = 0;
  while (next < budgets.size()) {
    const LearnerOutput out = train_at_stage(learner, ds, ledger.revealed_ids(), stage);
    // Several checkpoints may be passed by one reveal.
    if (ledger.reached(budgets[next])) {
      CurvePoint p = evaluate(ds, out);
      while (next < budgets.size() && ledger.reached(budgets[next])) {
        p.budget_fraction = budgets[next++];
        curve.points.push_back(p);
      }
      continue;
    }

    StageRecord record;
    record.unannotated = ledger.unrevealed_ids();
    record.suggested = select_next(strat, out, record.unannotated, rng);
    if (record.suggested.empty()) {
      throw ExperimentError("stage " + std::to_string(stage) + ": strategy suggested nothing");
    }
    for (const Index id : record.suggested) {
      ledger.reveal(id);
      record.revealed.push_back(id);
      if (ledger.reached(budgets[next])) break;
    }
    if (trace) trace->stages.push_back(std::move(record));
    ++stage;
  }
  if (trace) {
    trace->revealed_ids = ledger.revealed_ids();
    trace->revealed_pixels = ledger.revealed_pixels();
  }
  return curve;
}

void write_metric_curve_csv(std::ostream& os, const MetricCurve& curve) {
  os << "budget_fraction,mean_iu,pixel_f1\n";
  char line[96];
  for (const auto& p : curve.points) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f\n", p.budget_fraction, p.mean_iu,
                  p.pixel_f1);
    os << line;
  }
}

std::string metric_curve_csv(const MetricCurve& curve) {
  std::ostringstream os;
  write_metric_curve_csv(os, curve);
  return os.str();
}

}  // namespace suggestive
