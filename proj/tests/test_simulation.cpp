#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "support.hpp"
#include "suggestive/simulation.hpp"
#include "suggestive/synthetic.hpp"

using namespace suggestive;

namespace {

ImageRecord image(std::string name, Index h, Index w, double feature) {
  LabelMap gt = LabelMap::Zero(h, w);
  gt(0, 0) = 1;
  return ImageRecord{std::move(name), gt, Eigen::VectorXd::Constant(2, feature)};
}

Dataset small_dataset() {
  return Dataset({image("a", 2, 5, 1), image("b", 3, 10, 2), image("c", 4, 5, 3),
                  image("d", 5, 8, 4)});
}

class FailingLearner : public Learner {
 public:
  LearnerOutput train(const Dataset&, std::span<const Index> revealed) const override {
    if (!revealed.empty()) throw std::runtime_error("out of memory");
    throw ValidationError("untrained");
  }
};

SyntheticBenchmark bench(std::uint64_t seed, Index clusters = 8, Index images = 64) {
  SyntheticBenchmarkSpec spec;
  spec.seed = seed;
  spec.clusters = clusters;
  spec.images = images;
  return make_synthetic_benchmark(spec);
}

}  // namespace

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(Dataset({}), ValidationError);
  CHECK_THROWS_AS(Dataset({image("a", 2, 2, 1), image("a", 2, 2, 1)}), ValidationError);
  CHECK_THROWS_AS(Dataset({ImageRecord{"z", LabelMap(0, 3), Eigen::VectorXd::Ones(2)}}),
                  ValidationError);
  CHECK(small_dataset().total_pixels() == 10 + 30 + 20 + 40);
}

TEST_CASE("budget ledger accounting") {
  const auto ds = small_dataset();
  BudgetLedger ledger(ds);
  CHECK(ledger.total_pixels() == 100);
  CHECK(ledger.threshold(0.1) == 10);
  CHECK(ledger.threshold(0.3) == 30);
  CHECK(ledger.threshold(0.301) == 31);
  CHECK(ledger.threshold(1.0) == 100);
  CHECK_FALSE(ledger.reached(0.1));
  ledger.reveal(2);
  CHECK(ledger.revealed_pixels() == 20);
  CHECK(ledger.reached(0.2));
  CHECK_FALSE(ledger.reached(0.21));
  ledger.reveal(0);
  CHECK(ledger.revealed_ids() == std::vector<Index>{2, 0});
  CHECK(ledger.unrevealed_ids() == std::vector<Index>{1, 3});
  CHECK(ledger.is_revealed(0));
  CHECK_FALSE(ledger.is_revealed(3));
  CHECK_THROWS_AS(ledger.reveal(2), ValidationError);
  CHECK_THROWS_AS(ledger.reveal(9), ValidationError);
  CHECK(ledger.revealed_pixels() == 30);
}

TEST_CASE("strategy names") {
  for (const auto kind : {StrategyKind::kRandom, StrategyKind::kUncertainty,
                          StrategyKind::kSuggestive}) {
    CHECK(parse_strategy_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_strategy_kind("greedy"), ValidationError);
  const auto u = Strategy::make(StrategyKind::kUncertainty, SuggestionConfig{8, 16}, 3);
  CHECK(u.config.K == 8);
  const auto s = Strategy::make(StrategyKind::kSuggestive, SuggestionConfig{8, 16}, 3);
  CHECK(s.config.K == 16);
}

TEST_CASE("synthetic benchmark shape") {
  const auto b = bench(4);
  CHECK(b.dataset.size() == 64);
  std::vector<int> per_cluster(8, 0);
  for (const Index g : b.cluster_of) ++per_cluster[static_cast<std::size_t>(g)];
  for (const int c : per_cluster) CHECK(c == 8);
  for (Index i = 0; i < 64; ++i) {
    const auto& im = b.dataset.images()[static_cast<std::size_t>(i)];
    CHECK(im.height() == 32);
    CHECK(im.width() == 32);
    CHECK(im.features.size() == 16);
    CHECK(im.features.minCoeff() >= 0);
    for (Index j = 0; j < 64; ++j) {
      const auto& other = b.dataset.images()[static_cast<std::size_t>(j)];
      const bool same = b.cluster_of[static_cast<std::size_t>(i)] ==
                        b.cluster_of[static_cast<std::size_t>(j)];
      CHECK(same == (im.features == other.features));
      if (same) CHECK((im.ground_truth == other.ground_truth).all());
    }
  }
  SyntheticBenchmarkSpec bad;
  bad.clusters = 10;
  bad.images = 5;
  CHECK_THROWS_AS(make_synthetic_benchmark(bad), ValidationError);
}

TEST_CASE("noise-free learner with every cluster revealed is perfect and certain") {
  const auto b = bench(2);
  std::vector<Index> revealed;
  for (Index g = 0; g < 8; ++g) {
    const auto it = std::find(b.cluster_of.begin(), b.cluster_of.end(), g);
    revealed.push_back(static_cast<Index>(it - b.cluster_of.begin()));
  }
  const NearestNeighborLearner learner(2, 0.0);
  const auto out = learner.train(b.dataset, revealed);
  const auto metrics = evaluate(b.dataset, out);
  CHECK(metrics.mean_iu == 1.0);
  CHECK(metrics.pixel_f1 == 1.0);
  CHECK(uncertainty_scores(out).isZero(0));
}

TEST_CASE("images of an unrevealed cluster carry the largest uncertainty") {
  const auto b = bench(1, 3, 12);
  std::vector<Index> revealed;
  for (Index i = 0; i < 12; ++i) {
    if (b.cluster_of[static_cast<std::size_t>(i)] != 2) revealed.push_back(i);
  }
  const NearestNeighborLearner learner(1, kDefaultLearnerNoise);
  const auto scores = uncertainty_scores(learner.train(b.dataset, revealed));
  double revealed_max = 0;
  double hidden_min = 1;
  for (Index i = 0; i < 12; ++i) {
    if (b.cluster_of[static_cast<std::size_t>(i)] == 2) {
      hidden_min = std::min(hidden_min, scores(i));
    } else {
      revealed_max = std::max(revealed_max, scores(i));
    }
  }
  CHECK(hidden_min > revealed_max);
}

TEST_CASE("learner with nothing revealed") {
  const auto b = bench(0);
  const auto out = synthetic_learner(0, 0.1)->train(b.dataset, {});
  CHECK(uncertainty_scores(out).isZero(0));
  for (const auto& p : out.predictions) CHECK((p == 0).all());
  CHECK_THROWS_AS(NearestNeighborLearner(0, 0.5), ValidationError);
  CHECK_THROWS_AS(NearestNeighborLearner(0, 0.1, 1), ValidationError);
}

TEST_CASE("learner output is deterministic") {
  const auto b = bench(6);
  const NearestNeighborLearner learner(6, 0.1);
  const std::vector<Index> revealed{3, 9, 27};
  const auto x = learner.train(b.dataset, revealed);
  const auto y = learner.train(b.dataset, revealed);
  CHECK(uncertainty_scores(x) == uncertainty_scores(y));
  for (std::size_t i = 0; i < x.descriptors.size(); ++i) {
    CHECK(x.descriptors[i] == y.descriptors[i]);
    CHECK((x.predictions[i] == y.predictions[i]).all());
  }
}

TEST_CASE("full budget equals training on everything") {
  const auto b = bench(8);
  const NearestNeighborLearner learner(8, 0.1);
  std::vector<Index> all(64);
  std::iota(all.begin(), all.end(), Index{0});
  const auto reference = evaluate(b.dataset, learner.train(b.dataset, all));
  const std::vector<double> budgets{1.0};
  for (const auto kind : {StrategyKind::kRandom, StrategyKind::kUncertainty,
                          StrategyKind::kSuggestive}) {
    const auto curve =
        run_experiment(b.dataset, Strategy::make(kind, SuggestionConfig{8, 16}, 8), budgets, learner);
    REQUIRE(curve.points.size() == 1);
    CHECK(curve.points[0].mean_iu == reference.mean_iu);
    CHECK(curve.points[0].pixel_f1 == reference.pixel_f1);
  }
}

TEST_CASE("experiments are deterministic per seed") {
  const auto b = bench(12);
  const NearestNeighborLearner learner(12, 0.1);
  const std::vector<double> budgets{0.1, 0.3, 0.5};
  for (const auto kind : {StrategyKind::kRandom, StrategyKind::kUncertainty,
                          StrategyKind::kSuggestive}) {
    const auto strat = Strategy::make(kind, SuggestionConfig{8, 16}, 12);
    const auto first = run_experiment(b.dataset, strat, budgets, learner);
    const auto second = run_experiment(b.dataset, strat, budgets, learner);
    CHECK(first == second);
    REQUIRE(first.points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(first.points[i].budget_fraction == budgets[i]);
      CHECK(first.points[i].mean_iu >= 0.0);
      CHECK(first.points[i].mean_iu <= 1.0);
      CHECK(first.points[i].pixel_f1 >= 0.0);
      CHECK(first.points[i].pixel_f1 <= 1.0);
    }
  }
  const auto a = run_experiment(b.dataset, Strategy::make(StrategyKind::kRandom, {}, 1), budgets,
                                learner);
  const auto c = run_experiment(b.dataset, Strategy::make(StrategyKind::kRandom, {}, 2), budgets,
                                learner);
  CHECK(a != c);
}

TEST_CASE("trace conserves pixels and keeps suggestions inside the unannotated set") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto b = bench(seed);
    const NearestNeighborLearner learner(seed, 0.1);
    const std::vector<double> budgets{0.1, 0.3, 0.5};
    for (const auto kind : {StrategyKind::kRandom, StrategyKind::kUncertainty,
                            StrategyKind::kSuggestive}) {
      ExperimentTrace trace;
      run_experiment(b.dataset, Strategy::make(kind, SuggestionConfig{8, 16}, seed), budgets,
                     learner, &trace);
      std::set<Index> revealed;
      std::int64_t pixels = 0;
      for (const auto& stage : trace.stages) {
        const std::set<Index> pool(stage.unannotated.begin(), stage.unannotated.end());
        CHECK(stage.suggested.size() <= 8);
        CHECK(std::set<Index>(stage.suggested.begin(), stage.suggested.end()).size() ==
              stage.suggested.size());
        for (const Index id : stage.suggested) CHECK(pool.count(id) == 1);
        for (const Index id : revealed) CHECK(pool.count(id) == 0);
        REQUIRE(stage.revealed.size() <= stage.suggested.size());
        CHECK(std::equal(stage.revealed.begin(), stage.revealed.end(), stage.suggested.begin()));
        for (const Index id : stage.revealed) {
          CHECK(revealed.insert(id).second);
          pixels += b.dataset.images()[static_cast<std::size_t>(id)].pixel_count();
        }
      }
      CHECK(pixels == trace.revealed_pixels);
      CHECK(revealed.size() == trace.revealed_ids.size());
      CHECK(trace.revealed_pixels >= (b.dataset.total_pixels() + 1) / 2);
    }
  }
}

TEST_CASE("suggestive strategy picks come from the greedy pipeline") {
  const auto b = bench(3);
  const NearestNeighborLearner learner(3, 0.1);
  const std::vector<Index> revealed{0, 1, 2};
  const auto out = learner.train(b.dataset, revealed);
  BudgetLedger ledger(b.dataset);
  for (const Index id : revealed) ledger.reveal(id);
  const auto unannotated = ledger.unrevealed_ids();
  SplitMix64 rng(0);

  Pool<double> pool;
  pool.unannotated = unannotated;
  pool.uncertainty = uncertainty_scores(out);
  pool.sim = similarity_matrix<double>(out.descriptors);
  const auto expected = greedy_select(pool, SuggestionConfig{8, 16}).selected;
  CHECK(select_next(Strategy::make(StrategyKind::kSuggestive, {8, 16}, 0), out, unannotated, rng) ==
        expected);
  CHECK(select_next(Strategy::make(StrategyKind::kUncertainty, {8, 16}, 0), out, unannotated,
                    rng) == top_k_uncertain(pool, 8));
}

TEST_CASE("experiment errors") {
  const auto ds = small_dataset();
  const auto strat = Strategy::make(StrategyKind::kRandom, SuggestionConfig{1, 1}, 0);
  const FailingLearner failing;
  CHECK_THROWS_WITH_AS(run_experiment(ds, strat, std::vector<double>{0.5}, failing),
                       doctest::Contains("stage 0"), ExperimentError);
  const NearestNeighborLearner learner(0, 0.1);
  CHECK_THROWS_AS(run_experiment(ds, strat, std::vector<double>{}, learner), ValidationError);
  CHECK_THROWS_AS(run_experiment(ds, strat, std::vector<double>{0.0}, learner), ValidationError);
  CHECK_THROWS_AS(run_experiment(ds, strat, std::vector<double>{1.2}, learner), ValidationError);
  CHECK_THROWS_AS(run_experiment(ds, strat, std::vector<double>{0.5, 0.3}, learner),
                  ValidationError);
  Strategy bad{StrategyKind::kUncertainty, SuggestionConfig{1, 2}, 0};
  CHECK_THROWS_AS(run_experiment(ds, bad, std::vector<double>{0.5}, learner), ValidationError);
}

TEST_CASE("metric curve csv") {
  MetricCurve curve{{{0.1, 0.5, 0.25}, {0.3, 1.0 / 3, 0.75}}};
  CHECK(metric_curve_csv(curve) ==
        "budget_fraction,mean_iu,pixel_f1\n"
        "0.100000,0.500000,0.250000\n"
        "0.300000,0.333333,0.750000\n");
}

TEST_CASE("sign test helper") {
  CHECK(testing::sign_test_p(5, 0) == doctest::Approx(1.0 / 32));
  CHECK(testing::sign_test_p(0, 3) == doctest::Approx(1.0));
  CHECK(testing::sign_test_p(18, 2) == doctest::Approx(211.0 / 1048576));
}
