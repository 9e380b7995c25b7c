#pragma once

// Reference implementations used only by the tests. They are written
// directly from the definitions, without sharing code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "suggestive/metrics.hpp"
#include "suggestive/rng.hpp"
#include "suggestive/simulation.hpp"
#include "suggestive/suggestion.hpp"
#include "suggestive/synthetic.hpp"
#include "suggestive/tensor_io.hpp"
#include "suggestive/uncertainty.hpp"

namespace testing {

using suggestive::Index;

// Population variance per pixel: mean first, then mean squared deviation.
inline Eigen::MatrixXd two_pass_variance(const std::vector<Eigen::MatrixXd>& maps) {
  const auto n = static_cast<double>(maps.size());
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(maps[0].rows(), maps[0].cols());
  for (const auto& m : maps) mean += m;
  mean /= n;
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
  for (const auto& m : maps) var.array() += (m - mean).array().square();
  return var / n;
}

// F(A, U) straight from the definition, with long double accumulation.
inline double objective(const std::vector<Index>& chosen, const std::vector<Index>& members,
                        const Eigen::MatrixXd& sim) {
  long double total = 0;
  for (const Index x : members) {
    double best = 0;
    for (const Index i : chosen) best = std::max(best, sim(i, x));
    total += best;
  }
  return static_cast<double>(total);
}

// Classic greedy max k-cover over explicit sets: repeatedly take the set
// covering the most uncovered elements, lowest index on ties.
inline std::vector<std::size_t> greedy_max_cover(const std::vector<std::set<Index>>& sets,
                                                 std::size_t k) {
  std::set<Index> covered;
  std::vector<std::size_t> picks;
  std::vector<bool> used(sets.size(), false);
  for (std::size_t step = 0; step < std::min(k, sets.size()); ++step) {
    std::size_t best = sets.size();
    std::size_t best_count = 0;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      if (used[s]) continue;
      std::size_t count = 0;
      for (const Index e : sets[s]) count += covered.count(e) == 0;
      if (best == sets.size() || count > best_count) {
        best = s;
        best_count = count;
      }
    }
    used[best] = true;
    picks.push_back(best);
    covered.insert(sets[best].begin(), sets[best].end());
  }
  return picks;
}

// Best k-subset of `candidates` by exhaustive recursion (no early exits).
inline double best_subset_value(const std::vector<Index>& candidates, std::size_t k,
                                const std::vector<Index>& members, const Eigen::MatrixXd& sim) {
  double best = 0;
  std::vector<Index> current;
  auto recurse = [&](auto&& self, std::size_t start) -> void {
    if (current.size() == k) {
      best = std::max(best, objective(current, members, sim));
      return;
    }
    for (std::size_t i = start; i < candidates.size(); ++i) {
      current.push_back(candidates[i]);
      self(self, i + 1);
      current.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

// P(X >= wins) for X ~ Binomial(wins + losses, 1/2); ties are dropped.
inline double sign_test_p(int wins, int losses) {
  const int n = wins + losses;
  double p = 0;
  for (int i = wins; i <= n; ++i) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) -
                  n * std::log(2.0));
  }
  return p;
}

// Random symmetric similarity matrix with unit diagonal and entries in [0, 1].
inline Eigen::MatrixXd random_similarity(Index n, suggestive::SplitMix64& rng) {
  Eigen::MatrixXd sim(n, n);
  for (Index i = 0; i < n; ++i) {
    sim(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) sim(i, j) = sim(j, i) = rng.uniform01();
  }
  return sim;
}

inline suggestive::Pool<double> full_pool(const Eigen::MatrixXd& sim,
                                          const Eigen::VectorXd& uncertainty) {
  suggestive::Pool<double> pool;
  pool.unannotated.resize(static_cast<std::size_t>(sim.rows()));
  std::iota(pool.unannotated.begin(), pool.unannotated.end(), Index{0});
  pool.uncertainty = uncertainty;
  pool.sim = sim;
  return pool;
}

// Uncertainty/error Spearman correlation for one seed of the synthetic
// benchmark: reveal 8 uniformly drawn images, train, and rank all pixels of
// the unrevealed images.
inline double uncertainty_error_spearman(std::uint64_t seed) {
  using namespace suggestive;
  SyntheticBenchmarkSpec spec;
  spec.seed = seed;
  const auto bench = make_synthetic_benchmark(spec);
  const auto& ds = bench.dataset;
  const NearestNeighborLearner learner(seed, kDefaultLearnerNoise);
  SplitMix64 rng(derive_seed(seed, 99));
  std::vector<Index> ids(static_cast<std::size_t>(ds.size()));
  std::iota(ids.begin(), ids.end(), Index{0});
  std::vector<Index> revealed;
  for (std::size_t i = 0; i < 8; ++i) {
    const auto j = i + rng.uniform_below(ids.size() - i);
    std::swap(ids[i], ids[j]);
    revealed.push_back(ids[i]);
  }
  const auto out = learner.train(ds, revealed);
  std::vector<double> u;
  std::vector<double> e;
  for (Index i = 0; i < ds.size(); ++i) {
    if (std::find(revealed.begin(), revealed.end(), i) != revealed.end()) continue;
    const auto um = pixel_uncertainty(out.ensembles[static_cast<std::size_t>(i)]);
    const auto& gt = ds.images()[static_cast<std::size_t>(i)].ground_truth;
    const auto& pred = out.predictions[static_cast<std::size_t>(i)];
    for (Index p = 0; p < gt.size(); ++p) {
      u.push_back(um.values().data()[p]);
      e.push_back(gt.data()[p] != pred.data()[p] ? 1.0 : 0.0);
    }
  }
  return spearman(u, e);
}

// Hand-built malformed tensor files and the error each must produce. Entries
// with a target decode fine and fail on conversion to that type.
enum class Target { kTensor, kFeatureMap, kProbabilityMap, kLabelMap };

struct MalformedCase {
  std::string name;
  std::vector<std::byte> bytes;
  Target target;
  suggestive::TensorErrorKind kind;
};

inline void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

inline void put_f32(std::vector<std::byte>& out, float v) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

inline std::vector<std::byte> header(std::initializer_list<std::uint32_t> dims,
                                     const char* magic = "SAT1") {
  std::vector<std::byte> out;
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>(magic[i]));
  put_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (const auto d : dims) put_u32(out, d);
  return out;
}

inline std::vector<MalformedCase> malformed_corpus() {
  using K = suggestive::TensorErrorKind;
  std::vector<MalformedCase> corpus;
  auto add = [&](std::string name, std::vector<std::byte> bytes, Target target, K kind) {
    corpus.push_back({std::move(name), std::move(bytes), target, kind});
  };

  auto bad_magic = header({1});
  put_f32(bad_magic, 0.5f);
  bad_magic[0] = bad_magic[1] = bad_magic[2] = bad_magic[3] = std::byte{'X'};
  add("bad magic", bad_magic, Target::kTensor, K::kBadMagic);
  add("lowercase magic", [] {
    auto b = header({1}, "sat1");
    put_f32(b, 0.0f);
    return b;
  }(), Target::kTensor, K::kBadMagic);

  add("empty file", {}, Target::kTensor, K::kTruncated);
  auto magic_only = header({});
  magic_only.resize(4);
  add("magic only", magic_only, Target::kTensor, K::kTruncated);
  auto cut_dims = header({2, 3});
  cut_dims.resize(cut_dims.size() - 2);
  add("truncated dims", cut_dims, Target::kTensor, K::kTruncated);
  auto short_payload = header({2, 2});
  for (int i = 0; i < 3; ++i) put_f32(short_payload, 0.25f);
  add("truncated payload", short_payload, Target::kTensor, K::kTruncated);
  auto half_float = header({1});
  half_float.push_back(std::byte{0});
  half_float.push_back(std::byte{0});
  add("partial value", half_float, Target::kTensor, K::kTruncated);

  auto trailing = header({1});
  put_f32(trailing, 0.0f);
  trailing.push_back(std::byte{7});
  add("trailing byte", trailing, Target::kTensor, K::kSizeMismatch);
  auto extra_value = header({2});
  for (int i = 0; i < 3; ++i) put_f32(extra_value, 1.0f);
  add("extra value", extra_value, Target::kTensor, K::kSizeMismatch);

  add("zero ndim", header({}), Target::kTensor, K::kBadShape);
  add("zero dimension", header({2, 0, 3}), Target::kTensor, K::kBadShape);
  auto rank2_feature = header({2, 2});
  for (int i = 0; i < 4; ++i) put_f32(rank2_feature, 1.0f);
  add("feature map of rank 2", rank2_feature, Target::kFeatureMap, K::kBadShape);
  auto rank3_prob = header({1, 2, 2});
  for (int i = 0; i < 4; ++i) put_f32(rank3_prob, 0.5f);
  add("probability map of rank 3", rank3_prob, Target::kProbabilityMap, K::kBadShape);

  auto nan = header({3});
  put_f32(nan, 0.0f);
  put_f32(nan, std::numeric_limits<float>::quiet_NaN());
  put_f32(nan, 0.0f);
  add("nan value", nan, Target::kTensor, K::kNonFinite);
  auto inf = header({1, 1, 2});
  put_f32(inf, std::numeric_limits<float>::infinity());
  put_f32(inf, 1.0f);
  add("infinite value", inf, Target::kFeatureMap, K::kNonFinite);

  auto prob = header({2, 2});
  for (const float v : {0.1f, 0.2f, 1.5f, 0.3f}) put_f32(prob, v);
  add("probability above one", prob, Target::kProbabilityMap, K::kRangeViolation);
  auto neg_prob = header({1, 2});
  for (const float v : {-0.01f, 0.2f}) put_f32(neg_prob, v);
  add("negative probability", neg_prob, Target::kProbabilityMap, K::kRangeViolation);
  auto feature = header({1, 1, 3});
  for (const float v : {1.0f, -2.0f, 3.0f}) put_f32(feature, v);
  add("negative feature", feature, Target::kFeatureMap, K::kRangeViolation);
  auto label = header({1, 3});
  for (const float v : {0.0f, 1.0f, 0.5f}) put_f32(label, v);
  add("fractional label", label, Target::kLabelMap, K::kRangeViolation);
  return corpus;
}

// Decodes and converts per `target`; returns normally if nothing is wrong.
inline void load_as(const MalformedCase& c) {
  const auto t = suggestive::decode_tensor(c.bytes);
  switch (c.target) {
    case Target::kTensor:
      return;
    case Target::kFeatureMap:
      suggestive::to_feature_map(t);
      return;
    case Target::kProbabilityMap:
      suggestive::to_probability_map(t);
      return;
    case Target::kLabelMap:
      suggestive::to_label_map(t);
      return;
  }
}

}  // namespace testing
