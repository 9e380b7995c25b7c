#pragma once

#include <cstdint>
#include <memory>

#include "suggestive/simulation.hpp"

namespace suggestive {

// Clustered desk-scale benchmark. Images are assigned to `clusters` latent
// groups in equal shares (shuffled by seed). An image's features are its
// cluster center: a nonnegative vector with weight 1 on the dimensions
// d where d % clusters == g and a small floor elsewhere, so centers are
// mutually near-orthogonal. Every image of a cluster shares that cluster's
// binary mask: a central disc plus a seeded, per-cluster subset of four
// satellite lobes (distinct subsets while there are enough).
struct SyntheticBenchmarkSpec {
  Index clusters = 8;
  Index images = 64;
  Index height = 32;
  Index width = 32;
  Index dims = 16;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticBenchmark {
  Dataset dataset;
  std::vector<Index> cluster_of;  // by image id
};

SyntheticBenchmark make_synthetic_benchmark(const SyntheticBenchmarkSpec& spec);

// Nearest-labeled-neighbour learner over the dataset features.
//
// Each image gets a descriptor |features + noise * z| with z standard normal
// from a stream keyed by (seed, image). The prediction for an image copies
// the ground truth of the most similar revealed image (cosine similarity,
// lowest id on ties). Ensemble member m repeats that with descriptors
// perturbed once more by |d + 2 * noise * z_m| and reports the copied mask as a
// 0/1 probability map, so members disagree where the nearest revealed image
// is ambiguous. With nothing revealed, predictions are all background and
// every member reports 0.5 everywhere.
class NearestNeighborLearner : public Learner {
 public:
  NearestNeighborLearner(std::uint64_t seed, double noise,
                         Index ensemble_size = kDefaultEnsembleSize);

  LearnerOutput train(const Dataset& ds, std::span<const Index> revealed) const override;

  std::uint64_t seed() const { return seed_; }
  double noise() const { return noise_; }
  Index ensemble_size() const { return ensemble_size_; }

 private:
  std::uint64_t seed_;
  double noise_;
  Index ensemble_size_;
};

inline constexpr double kDefaultLearnerNoise = 0.1;

// noise must lie in [0, 0.5).
std::unique_ptr<Learner> synthetic_learner(std::uint64_t seed, double noise,
                                           Index ensemble_size = kDefaultEnsembleSize);

}  // namespace suggestive
