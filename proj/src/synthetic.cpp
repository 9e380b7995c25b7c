#include "suggestive/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "suggestive/descriptor.hpp"
#include "suggestive/rng.hpp"

namespace suggestive {
namespace {

constexpr double kCenterFloor = 0.05;

// Mask geometry, as fractions of the image size: a central body shared by
// every cluster plus kLobes satellite discs switched on per cluster. Pixels
// are then either consensus (body, far background) or contested (lobes).
constexpr double kBodyRadius = 0.25;
constexpr int kLobes = 4;
constexpr double kLobeDistance = 0.3;
constexpr double kLobeRadius = 0.15;

// Ensemble members perturb with this multiple of the descriptor noise.
constexpr double kMemberNoiseScale = 2.0;

void paint_disc(LabelMap& mask, double cy, double cx, double radius) {
  const auto h = static_cast<double>(mask.rows());
  const auto w = static_cast<double>(mask.cols());
  for (Index y = 0; y < mask.rows(); ++y) {
    for (Index x = 0; x < mask.cols(); ++x) {
      const double dy = (static_cast<double>(y) + 0.5 - cy * h) / (radius * h);
      const double dx = (static_cast<double>(x) + 0.5 - cx * w) / (radius * w);
      if (dy * dy + dx * dx <= 1.0) mask(y, x) = 1;
    }
  }
}

// Bit l of `lobes` switches lobe l on.
LabelMap cluster_mask(Index height, Index width, unsigned lobes) {
  LabelMap mask = LabelMap::Zero(height, width);
  paint_disc(mask, 0.5, 0.5, kBodyRadius);
  for (int l = 0; l < kLobes; ++l) {
    if (!((lobes >> l) & 1u)) continue;
    const double theta = 2.0 * std::numbers::pi * l / kLobes;
    paint_disc(mask, 0.5 + kLobeDistance * std::sin(theta), 0.5 + kLobeDistance * std::cos(theta),
               kLobeRadius);
  }
  return mask;
}

Eigen::VectorXd perturb(const Eigen::VectorXd& v, double noise, std::uint64_t stream) {
  SplitMix64 rng(stream);
  Eigen::VectorXd out(v.size());
  for (Index i = 0; i < v.size(); ++i) out(i) = std::abs(v(i) + noise * rng.normal());
  return out;
}

// Most similar revealed id; `revealed` is ascending so a strict comparison
// keeps the lowest id on ties.
Index nearest(const std::vector<Eigen::VectorXd>& desc, Index image,
              const std::vector<Index>& revealed) {
  Index arg = revealed.front();
  double best = -1;
  for (const Index r : revealed) {
    const double s = similarity(desc[static_cast<std::size_t>(image)],
                                desc[static_cast<std::size_t>(r)]);
    if (s > best) {
      best = s;
      arg = r;
    }
  }
  return arg;
}

}  // namespace

void SyntheticBenchmarkSpec::validate() const {
  if (clusters < 1 || images < clusters || height < 1 || width < 1 || dims < clusters) {
    throw ValidationError(
        "synthetic benchmark requires clusters >= 1, images >= clusters, dims >= clusters and "
        "positive image size");
  }
}

SyntheticBenchmark make_synthetic_benchmark(const SyntheticBenchmarkSpec& spec) {
  spec.validate();
  SplitMix64 rng(derive_seed(spec.seed, 0x5EED));

  std::vector<Index> cluster_of(static_cast<std::size_t>(spec.images));
  for (Index i = 0; i < spec.images; ++i) cluster_of[static_cast<std::size_t>(i)] = i % spec.clusters;
  for (std::size_t i = cluster_of.size(); i > 1; --i) {
    std::swap(cluster_of[i - 1], cluster_of[static_cast<std::size_t>(rng.uniform_below(i))]);
  }

  // Distinct lobe patterns while they last, then repeats.
  std::vector<unsigned> patterns(1u << kLobes);
  std::iota(patterns.begin(), patterns.end(), 0u);
  for (std::size_t i = patterns.size(); i > 1; --i) {
    std::swap(patterns[i - 1], patterns[static_cast<std::size_t>(rng.uniform_below(i))]);
  }

  std::vector<Eigen::VectorXd> centers;
  std::vector<LabelMap> masks;
  for (Index g = 0; g < spec.clusters; ++g) {
    Eigen::VectorXd c = Eigen::VectorXd::Constant(spec.dims, kCenterFloor);
    for (Index d = g; d < spec.dims; d += spec.clusters) c(d) = 1.0;
    centers.push_back(std::move(c));
    masks.push_back(cluster_mask(spec.height, spec.width,
                                 patterns[static_cast<std::size_t>(g) % patterns.size()]));
  }

  std::vector<ImageRecord> images;
  images.reserve(static_cast<std::size_t>(spec.images));
  for (Index i = 0; i < spec.images; ++i) {
    const auto g = static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(i)]);
    char name[32];
    std::snprintf(name, sizeof name, "img%04ld", static_cast<long>(i));
    images.push_back(ImageRecord{name, masks[g], centers[g]});
  }
  return SyntheticBenchmark{Dataset(std::move(images)), std::move(cluster_of)};
}

NearestNeighborLearner::NearestNeighborLearner(std::uint64_t seed, double noise,
                                               Index ensemble_size)
    : seed_(seed), noise_(noise), ensemble_size_(ensemble_size) {
  if (!(noise >= 0.0 && noise < 0.5)) {
    throw ValidationError("learner noise must lie in [0, 0.5), got " + std::to_string(noise));
  }
  if (ensemble_size < 2) throw ValidationError("ensemble size must be at least 2");
}

LearnerOutput NearestNeighborLearner::train(const Dataset& ds,
                                            std::span<const Index> revealed_in) const {
  const auto n = static_cast<std::size_t>(ds.size());
  std::vector<Index> revealed(revealed_in.begin(), revealed_in.end());
  std::sort(revealed.begin(), revealed.end());
  for (const Index r : revealed) {
    if (r < 0 || r >= ds.size()) throw ValidationError("revealed id out of range");
  }

  LearnerOutput out;
  out.descriptors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.descriptors.push_back(perturb(ds.images()[i].features, noise_, derive_seed(seed_, 0, i)));
  }

  std::vector<std::vector<Eigen::VectorXd>> member_desc(static_cast<std::size_t>(ensemble_size_));
  for (Index m = 0; m < ensemble_size_; ++m) {
    auto& md = member_desc[static_cast<std::size_t>(m)];
    md.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      md.push_back(perturb(out.descriptors[i], kMemberNoiseScale * noise_,
                           derive_seed(seed_, static_cast<std::uint64_t>(m) + 1, i)));
    }
  }

  out.ensembles.resize(n);
  out.predictions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& gt = ds.images()[i].ground_truth;
    const auto image = static_cast<Index>(i);
    auto& ensemble = out.ensembles[i];
    if (revealed.empty()) {
      out.predictions.push_back(LabelMap::Zero(gt.rows(), gt.cols()));
      for (Index m = 0; m < ensemble_size_; ++m) {
        ensemble.emplace_back(ProbabilityMap<double>::Matrix::Constant(gt.rows(), gt.cols(), 0.5));
      }
      continue;
    }
    const Index base = nearest(out.descriptors, image, revealed);
    out.predictions.push_back(ds.images()[static_cast<std::size_t>(base)].ground_truth);
    for (Index m = 0; m < ensemble_size_; ++m) {
      const Index pick = nearest(member_desc[static_cast<std::size_t>(m)], image, revealed);
      const auto& mask = ds.images()[static_cast<std::size_t>(pick)].ground_truth;
      if (mask.rows() != gt.rows() || mask.cols() != gt.cols()) {
        throw ValidationError("nearest-neighbour learner needs equally sized images");
      }
      ensemble.emplace_back(mask.cast<double>().matrix());
    }
  }
  return out;
}

std::unique_ptr<Learner> synthetic_learner(std::uint64_t seed, double noise,
                                           Index ensemble_size) {
  return std::make_unique<NearestNeighborLearner>(seed, noise, ensemble_size);
}

}  // namespace suggestive
