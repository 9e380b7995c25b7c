#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "suggestive/error.hpp"
#include "suggestive/numeric.hpp"

namespace suggestive {

using Index = Eigen::Index;

inline constexpr Index kDefaultEnsembleSize = 4;

// Foreground probability per pixel, height x width, values in [0, 1].
template <typename Scalar>
class ProbabilityMap {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit ProbabilityMap(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
      throw ValidationError("probability map dimensions must be >= 1");
    }
    const Scalar* data = values_.data();
    for (Index i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(data[i]) || data[i] < 0 || data[i] > 1) {
        throw ValidationError("probability map value at flat index " + std::to_string(i) +
                              " is outside [0, 1]");
      }
    }
  }

  Index height() const { return values_.rows(); }
  Index width() const { return values_.cols(); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

// Per-pixel ensemble variance. Population variance of [0,1] values is at
// most 1/4; a rounding slack of 1e-12 is tolerated above that.
template <typename Scalar>
class UncertaintyMap {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  static constexpr Scalar kMax = Scalar(0.25);

  explicit UncertaintyMap(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
      throw ValidationError("uncertainty map dimensions must be >= 1");
    }
    const Scalar* data = values_.data();
    for (Index i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(data[i]) || data[i] < 0 || data[i] > kMax + Scalar(1e-12)) {
        throw ValidationError("uncertainty map value at flat index " + std::to_string(i) +
                              " is outside [0, 0.25]");
      }
    }
  }

  Index height() const { return values_.rows(); }
  Index width() const { return values_.cols(); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

// Population variance (divide by N) of each pixel across the ensemble,
// computed in two passes: compensated mean, then compensated sum of squared
// deviations. Rows are independent, so they may be split across threads.
template <typename Scalar>
UncertaintyMap<Scalar> pixel_uncertainty(std::span<const ProbabilityMap<Scalar>> maps) {
  if (maps.size() < 2) {
    throw ValidationError("pixel_uncertainty needs at least 2 probability maps, got " +
                          std::to_string(maps.size()));
  }
  const Index h = maps.front().height();
  const Index w = maps.front().width();
  for (std::size_t m = 1; m < maps.size(); ++m) {
    if (maps[m].height() != h || maps[m].width() != w) {
      throw ValidationError("probability map " + std::to_string(m) + " is " +
                            std::to_string(maps[m].height()) + "x" +
                            std::to_string(maps[m].width()) + ", expected " +
                            std::to_string(h) + "x" + std::to_string(w));
    }
  }
  const auto n = static_cast<Scalar>(maps.size());
  typename UncertaintyMap<Scalar>::Matrix out(h, w);
  parallel_for(
      static_cast<std::size_t>(h),
      [&](std::size_t begin, std::size_t end) {
        for (auto y = static_cast<Index>(begin); y < static_cast<Index>(end); ++y) {
          for (Index x = 0; x < w; ++x) {
            // Deviations are taken from the first map's value so that
            // identical maps give exactly zero.
            const Scalar shift = maps.front().values()(y, x);
            CompensatedSum<Scalar> sum;
            for (const auto& m : maps) sum += m.values()(y, x) - shift;
            const Scalar mean = sum.value() / n;
            CompensatedSum<Scalar> sq;
            for (const auto& m : maps) {
              const Scalar d = m.values()(y, x) - shift - mean;
              sq += d * d;
            }
            out(y, x) = sq.value() / n;
          }
        }
      },
      16);
  return UncertaintyMap<Scalar>(std::move(out));
}

template <typename Scalar>
UncertaintyMap<Scalar> pixel_uncertainty(const std::vector<ProbabilityMap<Scalar>>& maps) {
  return pixel_uncertainty(std::span<const ProbabilityMap<Scalar>>(maps));
}

// Per-image score: the mean pixel uncertainty.
template <typename Scalar>
Scalar image_uncertainty(const UncertaintyMap<Scalar>& um) {
  CompensatedSum<Scalar> sum;
  const Scalar* data = um.values().data();
  for (Index i = 0; i < um.values().size(); ++i) sum += data[i];
  return sum.value() / static_cast<Scalar>(um.values().size());
}

// Bootstrap training subsets: n_models lists, each n_train indices drawn
// uniformly with replacement from [0, n_train).
struct BootstrapPlan {
  std::uint32_t n_models = 0;
  std::uint32_t n_train = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::uint32_t>> index_sets;

  bool operator==(const BootstrapPlan&) const = default;
};

// Draws come from one SplitMix64 stream seeded with `seed`, list by list.
BootstrapPlan bootstrap_plan(std::uint32_t n_models, std::uint32_t n_train, std::uint64_t seed);

// Text form: a header line "bootstrap <n_models> <n_train> <seed>", then one
// line per model with its indices separated by single spaces.
void write_bootstrap_plan(std::ostream& os, const BootstrapPlan& plan);
BootstrapPlan read_bootstrap_plan(std::istream& is);

}  // namespace suggestive
