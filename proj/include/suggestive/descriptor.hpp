#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "suggestive/error.hpp"
#include "suggestive/numeric.hpp"

namespace suggestive {

using Index = Eigen::Index;

template <typename Scalar>
using Descriptor = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using SimilarityMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Encoder activations of one image, height x width x channels. Stored as a
// (height*width) x channels row-major matrix, so pixel p = y*width + x is a
// row and each channel is a column. Values are finite and nonnegative.
template <typename Scalar>
class FeatureMap {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  FeatureMap(Index height, Index width, Index channels, Matrix values)
      : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
    if (height < 1 || width < 1 || channels < 1) {
      throw ValidationError("feature map dimensions must be >= 1");
    }
    if (values_.rows() != height * width || values_.cols() != channels) {
      throw ValidationError("feature map storage does not match " + std::to_string(height) +
                            "x" + std::to_string(width) + "x" + std::to_string(channels));
    }
    const Scalar* data = values_.data();
    for (Index i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(data[i])) {
        throw ValidationError("feature map value at flat index " + std::to_string(i) +
                              " is not finite");
      }
      if (data[i] < 0) {
        throw ValidationError("feature map value at flat index " + std::to_string(i) +
                              " is negative");
      }
    }
  }

  // Row-major height x width x channels buffer, last dimension fastest.
  static FeatureMap from_buffer(Index height, Index width, Index channels,
                                std::span<const Scalar> buffer) {
    if (static_cast<Index>(buffer.size()) != height * width * channels) {
      throw ValidationError("feature map buffer has wrong length");
    }
    Matrix m = Eigen::Map<const Matrix>(buffer.data(), height * width, channels);
    return FeatureMap(height, width, channels, std::move(m));
  }

  Index height() const { return height_; }
  Index width() const { return width_; }
  Index channels() const { return channels_; }
  const Matrix& values() const { return values_; }
  Scalar at(Index y, Index x, Index c) const { return values_(y * width_ + x, c); }

 private:
  Index height_;
  Index width_;
  Index channels_;
  Matrix values_;
};

// Condensed per-image descriptor: the spatial mean of each channel.
template <typename Scalar>
Descriptor<Scalar> channel_mean(const FeatureMap<Scalar>& fm) {
  const auto& v = fm.values();
  const Index pixels = v.rows();
  Descriptor<Scalar> out(fm.channels());
  for (Index c = 0; c < fm.channels(); ++c) {
    CompensatedSum<Scalar> sum;
    for (Index p = 0; p < pixels; ++p) sum += v(p, c);
    out(c) = sum.value() / static_cast<Scalar>(pixels);
  }
  return out;
}

namespace detail {

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar compensated_dot(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  CompensatedSum<typename DerivedA::Scalar> sum;
  for (Index i = 0; i < a.size(); ++i) sum += a(i) * b(i);
  return sum.value();
}

template <typename Scalar>
Scalar cosine_from_parts(Scalar dot, Scalar norm2_a, Scalar norm2_b) {
  if (norm2_a == 0 || norm2_b == 0) return Scalar(0);
  // sqrt of the product keeps similarity(a, a) exactly 1.
  return dot / std::sqrt(norm2_a * norm2_b);
}

template <typename Derived>
void check_descriptor(const Eigen::MatrixBase<Derived>& d, Index which) {
  for (Index i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d(i)) || d(i) < 0) {
      throw ValidationError("descriptor " + std::to_string(which) + " entry " +
                            std::to_string(i) + " is not a finite nonnegative value");
    }
  }
}

}  // namespace detail

// Cosine similarity of two descriptors. Zero when either has zero norm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar similarity(const Eigen::MatrixBase<DerivedA>& a,
                                     const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw ValidationError("descriptor dimension mismatch: " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
  }
  return detail::cosine_from_parts(detail::compensated_dot(a, b), detail::compensated_dot(a, a),
                                   detail::compensated_dot(b, b));
}

// Pairwise similarities. Rows may be computed on several threads; every
// entry is produced by the same fixed-order summation, so the result does
// not depend on the thread count.
template <typename Scalar>
SimilarityMatrix<Scalar> similarity_matrix(std::span<const Descriptor<Scalar>> ds) {
  if (ds.empty()) throw ValidationError("similarity_matrix needs at least one descriptor");
  const Index n = static_cast<Index>(ds.size());
  const Index dims = ds.front().size();
  Descriptor<Scalar> norm2(n);
  for (Index i = 0; i < n; ++i) {
    if (ds[i].size() != dims) {
      throw ValidationError("descriptor " + std::to_string(i) + " has " +
                            std::to_string(ds[i].size()) + " dims, expected " +
                            std::to_string(dims));
    }
    detail::check_descriptor(ds[i], i);
    norm2(i) = detail::compensated_dot(ds[i], ds[i]);
  }
  SimilarityMatrix<Scalar> sim(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (auto i = static_cast<Index>(begin); i < static_cast<Index>(end); ++i) {
      for (Index j = i; j < n; ++j) {
        sim(i, j) = detail::cosine_from_parts(detail::compensated_dot(ds[i], ds[j]), norm2(i),
                                              norm2(j));
      }
    }
  });
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) sim(i, j) = sim(j, i);
  }
  return sim;
}

template <typename Scalar>
SimilarityMatrix<Scalar> similarity_matrix(const std::vector<Descriptor<Scalar>>& ds) {
  return similarity_matrix(std::span<const Descriptor<Scalar>>(ds));
}

}  // namespace suggestive
