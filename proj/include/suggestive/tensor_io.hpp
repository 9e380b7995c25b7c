#pragma once

// SAT1 tensor files, byte layout (all integers and floats little-endian):
//
//   offset 0      4 bytes   magic "SAT1"
//   offset 4      uint32    ndim (>= 1)
//   offset 8      uint32    dims[ndim] (each >= 1)
//   offset 8+4n   float32   payload[prod(dims)], row-major, last dim fastest
//
// The file length must equal 8 + 4*ndim + 4*prod(dims) exactly and every
// payload value must be finite.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "suggestive/descriptor.hpp"
#include "suggestive/error.hpp"
#include "suggestive/metrics.hpp"
#include "suggestive/uncertainty.hpp"

namespace suggestive {

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const;
  bool operator==(const Tensor&) const = default;
};

enum class TensorErrorKind {
  kBadMagic,
  kTruncated,       // file ends before the declared header or payload
  kSizeMismatch,    // bytes left over after the declared payload
  kBadShape,        // ndim == 0, a zero dimension, or wrong rank for the target type
  kNonFinite,
  kRangeViolation,  // value outside the target type's range
};

std::string_view to_string(TensorErrorKind kind);

class TensorFormatError : public ValidationError {
 public:
  TensorFormatError(TensorErrorKind kind, const std::string& what)
      : ValidationError(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  TensorErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }

 private:
  TensorErrorKind kind_;
  std::string detail_;
};

std::vector<std::byte> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::byte> bytes);

Tensor read_tensor(const std::filesystem::path& path);
// Written to a temporary sibling and renamed into place.
void write_tensor(const Tensor& t, const std::filesystem::path& path);

// Typed views. Shapes: FeatureMap [H, W, C]; ProbabilityMap and LabelMap
// [H, W]; a probability stack (ensemble) [N, H, W].
FeatureMap<double> to_feature_map(const Tensor& t);
ProbabilityMap<double> to_probability_map(const Tensor& t);
std::vector<ProbabilityMap<double>> to_probability_stack(const Tensor& t);
LabelMap to_label_map(const Tensor& t);

Tensor from_feature_map(const FeatureMap<double>& fm);
Tensor from_probability_map(const ProbabilityMap<double>& pm);
Tensor from_probability_stack(std::span<const ProbabilityMap<double>> maps);
Tensor from_label_map(const LabelMap& labels);

FeatureMap<double> read_feature_map(const std::filesystem::path& path);
ProbabilityMap<double> read_probability_map(const std::filesystem::path& path);

// Regular files in `dir`, sorted by file name (byte-wise). Position in the
// result is the image id used throughout the CLI.
std::vector<std::filesystem::path> list_tensor_files(const std::filesystem::path& dir);

// Writes `bytes` to a temporary sibling of `path`, then renames it over.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace suggestive
