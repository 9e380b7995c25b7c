#include "suggestive/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <system_error>

namespace suggestive {
namespace {

constexpr std::byte kMagic[4] = {std::byte{'S'}, std::byte{'A'}, std::byte{'T'}, std::byte{'1'}};

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::span<const std::byte> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(std::to_integer<std::uint8_t>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

[[noreturn]] void fail(TensorErrorKind kind, const std::string& what) {
  throw TensorFormatError(kind, what);
}

void require_rank(const Tensor& t, std::size_t rank, const char* target) {
  if (t.dims.size() != rank) {
    fail(TensorErrorKind::kBadShape, std::string(target) + " needs a rank-" +
                                         std::to_string(rank) + " tensor, got rank " +
                                         std::to_string(t.dims.size()));
  }
}

void check_shape(const std::vector<std::uint32_t>& dims) {
  if (dims.empty()) fail(TensorErrorKind::kBadShape, "ndim must be at least 1");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] == 0) fail(TensorErrorKind::kBadShape, "dimension " + std::to_string(i) + " is 0");
  }
}

}  // namespace

std::string_view to_string(TensorErrorKind kind) {
  switch (kind) {
    case TensorErrorKind::kBadMagic:
      return "bad magic";
    case TensorErrorKind::kTruncated:
      return "truncated";
    case TensorErrorKind::kSizeMismatch:
      return "size mismatch";
    case TensorErrorKind::kBadShape:
      return "bad shape";
    case TensorErrorKind::kNonFinite:
      return "non-finite value";
    case TensorErrorKind::kRangeViolation:
      return "range violation";
  }
  return "unknown";
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (const auto d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

std::vector<std::byte> encode_tensor(const Tensor& t) {
  check_shape(t.dims);
  if (t.values.size() != t.element_count()) {
    fail(TensorErrorKind::kBadShape, "tensor has " + std::to_string(t.values.size()) +
                                         " values for " + std::to_string(t.element_count()) +
                                         " elements");
  }
  std::vector<std::byte> out;
  out.reserve(8 + 4 * t.dims.size() + 4 * t.values.size());
  for (const auto b : kMagic) out.push_back(b);
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (const auto d : t.dims) put_u32(out, d);
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    if (!std::isfinite(t.values[i])) {
      fail(TensorErrorKind::kNonFinite, "value at index " + std::to_string(i));
    }
    put_u32(out, std::bit_cast<std::uint32_t>(t.values[i]));
  }
  return out;
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < 4) {
    fail(TensorErrorKind::kTruncated, "file ends at byte " + std::to_string(bytes.size()) +
                                          " inside the magic");
  }
  if (!std::equal(bytes.begin(), bytes.begin() + 4, std::begin(kMagic))) {
    fail(TensorErrorKind::kBadMagic, "expected \"SAT1\" at byte offset 0");
  }
  if (bytes.size() < 8) {
    fail(TensorErrorKind::kTruncated, "file ends at byte " + std::to_string(bytes.size()) +
                                          " inside ndim (offset 4)");
  }
  const std::uint32_t ndim = get_u32(bytes, 4);
  if (ndim == 0) fail(TensorErrorKind::kBadShape, "ndim at byte offset 4 is 0");
  const std::uint64_t header = 8 + 4 * static_cast<std::uint64_t>(ndim);
  if (bytes.size() < header) {
    fail(TensorErrorKind::kTruncated, "file ends at byte " + std::to_string(bytes.size()) +
                                          ", dims need " + std::to_string(header) + " bytes");
  }
  Tensor t;
  t.dims.resize(ndim);
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    t.dims[i] = get_u32(bytes, 8 + 4 * static_cast<std::size_t>(i));
    if (t.dims[i] == 0) {
      fail(TensorErrorKind::kBadShape,
           "dimension " + std::to_string(i) + " at byte offset " + std::to_string(8 + 4 * i) +
               " is 0");
    }
    if (count > std::numeric_limits<std::uint64_t>::max() / 4 / t.dims[i]) {
      fail(TensorErrorKind::kBadShape, "declared element count overflows");
    }
    count *= t.dims[i];
  }
  const std::uint64_t expected = header + 4 * count;
  if (bytes.size() < expected) {
    fail(TensorErrorKind::kTruncated, "payload needs " + std::to_string(expected) +
                                          " bytes, file ends at byte offset " +
                                          std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    fail(TensorErrorKind::kSizeMismatch, std::to_string(bytes.size() - expected) +
                                             " trailing bytes after byte offset " +
                                             std::to_string(expected));
  }
  t.values.resize(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    const std::size_t offset = static_cast<std::size_t>(header) + 4 * i;
    const float v = std::bit_cast<float>(get_u32(bytes, offset));
    if (!std::isfinite(v)) {
      fail(TensorErrorKind::kNonFinite, "value at index " + std::to_string(i) +
                                            " (byte offset " + std::to_string(offset) + ")");
    }
    t.values[i] = v;
  }
  return t;
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  try {
    return decode_tensor(std::as_bytes(std::span<const char>(raw)));
  } catch (const TensorFormatError& e) {
    throw TensorFormatError(e.kind(), path.string() + ": " + e.detail());
  }
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(t);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
}

FeatureMap<double> to_feature_map(const Tensor& t) {
  require_rank(t, 3, "feature map");
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    if (t.values[i] < 0) {
      fail(TensorErrorKind::kRangeViolation,
           "feature value " + std::to_string(t.values[i]) + " at index " + std::to_string(i) +
               " is negative");
    }
  }
  const auto h = static_cast<Index>(t.dims[0]);
  const auto w = static_cast<Index>(t.dims[1]);
  const auto c = static_cast<Index>(t.dims[2]);
  FeatureMap<double>::Matrix m =
      Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          t.values.data(), h * w, c)
          .cast<double>();
  return FeatureMap<double>(h, w, c, std::move(m));
}

namespace {

ProbabilityMap<double> probability_slice(const Tensor& t, std::size_t first, Index h, Index w) {
  for (std::size_t i = first; i < first + static_cast<std::size_t>(h * w); ++i) {
    if (t.values[i] < 0.0f || t.values[i] > 1.0f) {
      fail(TensorErrorKind::kRangeViolation, "probability " + std::to_string(t.values[i]) +
                                                 " at index " + std::to_string(i) +
                                                 " is outside [0, 1]");
    }
  }
  ProbabilityMap<double>::Matrix m =
      Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          t.values.data() + first, h, w)
          .cast<double>();
  return ProbabilityMap<double>(std::move(m));
}

}  // namespace

ProbabilityMap<double> to_probability_map(const Tensor& t) {
  require_rank(t, 2, "probability map");
  return probability_slice(t, 0, t.dims[0], t.dims[1]);
}

std::vector<ProbabilityMap<double>> to_probability_stack(const Tensor& t) {
  require_rank(t, 3, "probability stack");
  const auto h = static_cast<Index>(t.dims[1]);
  const auto w = static_cast<Index>(t.dims[2]);
  std::vector<ProbabilityMap<double>> maps;
  for (std::uint32_t m = 0; m < t.dims[0]; ++m) {
    maps.push_back(probability_slice(t, static_cast<std::size_t>(m * h * w), h, w));
  }
  return maps;
}

LabelMap to_label_map(const Tensor& t) {
  require_rank(t, 2, "label map");
  LabelMap out(t.dims[0], t.dims[1]);
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    const float v = t.values[i];
    if (v != 0.0f && v != 1.0f) {
      fail(TensorErrorKind::kRangeViolation,
           "label " + std::to_string(v) + " at index " + std::to_string(i) + " is not 0 or 1");
    }
    out.data()[i] = static_cast<std::uint8_t>(v);
  }
  return out;
}

Tensor from_feature_map(const FeatureMap<double>& fm) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(fm.height()), static_cast<std::uint32_t>(fm.width()),
            static_cast<std::uint32_t>(fm.channels())};
  const auto& v = fm.values();
  t.values.assign(v.data(), v.data() + v.size());
  return t;
}

Tensor from_probability_map(const ProbabilityMap<double>& pm) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(pm.height()), static_cast<std::uint32_t>(pm.width())};
  const auto& v = pm.values();
  t.values.assign(v.data(), v.data() + v.size());
  return t;
}

Tensor from_probability_stack(std::span<const ProbabilityMap<double>> maps) {
  if (maps.empty()) fail(TensorErrorKind::kBadShape, "empty probability stack");
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(maps.size()),
            static_cast<std::uint32_t>(maps.front().height()),
            static_cast<std::uint32_t>(maps.front().width())};
  for (const auto& m : maps) {
    if (m.height() != maps.front().height() || m.width() != maps.front().width()) {
      fail(TensorErrorKind::kBadShape, "probability stack maps differ in size");
    }
    t.values.insert(t.values.end(), m.values().data(), m.values().data() + m.values().size());
  }
  return t;
}

Tensor from_label_map(const LabelMap& labels) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(labels.rows()), static_cast<std::uint32_t>(labels.cols())};
  t.values.assign(labels.data(), labels.data() + labels.size());
  return t;
}

FeatureMap<double> read_feature_map(const std::filesystem::path& path) {
  return to_feature_map(read_tensor(path));
}

ProbabilityMap<double> read_probability_map(const std::filesystem::path& path) {
  return to_probability_map(read_tensor(path));
}

std::vector<std::filesystem::path> list_tensor_files(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::directory_iterator it(dir, ec);
  if (ec) throw IoError("cannot list directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : it) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

}  // namespace suggestive
