#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace suggestive {

// Binary segmentation mask: 0 background, 1 foreground.
using LabelMap = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Mean over {background, foreground} of per-class IoU. A class absent from
// both masks scores 1.
double mean_iu(const LabelMap& pred, const LabelMap& gt);

// Foreground F1. Both masks empty gives 1; exactly one empty gives 0.
double pixel_f1(const LabelMap& pred, const LabelMap& gt);

// Spearman rank correlation with average ranks for ties. Returns 0 when
// either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace suggestive
