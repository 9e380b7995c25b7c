#include "suggestive/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "suggestive/error.hpp"

namespace suggestive {
namespace {

struct Confusion {
  Eigen::Index tp = 0;
  Eigen::Index fp = 0;
  Eigen::Index fn = 0;
  Eigen::Index tn = 0;
};

Confusion confusion(const LabelMap& pred, const LabelMap& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw ValidationError("label map dimension mismatch: " + std::to_string(pred.rows()) + "x" +
                          std::to_string(pred.cols()) + " vs " + std::to_string(gt.rows()) +
                          "x" + std::to_string(gt.cols()));
  }
  Confusion c;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const auto p = pred.data()[i];
    const auto g = gt.data()[i];
    if (p > 1 || g > 1) {
      throw ValidationError("label map value at flat index " + std::to_string(i) +
                            " is not 0 or 1");
    }
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

double iou(Eigen::Index inter, Eigen::Index uni) {
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double mean_iu(const LabelMap& pred, const LabelMap& gt) {
  const Confusion c = confusion(pred, gt);
  const double fg = iou(c.tp, c.tp + c.fp + c.fn);
  const double bg = iou(c.tn, c.tn + c.fp + c.fn);
  return 0.5 * (fg + bg);
}

double pixel_f1(const LabelMap& pred, const LabelMap& gt) {
  const Confusion c = confusion(pred, gt);
  const auto pred_fg = c.tp + c.fp;
  const auto gt_fg = c.tp + c.fn;
  if (pred_fg == 0 && gt_fg == 0) return 1.0;
  if (pred_fg == 0 || gt_fg == 0 || c.tp == 0) return 0.0;
  const double precision = static_cast<double>(c.tp) / static_cast<double>(pred_fg);
  const double recall = static_cast<double>(c.tp) / static_cast<double>(gt_fg);
  return 2.0 * precision * recall / (precision + recall);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0;
  double sxx = 0;
  double syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace suggestive
