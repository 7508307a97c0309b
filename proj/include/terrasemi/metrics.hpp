#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "terrasemi/error.hpp"
#include "terrasemi/image.hpp"

namespace terrasemi {

/// K x K pixel counts, rows = ground truth, columns = prediction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {
    if (classes < 1) throw Error(ErrorKind::kInvalidArgument, "confusion matrix needs >= 1 class");
  }

  std::size_t classes() const noexcept { return classes_; }
  std::uint64_t at(std::size_t gt, std::size_t pred) const { return counts_[gt * classes_ + pred]; }
  std::uint64_t& at(std::size_t gt, std::size_t pred) { return counts_[gt * classes_ + pred]; }

  std::uint64_t total() const noexcept {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) throw Error(ErrorKind::kDimensionMismatch, "class counts differ");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
  }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

/// Adds every pixel whose ground truth is not IGNORE.
inline void accumulate(ConfusionMatrix& cm, const LabelMap& pred, const LabelMap& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw Error(ErrorKind::kDimensionMismatch, "prediction and ground truth dims differ");
  }
  const auto p = pred.data();
  const auto g = gt.data();
  const std::size_t k = cm.classes();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == kIgnore) continue;
    if (g[i] >= k || p[i] >= k) {
      throw Error(ErrorKind::kInvalidArgument, "class id exceeds confusion matrix size");
    }
    ++cm.at(g[i], p[i]);
  }
}

/// TP / (TP + FP + FN); nullopt when the class never occurs in gt or pred.
inline std::optional<double> class_iou(const ConfusionMatrix& cm, std::size_t c) {
  if (c >= cm.classes()) throw Error(ErrorKind::kInvalidArgument, "class index out of range");
  const std::uint64_t tp = cm.at(c, c);
  std::uint64_t fp = 0, fn = 0;
  for (std::size_t o = 0; o < cm.classes(); ++o) {
    if (o == c) continue;
    fp += cm.at(o, c);
    fn += cm.at(c, o);
  }
  const std::uint64_t denom = tp + fp + fn;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(denom);
}

/// Mean over classes with a defined IoU; nullopt if none is defined. With
/// `only` set, restricts the mean to that subset (e.g. a single target class).
inline std::optional<double> mean_iou(const ConfusionMatrix& cm,
                                      std::span<const std::size_t> only = {}) {
  double sum = 0.0;
  std::size_t n = 0;
  auto add = [&](std::size_t c) {
    if (auto v = class_iou(cm, c)) {
      sum += *v;
      ++n;
    }
  };
  if (only.empty()) {
    for (std::size_t c = 0; c < cm.classes(); ++c) add(c);
  } else {
    for (std::size_t c : only) add(c);
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population (divisor n)
};

inline Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kInvalidArgument, "aggregate: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

}  // namespace terrasemi
