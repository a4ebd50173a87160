#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bseg/image.h"

namespace bseg {

/// Rows are ground truth, columns are prediction. Void pixels are not counted.
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<uint64_t> counts;

  explicit ConfusionMatrix(int classes = 0)
      : num_classes(classes), counts(static_cast<size_t>(classes) * classes, 0) {}

  uint64_t& at(int gt, int pred) { return counts[static_cast<size_t>(gt) * num_classes + pred]; }
  uint64_t at(int gt, int pred) const {
    return counts[static_cast<size_t>(gt) * num_classes + pred];
  }
  uint64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct IoUReport {
  std::vector<std::optional<double>> per_class;  // absent: class never seen
  double miou = 0.0;
  uint64_t pixel_count = 0;
};

// Adds every non-void pixel, or only the selected ones when `restrict` is
// given.
void accumulate(ConfusionMatrix& cm, const LabelMap& pred, const LabelMap& gt,
                const BorderMask* restrict = nullptr);

// IoU_c = TP / (TP + FP + FN); classes with a zero denominator are left out
// of the mean.
IoUReport miou(const ConfusionMatrix& cm);

// Base prediction with ground truth pasted onto the selected pixels.
LabelMap theoretical_max_prediction(const LabelMap& base_pred, const LabelMap& gt,
                                    const BorderMask& mask);
IoUReport theoretical_max(const LabelMap& base_pred, const LabelMap& gt,
                          const BorderMask& mask);

std::string report_json(const IoUReport& r, int indent = 2);
void write_report_csv(std::ostream& out, const IoUReport& r);

}  // namespace bseg
