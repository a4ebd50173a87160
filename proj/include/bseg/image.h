#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bseg/errors.h"

namespace bseg {

struct Pixel {
  int row = 0;
  int col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Per-pixel class indices of one frame, row-major.
///
/// Used both for ground truth and for the base network's prediction. A label
/// equal to `void_label` marks pixels that carry no class (excluded from
/// evaluation).
struct LabelMap {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::optional<int> void_label;
  std::vector<int> labels;

  LabelMap() = default;
  LabelMap(int h, int w, int classes, int fill = 0,
           std::optional<int> void_lbl = std::nullopt)
      : height(h),
        width(w),
        num_classes(classes),
        void_label(void_lbl),
        labels(static_cast<size_t>(h) * w, fill) {}

  size_t size() const { return labels.size(); }
  int& at(int r, int c) { return labels[static_cast<size_t>(r) * width + c]; }
  int at(int r, int c) const {
    return labels[static_cast<size_t>(r) * width + c];
  }
  bool is_void(int label) const { return void_label && label == *void_label; }

  // Throws DataError when the invariants do not hold.
  void validate() const;
};

/// Three intensity planes with values in [0, 255].
struct RgbFrame {
  int height = 0;
  int width = 0;
  std::vector<double> r, g, b;

  RgbFrame() = default;
  RgbFrame(int h, int w, double fill = 0.0)
      : height(h),
        width(w),
        r(static_cast<size_t>(h) * w, fill),
        g(static_cast<size_t>(h) * w, fill),
        b(static_cast<size_t>(h) * w, fill) {}

  size_t size() const { return r.size(); }
  void set(int row, int col, double red, double green, double blue) {
    const size_t i = static_cast<size_t>(row) * width + col;
    r[i] = red;
    g[i] = green;
    b[i] = blue;
  }

  void validate() const;
};

struct BorderMask {
  int height = 0;
  int width = 0;
  int thickness = 0;
  std::vector<uint8_t> selected;

  size_t size() const { return selected.size(); }
  bool at(int r, int c) const {
    return selected[static_cast<size_t>(r) * width + c] != 0;
  }
  size_t count() const;
};

}  // namespace bseg
