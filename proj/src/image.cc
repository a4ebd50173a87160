#include "bseg/image.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace bseg {

void LabelMap::validate() const {
  if (height <= 0 || width <= 0) throw DataError("label map is empty");
  if (labels.size() != static_cast<size_t>(height) * width) {
    throw DataError("label map size does not match height x width");
  }
  if (num_classes <= 0) throw DataError("label map has no classes");
  for (int v : labels) {
    if (v < 0 || (v >= num_classes && !is_void(v))) {
      throw DataError("label " + std::to_string(v) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    }
  }
}

void RgbFrame::validate() const {
  if (height <= 0 || width <= 0) throw DataError("frame is empty");
  const size_t n = static_cast<size_t>(height) * width;
  if (r.size() != n || g.size() != n || b.size() != n) {
    throw DataError("frame plane size does not match height x width");
  }
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 255.0; };
  if (!std::all_of(r.begin(), r.end(), ok) ||
      !std::all_of(g.begin(), g.end(), ok) ||
      !std::all_of(b.begin(), b.end(), ok)) {
    throw DataError("frame intensity outside [0, 255]");
  }
}

size_t BorderMask::count() const {
  return static_cast<size_t>(
      std::count_if(selected.begin(), selected.end(), [](uint8_t v) { return v != 0; }));
}

}  // namespace bseg
