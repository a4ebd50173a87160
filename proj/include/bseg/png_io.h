#pragma once

#include <optional>
#include <string>

#include "bseg/image.h"

namespace bseg {

// 8-bit single channel, pixel value = class index. `num_classes` and
// `void_label` are not stored in the file and must be supplied.
LabelMap read_label_png(const std::string& path, int num_classes,
                        std::optional<int> void_label = std::nullopt);
void write_label_png(const std::string& path, const LabelMap& labels);

// 24-bit RGB. Grey and RGBA inputs are converted on read.
RgbFrame read_rgb_png(const std::string& path);
void write_rgb_png(const std::string& path, const RgbFrame& frame);

// Selected pixels are written as 255, others as 0. Any nonzero value reads
// back as selected.
void write_mask_png(const std::string& path, const BorderMask& mask);
BorderMask read_mask_png(const std::string& path, int thickness);

}  // namespace bseg
