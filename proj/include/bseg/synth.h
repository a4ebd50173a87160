#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bseg/pipeline.h"

namespace bseg {

enum class Corruption {
  kDilate,  // base = max label within Chebyshev radius r (grows higher classes)
  kFlip,    // near-border pixels take a neighbouring class with probability p
};

struct SynthConfig {
  int frame_count = 10;
  int height = 64;
  int width = 64;
  int num_classes = 4;
  int min_shapes = 2;
  int max_shapes = 5;
  int min_shape_size = 8;
  int max_shape_size = 28;
  bool rectangles = true;
  bool circles = true;
  Corruption corruption = Corruption::kFlip;
  int radius = 2;
  double flip_probability = 0.4;
  double noise_sigma = 12.0;
  // Random smooth fields at quarter resolution, exported as an extras tensor.
  int extras_channels = 0;
  uint64_t seed = 0;
  std::string id_prefix = "frame";

  void validate() const;
};

// Frame `index` of the dataset described by `cfg`. Independent of the other
// frames, so frames may be generated in any order.
Frame generate_frame(const SynthConfig& cfg, int index);

// Writes <id>_rgb.png, <id>_base.png, <id>_gt.png (and <id>_extras.txt plus
// <id>_smooth.btf when extras are enabled) into `out_dir` and returns the
// records.
std::vector<FrameRecord> generate(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace bseg
