#pragma once

#include <iosfwd>
#include <string>

#include "bseg/gcn.h"

namespace bseg {

// BGM1 layout, little-endian:
//   "BGM1"
//   u32 input_dim, u32 num_classes, u32 num_hidden, u32 hidden[num_hidden]
//   f64 dropout, l2, learning_rate, beta1, beta2, epsilon
//   u32 seed, u32 step
//   per layer: f32 weight (in x out, row-major), f32 bias (out)
//
// Adam moments are not stored; a loaded model resumes with zero moments.
// Parameters are stored as f32, so load(save(m)) is m rounded to f32 and
// save(load(file)) reproduces the file byte for byte.
void save_model(std::ostream& out, const GcnModel& model);
void save_model(const std::string& path, const GcnModel& model);
GcnModel load_model(std::istream& in);
GcnModel load_model(const std::string& path);

// The model as it would be after a save / load cycle.
GcnModel round_trip(const GcnModel& model);

}  // namespace bseg
