#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bseg/image.h"
#include "bseg/linalg.h"

namespace bseg {

/// A channel-major activation tensor, typically an intermediate layer of the
/// base network. May be coarser than the frame.
struct FeatureTensor {
  std::string name;
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  float at(int c, int r, int col) const {
    return data[(static_cast<size_t>(c) * height + r) * width + col];
  }
  void validate() const;
};

struct FeatureSpan {
  std::string name;
  int offset = 0;
  int channels = 0;
};

/// Dense N x F node features, one row per pixel in row-major order.
struct FeatureMatrix {
  Matrix data;
  std::vector<FeatureSpan> manifest;

  Eigen::Index num_nodes() const { return data.rows(); }
  Eigen::Index num_features() const { return data.cols(); }
};

// Feature names understood besides the extras: RGB intensities and the base
// prediction.
inline constexpr const char* kIntensityFeature = "I";
inline constexpr const char* kBaseFeature = "base";

// Concatenates the requested features in `spec` order.
//   "I"    3 channels, RGB / 255
//   "base" 1 channel, class index / (num_classes - 1)
//   other  an extras tensor by name, bilinearly upsampled to frame size and
//          standardized per channel (constant channels become zero)
FeatureMatrix assemble(const RgbFrame& frame, const LabelMap& base_pred,
                       const std::vector<FeatureTensor>& extras,
                       const std::vector<std::string>& spec);

// Bilinear resize with half-pixel centres (align_corners = false). Only
// upsampling is supported.
FeatureTensor upsample_bilinear(const FeatureTensor& t, int target_h, int target_w);

// Parses "base,I,d5" into a name list.
std::vector<std::string> parse_feature_spec(const std::string& text);

// BTF1: "BTF1", u32 rank, u32 dims[rank], f32 payload. Rank 3 is
// (channels, height, width); rank 2 reads as a single channel.
void write_tensor(std::ostream& out, const FeatureTensor& t);
void write_tensor(const std::string& path, const FeatureTensor& t);
FeatureTensor read_tensor(std::istream& in, std::string name = {});
FeatureTensor read_tensor(const std::string& path, std::string name = {});

struct TensorManifestEntry {
  std::string name;
  int channels = 0;
  int height = 0;
  int width = 0;
  std::string filename;  // relative to the manifest's directory
};

// Sidecar manifest, one "name channels height width filename" line per tensor.
std::vector<TensorManifestEntry> read_tensor_manifest(const std::string& path);
void write_tensor_manifest(const std::string& path,
                           const std::vector<TensorManifestEntry>& entries);

// Loads every tensor listed in a manifest and checks its header against the
// manifest line.
std::vector<FeatureTensor> load_extras(const std::string& manifest_path);

// Writes the matrix as a (F, H, W) tensor.
FeatureTensor to_tensor(const FeatureMatrix& m, int height, int width,
                        std::string name = "features");

}  // namespace bseg
