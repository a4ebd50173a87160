#include "bseg/features.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bseg/binary_io.h"
#include "bseg/errors.h"

namespace bseg {

void FeatureTensor::validate() const {
  if (channels <= 0 || height <= 0 || width <= 0) {
    throw DataError("feature tensor '" + name + "' has empty dimensions");
  }
  if (data.size() != static_cast<size_t>(channels) * height * width) {
    throw DataError("feature tensor '" + name + "' payload size mismatch");
  }
  if (!std::all_of(data.begin(), data.end(), [](float v) { return std::isfinite(v); })) {
    throw DataError("feature tensor '" + name + "' has non-finite values");
  }
}

FeatureTensor upsample_bilinear(const FeatureTensor& t, int target_h, int target_w) {
  if (target_h < t.height || target_w < t.width) {
    throw DataError("upsample_bilinear cannot downsample '" + t.name + "'");
  }
  if (target_h == t.height && target_w == t.width) return t;

  FeatureTensor out;
  out.name = t.name;
  out.channels = t.channels;
  out.height = target_h;
  out.width = target_w;
  out.data.resize(static_cast<size_t>(t.channels) * target_h * target_w);

  // Source coordinate of output index i, clamped below at 0.
  auto axis = [](int out_size, int in_size, std::vector<int>& lo,
                 std::vector<int>& hi, std::vector<double>& frac) {
    const double scale = static_cast<double>(in_size) / out_size;
    lo.resize(out_size);
    hi.resize(out_size);
    frac.resize(out_size);
    for (int i = 0; i < out_size; ++i) {
      const double src = std::max(0.0, (i + 0.5) * scale - 0.5);
      const int i0 = std::min(static_cast<int>(src), in_size - 1);
      lo[i] = i0;
      hi[i] = std::min(i0 + 1, in_size - 1);
      frac[i] = src - i0;
    }
  };
  std::vector<int> y0, y1, x0, x1;
  std::vector<double> fy, fx;
  axis(target_h, t.height, y0, y1, fy);
  axis(target_w, t.width, x0, x1, fx);

  for (int c = 0; c < t.channels; ++c) {
    for (int r = 0; r < target_h; ++r) {
      for (int col = 0; col < target_w; ++col) {
        const double top = (1.0 - fx[col]) * t.at(c, y0[r], x0[col]) +
                           fx[col] * t.at(c, y0[r], x1[col]);
        const double bottom = (1.0 - fx[col]) * t.at(c, y1[r], x0[col]) +
                              fx[col] * t.at(c, y1[r], x1[col]);
        out.data[(static_cast<size_t>(c) * target_h + r) * target_w + col] =
            static_cast<float>((1.0 - fy[r]) * top + fy[r] * bottom);
      }
    }
  }
  return out;
}

FeatureMatrix assemble(const RgbFrame& frame, const LabelMap& base_pred,
                       const std::vector<FeatureTensor>& extras,
                       const std::vector<std::string>& spec) {
  frame.validate();
  base_pred.validate();
  if (frame.height != base_pred.height || frame.width != base_pred.width) {
    throw DataError("frame and base prediction dimensions differ");
  }
  if (spec.empty()) throw ConfigError("feature spec is empty");

  const size_t n = frame.size();
  std::vector<const FeatureTensor*> resolved(spec.size(), nullptr);
  int total = 0;
  for (size_t s = 0; s < spec.size(); ++s) {
    if (spec[s] == kIntensityFeature) {
      total += 3;
    } else if (spec[s] == kBaseFeature) {
      total += 1;
    } else {
      auto it = std::find_if(extras.begin(), extras.end(),
                             [&](const FeatureTensor& t) { return t.name == spec[s]; });
      if (it == extras.end()) throw ConfigError("unknown feature name '" + spec[s] + "'");
      it->validate();
      resolved[s] = &*it;
      total += it->channels;
    }
  }

  FeatureMatrix fm;
  fm.data.resize(static_cast<Eigen::Index>(n), total);
  int col = 0;
  for (size_t s = 0; s < spec.size(); ++s) {
    if (spec[s] == kIntensityFeature) {
      for (size_t i = 0; i < n; ++i) {
        fm.data(i, col) = frame.r[i] / 255.0;
        fm.data(i, col + 1) = frame.g[i] / 255.0;
        fm.data(i, col + 2) = frame.b[i] / 255.0;
      }
      fm.manifest.push_back({spec[s], col, 3});
      col += 3;
    } else if (spec[s] == kBaseFeature) {
      const double denom = base_pred.num_classes > 1 ? base_pred.num_classes - 1 : 1;
      for (size_t i = 0; i < n; ++i) {
        const int label = base_pred.labels[i];
        if (base_pred.is_void(label)) throw DataError("base prediction contains void labels");
        fm.data(i, col) = label / denom;
      }
      fm.manifest.push_back({spec[s], col, 1});
      col += 1;
    } else {
      const FeatureTensor up = upsample_bilinear(*resolved[s], frame.height, frame.width);
      for (int c = 0; c < up.channels; ++c) {
        const float* plane = up.data.data() + static_cast<size_t>(c) * n;
        const auto [mn, mx] = std::minmax_element(plane, plane + n);
        if (*mn == *mx) {
          for (size_t i = 0; i < n; ++i) fm.data(i, col + c) = 0.0;
          continue;
        }
        double mean = 0.0;
        for (size_t i = 0; i < n; ++i) mean += plane[i];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (size_t i = 0; i < n; ++i) var += (plane[i] - mean) * (plane[i] - mean);
        var /= static_cast<double>(n);
        const double inv_std = 1.0 / std::sqrt(var);
        for (size_t i = 0; i < n; ++i) fm.data(i, col + c) = (plane[i] - mean) * inv_std;
      }
      fm.manifest.push_back({spec[s], col, up.channels});
      col += up.channels;
    }
  }
  if (!fm.data.allFinite()) throw DataError("assembled features are not finite");
  return fm;
}

std::vector<std::string> parse_feature_spec(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty feature spec '" + text + "'");
  return out;
}

void write_tensor(std::ostream& out, const FeatureTensor& t) {
  t.validate();
  binio::put_magic(out, "BTF1");
  binio::put_uint<uint32_t>(out, 3);
  binio::put_uint<uint32_t>(out, static_cast<uint32_t>(t.channels));
  binio::put_uint<uint32_t>(out, static_cast<uint32_t>(t.height));
  binio::put_uint<uint32_t>(out, static_cast<uint32_t>(t.width));
  for (float v : t.data) binio::put_f32(out, v);
  if (!out) throw DataError("failed writing tensor '" + t.name + "'");
}

void write_tensor(const std::string& path, const FeatureTensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_tensor(out, t);
}

FeatureTensor read_tensor(std::istream& in, std::string name) {
  binio::expect_magic(in, "BTF1");
  const uint32_t rank = binio::get_uint<uint32_t>(in);
  if (rank != 2 && rank != 3) throw DataError("BTF1 rank must be 2 or 3");
  std::vector<uint32_t> dims(rank);
  for (auto& d : dims) d = binio::get_uint<uint32_t>(in);
  FeatureTensor t;
  t.name = std::move(name);
  t.channels = rank == 3 ? static_cast<int>(dims[0]) : 1;
  t.height = static_cast<int>(dims[rank - 2]);
  t.width = static_cast<int>(dims[rank - 1]);
  t.data.resize(static_cast<size_t>(t.channels) * t.height * t.width);
  for (auto& v : t.data) v = binio::get_f32(in);
  t.validate();
  return t;
}

FeatureTensor read_tensor(const std::string& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_tensor(in, std::move(name));
}

std::vector<TensorManifestEntry> read_tensor_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tensor manifest '" + path + "'");
  std::vector<TensorManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    TensorManifestEntry e;
    if (!(ls >> e.name >> e.channels >> e.height >> e.width >> e.filename)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed manifest line");
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_tensor_manifest(const std::string& path,
                           const std::vector<TensorManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  for (const auto& e : entries) {
    out << e.name << ' ' << e.channels << ' ' << e.height << ' ' << e.width << ' '
        << e.filename << '\n';
  }
}

std::vector<FeatureTensor> load_extras(const std::string& manifest_path) {
  const auto dir = std::filesystem::path(manifest_path).parent_path();
  std::vector<FeatureTensor> out;
  for (const auto& e : read_tensor_manifest(manifest_path)) {
    FeatureTensor t = read_tensor((dir / e.filename).string(), e.name);
    if (t.channels != e.channels || t.height != e.height || t.width != e.width) {
      throw DataError("tensor '" + e.name + "' header disagrees with manifest");
    }
    out.push_back(std::move(t));
  }
  return out;
}

FeatureTensor to_tensor(const FeatureMatrix& m, int height, int width, std::string name) {
  if (m.num_nodes() != static_cast<Eigen::Index>(height) * width) {
    throw DataError("feature matrix rows do not match height x width");
  }
  FeatureTensor t;
  t.name = std::move(name);
  t.channels = static_cast<int>(m.num_features());
  t.height = height;
  t.width = width;
  t.data.resize(static_cast<size_t>(m.data.size()));
  const size_t n = static_cast<size_t>(height) * width;
  for (int c = 0; c < t.channels; ++c) {
    for (size_t i = 0; i < n; ++i) t.data[c * n + i] = static_cast<float>(m.data(i, c));
  }
  return t;
}

}  // namespace bseg
