#include "bseg/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "bseg/errors.h"
#include "bseg/features.h"
#include "bseg/png_io.h"
#include "bseg/random.h"

namespace bseg {
namespace {

struct Color {
  double r, g, b;
};

// One colour per class, shared by every frame of a dataset. Colours are kept
// at least `min_gap` apart so classes stay visually separable.
std::vector<Color> class_palette(const SynthConfig& cfg) {
  Rng rng = Rng::stream(cfg.seed, 0xC010);
  std::vector<Color> out;
  const double min_gap = 90.0;
  while (static_cast<int>(out.size()) < cfg.num_classes) {
    Color c{rng.uniform(20, 235), rng.uniform(20, 235), rng.uniform(20, 235)};
    bool far = true;
    for (int attempt = 0; attempt < 200 && !out.empty(); ++attempt) {
      far = std::all_of(out.begin(), out.end(), [&](const Color& o) {
        return std::hypot(c.r - o.r, c.g - o.g, c.b - o.b) >= min_gap;
      });
      if (far) break;
      c = {rng.uniform(20, 235), rng.uniform(20, 235), rng.uniform(20, 235)};
    }
    out.push_back(c);
  }
  return out;
}

LabelMap draw_shapes(const SynthConfig& cfg, Rng& rng) {
  LabelMap gt(cfg.height, cfg.width, cfg.num_classes, 0);
  const int shapes = rng.range(cfg.min_shapes, cfg.max_shapes);
  for (int s = 0; s < shapes; ++s) {
    const bool rect = cfg.rectangles && (!cfg.circles || rng.bernoulli(0.5));
    const int cls = rng.range(1, cfg.num_classes - 1);
    if (rect) {
      const int h = rng.range(cfg.min_shape_size, cfg.max_shape_size);
      const int w = rng.range(cfg.min_shape_size, cfg.max_shape_size);
      const int top = rng.range(0, cfg.height - h);
      const int left = rng.range(0, cfg.width - w);
      for (int r = top; r < top + h; ++r)
        for (int c = left; c < left + w; ++c) gt.at(r, c) = cls;
    } else {
      const int d = rng.range(cfg.min_shape_size, cfg.max_shape_size);
      const double rad = d / 2.0;
      const int top = rng.range(0, cfg.height - d);
      const int left = rng.range(0, cfg.width - d);
      const double cy = top + rad - 0.5, cx = left + rad - 0.5;
      for (int r = top; r < top + d; ++r)
        for (int c = left; c < left + d; ++c)
          if ((r - cy) * (r - cy) + (c - cx) * (c - cx) <= rad * rad) gt.at(r, c) = cls;
    }
  }
  return gt;
}

LabelMap corrupt(const SynthConfig& cfg, const LabelMap& gt, Rng& rng) {
  LabelMap base = gt;
  const int r = cfg.radius;
  std::set<int> others;
  for (int y = 0; y < gt.height; ++y) {
    for (int x = 0; x < gt.width; ++x) {
      const int own = gt.at(y, x);
      others.clear();
      int hi = own;
      for (int yy = std::max(0, y - r); yy <= std::min(gt.height - 1, y + r); ++yy) {
        for (int xx = std::max(0, x - r); xx <= std::min(gt.width - 1, x + r); ++xx) {
          const int v = gt.at(yy, xx);
          hi = std::max(hi, v);
          if (v != own) others.insert(v);
        }
      }
      if (cfg.corruption == Corruption::kDilate) {
        base.at(y, x) = hi;
      } else if (!others.empty() && rng.bernoulli(cfg.flip_probability)) {
        auto it = others.begin();
        std::advance(it, static_cast<long>(rng.below(others.size())));
        base.at(y, x) = *it;
      }
    }
  }
  return base;
}

}  // namespace

void SynthConfig::validate() const {
  if (frame_count < 0) throw ConfigError("frame count must be >= 0");
  if (height < 16 || width < 16) throw ConfigError("synthetic frames must be at least 16x16");
  if (num_classes < 2 || num_classes > 255) throw ConfigError("num_classes must lie in [2, 255]");
  if (min_shapes < 0 || max_shapes < min_shapes) throw ConfigError("bad shape count range");
  if (!rectangles && !circles) throw ConfigError("no shape kinds enabled");
  if (min_shape_size < 1 || max_shape_size < min_shape_size) {
    throw ConfigError("bad shape size range");
  }
  if (max_shape_size > std::min(height, width)) {
    throw ConfigError("shapes larger than the frame");
  }
  if (radius < 1) throw ConfigError("corruption radius must be >= 1");
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw ConfigError("flip probability must lie in [0, 1]");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  if (extras_channels < 0) throw ConfigError("extras channels must be >= 0");
}

Frame generate_frame(const SynthConfig& cfg, int index) {
  cfg.validate();
  const std::vector<Color> palette = class_palette(cfg);
  Rng rng = Rng::stream(cfg.seed, static_cast<uint64_t>(index) + 1);

  Frame f;
  f.id = cfg.id_prefix + "_" + std::to_string(index);
  f.gt = draw_shapes(cfg, rng);
  f.base = corrupt(cfg, f.gt, rng);

  f.rgb = RgbFrame(cfg.height, cfg.width);
  auto channel = [&](double mean) {
    return std::clamp(std::round(mean + cfg.noise_sigma * rng.normal()), 0.0, 255.0);
  };
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const Color& c = palette[f.gt.at(y, x)];
      const double red = channel(c.r);
      const double green = channel(c.g);
      const double blue = channel(c.b);
      f.rgb.set(y, x, red, green, blue);
    }
  }

  if (cfg.extras_channels > 0) {
    FeatureTensor t;
    t.name = "smooth";
    t.channels = cfg.extras_channels;
    t.height = std::max(1, cfg.height / 4);
    t.width = std::max(1, cfg.width / 4);
    t.data.resize(static_cast<size_t>(t.channels) * t.height * t.width);
    for (float& v : t.data) v = static_cast<float>(rng.normal());
    f.extras.push_back(std::move(t));
  }
  return f;
}

std::vector<FrameRecord> generate(const SynthConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  std::vector<FrameRecord> records;
  for (int i = 0; i < cfg.frame_count; ++i) {
    const Frame f = generate_frame(cfg, i);
    FrameRecord r{f.id, (dir / (f.id + "_rgb.png")).string(),
                  (dir / (f.id + "_base.png")).string(), (dir / (f.id + "_gt.png")).string(),
                  std::nullopt};
    write_rgb_png(r.rgb_path, f.rgb);
    write_label_png(r.base_path, f.base);
    write_label_png(r.gt_path, f.gt);
    if (!f.extras.empty()) {
      const FeatureTensor& t = f.extras.front();
      const std::string tensor_file = f.id + "_smooth.btf";
      write_tensor((dir / tensor_file).string(), t);
      r.extras_manifest = (dir / (f.id + "_extras.txt")).string();
      write_tensor_manifest(*r.extras_manifest,
                            {{t.name, t.channels, t.height, t.width, tensor_file}});
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace bseg
