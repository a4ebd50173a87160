#include "bseg/png_io.h"

#include <png.h>

#include <cmath>
#include <cstring>
#include <vector>

namespace bseg {
namespace {

struct Decoded {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;
};

Decoded read_png(const std::string& path, png_uint_32 format, int channels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DataError("cannot read PNG '" + path + "': " + image.message);
  }
  image.format = format;
  Decoded out;
  out.height = static_cast<int>(image.height);
  out.width = static_cast<int>(image.width);
  out.pixels.resize(static_cast<size_t>(out.height) * out.width * channels);
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError("cannot decode PNG '" + path + "': " + image.message);
  }
  return out;
}

void write_png(const std::string& path, int height, int width, png_uint_32 format,
               const std::vector<uint8_t>& pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw DataError("cannot write PNG '" + path + "': " + image.message);
  }
}

}  // namespace

LabelMap read_label_png(const std::string& path, int num_classes,
                        std::optional<int> void_label) {
  Decoded d = read_png(path, PNG_FORMAT_GRAY, 1);
  LabelMap m(d.height, d.width, num_classes, 0, void_label);
  for (size_t i = 0; i < m.size(); ++i) m.labels[i] = d.pixels[i];
  m.validate();
  return m;
}

void write_label_png(const std::string& path, const LabelMap& labels) {
  std::vector<uint8_t> px(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    const int v = labels.labels[i];
    if (v < 0 || v > 255) throw DataError("label does not fit in 8 bits");
    px[i] = static_cast<uint8_t>(v);
  }
  write_png(path, labels.height, labels.width, PNG_FORMAT_GRAY, px);
}

RgbFrame read_rgb_png(const std::string& path) {
  Decoded d = read_png(path, PNG_FORMAT_RGB, 3);
  RgbFrame f(d.height, d.width);
  for (size_t i = 0; i < f.size(); ++i) {
    f.r[i] = d.pixels[3 * i];
    f.g[i] = d.pixels[3 * i + 1];
    f.b[i] = d.pixels[3 * i + 2];
  }
  return f;
}

void write_rgb_png(const std::string& path, const RgbFrame& frame) {
  frame.validate();
  std::vector<uint8_t> px(frame.size() * 3);
  auto q = [](double v) { return static_cast<uint8_t>(std::lround(v)); };
  for (size_t i = 0; i < frame.size(); ++i) {
    px[3 * i] = q(frame.r[i]);
    px[3 * i + 1] = q(frame.g[i]);
    px[3 * i + 2] = q(frame.b[i]);
  }
  write_png(path, frame.height, frame.width, PNG_FORMAT_RGB, px);
}

void write_mask_png(const std::string& path, const BorderMask& mask) {
  std::vector<uint8_t> px(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) px[i] = mask.selected[i] ? 255 : 0;
  write_png(path, mask.height, mask.width, PNG_FORMAT_GRAY, px);
}

BorderMask read_mask_png(const std::string& path, int thickness) {
  Decoded d = read_png(path, PNG_FORMAT_GRAY, 1);
  BorderMask m;
  m.height = d.height;
  m.width = d.width;
  m.thickness = thickness;
  m.selected.resize(d.pixels.size());
  for (size_t i = 0; i < d.pixels.size(); ++i) m.selected[i] = d.pixels[i] != 0;
  return m;
}

}  // namespace bseg
