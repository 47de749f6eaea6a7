#ifndef ROCKMORPH_IMAGE_HPP
#define ROCKMORPH_IMAGE_HPP

// Raster types and file IO: PNG/JPEG/PPM decode for input photographs,
// PGM (P5) masks as the interchange format for silhouettes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace rock {

struct ImageRgb8 {
  int width = 0, height = 0;
  std::vector<uint8_t> data;  // rgbrgb..., row-major

  ImageRgb8() = default;
  ImageRgb8(int w, int h) : width(w), height(h), data(size_t(w) * size_t(h) * 3, 0) {}

  uint8_t* px(int x, int y) { return &data[(size_t(y) * size_t(width) + size_t(x)) * 3]; }
  const uint8_t* px(int x, int y) const { return &data[(size_t(y) * size_t(width) + size_t(x)) * 3]; }
};

// Single channel, values in [0, 1].
struct GrayImage {
  int width = 0, height = 0;
  std::vector<float> data;

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 0.f)
      : width(w), height(h), data(size_t(w) * size_t(h), fill) {}

  float at(int x, int y) const { return data[size_t(y) * size_t(width) + size_t(x)]; }
  float& at(int x, int y) { return data[size_t(y) * size_t(width) + size_t(x)]; }
};

struct BinaryMask {
  int width = 0, height = 0;
  std::vector<uint8_t> data;              // 0 or 1
  std::optional<double> scale;            // length units per pixel, when calibrated

  BinaryMask() = default;
  BinaryMask(int w, int h, uint8_t fill = 0)
      : width(w), height(h), data(size_t(w) * size_t(h), fill) {}

  bool at(int x, int y) const { return data[size_t(y) * size_t(width) + size_t(x)] != 0; }
  void set(int x, int y, bool v) { data[size_t(y) * size_t(width) + size_t(x)] = v ? 1 : 0; }
  size_t area() const;
  bool empty_foreground() const { return area() == 0; }
};

// Decoders dispatch on file signature, not extension (PNG, JPEG, PPM P6).
ImageRgb8 load_image(const std::string& path);

// PGM P5: 255 = foreground, 0 = background.
void save_mask_pgm(const BinaryMask& mask, const std::string& path);
BinaryMask load_mask_pgm(const std::string& path);

void save_gray_pgm(const GrayImage& img, const std::string& path);

ImageRgb8 resize_bilinear(const ImageRgb8& img, int new_w, int new_h);
BinaryMask resize_nearest(const BinaryMask& mask, int new_w, int new_h);

// Connected-component labeling (8-connected). Returns label map (0 =
// background, 1..n = components) and sets n_components.
std::vector<int> label_components(const BinaryMask& mask, int& n_components);

BinaryMask largest_component(const BinaryMask& mask);

// True when any foreground pixel lies on the image border. Particles cut
// off by the frame are excluded from morphological analysis by default.
bool touches_border(const BinaryMask& mask);

// Pixelwise intersection-over-union of two equal-size masks. Two empty
// masks count as identical.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

}  // namespace rock

#endif
