#ifndef ROCKMORPH_IMGSEG_HPP
#define ROCKMORPH_IMGSEG_HPP

// Color segmentation for aggregate photos on a chromatically distinct
// backdrop: Lab conversion, representative-color detection from the channel
// CDF, color-distance contrast, thresholding, morphological cleaning.

#include <optional>
#include <string>

#include "image.hpp"

namespace rock {

// Per-pixel (L*, a*, b*), each scaled to [0, 1]: L* divided by 100, a*/b*
// min-max scaled per image (constant channels map to 0.5).
struct LabImage {
  int width = 0, height = 0;
  std::vector<float> L, a, b;

  float l_at(int x, int y) const { return L[size_t(y) * size_t(width) + size_t(x)]; }
  float a_at(int x, int y) const { return a[size_t(y) * size_t(width) + size_t(x)]; }
  float b_at(int x, int y) const { return b[size_t(y) * size_t(width) + size_t(x)]; }
};

// sRGB (D65) to CIE L*a*b*, channels rescaled as described on LabImage.
LabImage rgb_to_lab(const ImageRgb8& rgb);

struct RepresentativeColors {
  double background = 0.0;  // value at the larger pixel-mass cluster
  double foreground = 0.0;
};

// Detects the two turning points of the channel CDF (5-bin smoothed second
// difference, peaks at least 10 bins apart, mass-centroid refined).
// Fails with ErrorKind::domain when the histogram has a single cluster.
RepresentativeColors representative_colors(const GrayImage& channel);

// Like representative_colors but never throws on a single cluster: returns
// nullopt and reports the dominant value, so the caller can still use the
// channel as a constant reference.
std::optional<RepresentativeColors> try_representative_colors(const GrayImage& channel,
                                                              double& mono_value);

// d = wa * |a - a0|^gamma + wb * |b - b0|^gamma per pixel. Normalized
// output is min-max scaled to [0, 1]; raw values are available for
// analysis. The weights let a caller drop a channel that carries no
// contrast (min-max scaling blows channel noise up to full range).
GrayImage distance_map(const LabImage& lab, double ref_a, double ref_b, double gamma = 2.0,
                       bool normalize = true, double weight_a = 1.0, double weight_b = 1.0);

enum class ThresholdMethod { fixed, otsu, adaptive };

struct BinarizeParams {
  ThresholdMethod method = ThresholdMethod::otsu;
  double fixed_value = 0.5;
  int adaptive_window = 0;        // 0 = min(width,height)/8
  double adaptive_offset = 0.02;
  int morph_iterations = 2;       // 3x3 box open/close passes
};

// Foreground = pixels <= threshold (distance-to-foreground convention),
// then open, close, fill holes, clear border components, in that order.
// Fails when the cleaned mask has no foreground left.
BinaryMask binarize_and_clean(const GrayImage& gray, const BinarizeParams& params = {});

double otsu_threshold(const GrayImage& gray);

// Morphological helpers (3x3 box structuring element).
BinaryMask erode(const BinaryMask& mask, int iterations = 1);
BinaryMask dilate(const BinaryMask& mask, int iterations = 1);
BinaryMask fill_holes(const BinaryMask& mask);
BinaryMask clear_border(const BinaryMask& mask);

struct SegmentOptions {
  double gamma = 2.0;
  BinarizeParams binarize;
  bool largest_only = false;
  int max_dimension = 1024;  // inputs are downscaled to this working size
};

struct SegmentReport {
  char chosen_channel = 'b';        // 'a' or 'b'
  double ref_a = 0.0, ref_b = 0.0;  // foreground reference color
  double bg_value = 0.0, fg_value = 0.0;  // on the chosen channel
  double threshold = 0.0;
  int component_count = 0;
  size_t foreground_pixels = 0;
};

// Full pipeline: Lab, per-channel representative colors (the channel with
// the larger background/foreground separation drives the choice), distance
// map against the foreground color, threshold, clean.
BinaryMask segment(const ImageRgb8& rgb, const SegmentOptions& options = {},
                   SegmentReport* report = nullptr);

}  // namespace rock

#endif
