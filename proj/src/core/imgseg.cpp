#include "imgseg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rock {

namespace {

constexpr int kBins = 256;
constexpr int kSmoothRadius = 2;    // 5-bin moving average
// Three passes: fewer leave the quantization staircase of 8-bit inputs in
// the second difference, which then peaks at comb steps inside a cluster
// instead of at the cluster entries.
constexpr int kSmoothPasses = 3;
constexpr int kMinPeakGap = 10;     // bins between the two turning points
constexpr int kRefineRadius = 12;   // mass-centroid window around a peak
constexpr double kMinClusterMass = 0.02;  // below this the channel is one cluster

double srgb_to_linear(uint8_t v) {
  double c = v / 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

LabImage rgb_to_lab(const ImageRgb8& rgb) {
  LabImage lab;
  lab.width = rgb.width;
  lab.height = rgb.height;
  size_t n = size_t(rgb.width) * size_t(rgb.height);
  lab.L.resize(n);
  lab.a.resize(n);
  lab.b.resize(n);

  // D65 reference white
  constexpr double Xn = 0.95047, Yn = 1.0, Zn = 1.08883;
  float amin = 1e30f, amax = -1e30f, bmin = 1e30f, bmax = -1e30f;
  for (size_t i = 0; i < n; ++i) {
    double r = srgb_to_linear(rgb.data[i * 3]);
    double g = srgb_to_linear(rgb.data[i * 3 + 1]);
    double b = srgb_to_linear(rgb.data[i * 3 + 2]);
    double X = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    double Z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    double fx = lab_f(X / Xn), fy = lab_f(Y / Yn), fz = lab_f(Z / Zn);
    lab.L[i] = float((116.0 * fy - 16.0) / 100.0);
    lab.a[i] = float(500.0 * (fx - fy));
    lab.b[i] = float(200.0 * (fy - fz));
    amin = std::min(amin, lab.a[i]);
    amax = std::max(amax, lab.a[i]);
    bmin = std::min(bmin, lab.b[i]);
    bmax = std::max(bmax, lab.b[i]);
  }
  auto rescale = [n](std::vector<float>& ch, float lo, float hi) {
    if (hi - lo < 1e-6f) {
      std::fill(ch.begin(), ch.end(), 0.5f);
    } else {
      float inv = 1.0f / (hi - lo);
      for (size_t i = 0; i < n; ++i) ch[i] = (ch[i] - lo) * inv;
    }
  };
  rescale(lab.a, amin, amax);
  rescale(lab.b, bmin, bmax);
  return lab;
}

std::optional<RepresentativeColors> try_representative_colors(const GrayImage& channel,
                                                              double& mono_value) {
  size_t n = channel.data.size();
  if (n == 0) fail(ErrorKind::invalid_argument, "empty channel");

  std::array<double, kBins> hist{};
  for (float v : channel.data) {
    int b = std::clamp(int(v * kBins), 0, kBins - 1);
    hist[size_t(b)] += 1.0;
  }
  for (double& h : hist) h /= double(n);

  // CDF padded with zeros below and ones above, so rises at the extreme
  // bins still show up in the second difference.
  constexpr int kPad = 12;
  constexpr int kExt = kBins + 2 * kPad;
  std::array<double, kExt> smooth{};
  double acc = 0.0;
  for (int i = 0; i < kExt; ++i) {
    int b = i - kPad;
    if (b >= 0 && b < kBins) acc += hist[size_t(b)];
    smooth[size_t(i)] = b < 0 ? 0.0 : (b >= kBins ? 1.0 : acc);
  }
  for (int pass = 0; pass < kSmoothPasses; ++pass) {
    std::array<double, kExt> next{};
    for (int i = 0; i < kExt; ++i) {
      double s = 0.0;
      int count = 0;
      for (int k = -kSmoothRadius; k <= kSmoothRadius; ++k) {
        int j = std::clamp(i + k, 0, kExt - 1);
        s += smooth[size_t(j)];
        ++count;
      }
      next[size_t(i)] = s / count;
    }
    smooth = next;
  }

  // An abrupt CDF rise begins at a positive peak of the second difference.
  std::array<double, kExt> d2{};
  for (int i = 1; i < kExt - 1; ++i)
    d2[size_t(i)] = smooth[size_t(i + 1)] - 2 * smooth[size_t(i)] + smooth[size_t(i - 1)];

  int k1 = -1;
  for (int i = 1; i < kExt - 1; ++i)
    if (k1 < 0 || d2[size_t(i)] > d2[size_t(k1)]) k1 = i;
  int k2 = -1;
  for (int i = 1; i < kExt - 1; ++i) {
    if (std::abs(i - k1) < kMinPeakGap) continue;
    if (k2 < 0 || d2[size_t(i)] > d2[size_t(k2)]) k2 = i;
  }

  // Refine each turning point to the nearby histogram mass centroid, and
  // measure how much pixel mass belongs to it.
  auto refine = [&](int k, double& mass) {
    int b = std::clamp(k - kPad, 0, kBins - 1);
    double wsum = 0.0, vsum = 0.0;
    for (int j = std::max(0, b - kRefineRadius); j <= std::min(kBins - 1, b + kRefineRadius); ++j) {
      wsum += hist[size_t(j)];
      vsum += hist[size_t(j)] * (j + 0.5) / kBins;
    }
    mass = wsum;
    return wsum > 0.0 ? vsum / wsum : (b + 0.5) / double(kBins);
  };

  double mass1 = 0.0, mass2 = 0.0;
  double v1 = refine(k1, mass1);
  double v2 = k2 >= 0 ? refine(k2, mass2) : 0.0;

  // Two peaks riding the same broad cluster refine to nearly the same
  // centroid; treat that as a single cluster.
  bool same_cluster = k2 >= 0 && std::fabs(v1 - v2) * kBins < kMinPeakGap;
  if (k2 < 0 || same_cluster || mass2 < kMinClusterMass || mass1 < kMinClusterMass) {
    mono_value = mass1 >= mass2 ? v1 : v2;
    return std::nullopt;
  }

  RepresentativeColors out;
  // Background owns the larger mass; exact tie goes to the lower value.
  bool first_is_bg = mass1 > mass2 || (mass1 == mass2 && v1 <= v2);
  out.background = first_is_bg ? v1 : v2;
  out.foreground = first_is_bg ? v2 : v1;
  return out;
}

RepresentativeColors representative_colors(const GrayImage& channel) {
  double mono = 0.0;
  auto result = try_representative_colors(channel, mono);
  if (!result)
    fail(ErrorKind::domain, "channel histogram has a single cluster; supply a manual reference");
  return *result;
}

GrayImage distance_map(const LabImage& lab, double ref_a, double ref_b, double gamma,
                       bool normalize, double weight_a, double weight_b) {
  if (gamma < 1.0) fail(ErrorKind::invalid_argument, "gamma must be >= 1");
  GrayImage out(lab.width, lab.height);
  size_t n = out.data.size();
  float lo = 1e30f, hi = -1e30f;
  for (size_t i = 0; i < n; ++i) {
    double d = weight_a * std::pow(std::fabs(double(lab.a[i]) - ref_a), gamma) +
               weight_b * std::pow(std::fabs(double(lab.b[i]) - ref_b), gamma);
    out.data[i] = float(d);
    lo = std::min(lo, out.data[i]);
    hi = std::max(hi, out.data[i]);
  }
  if (normalize) {
    float range = hi - lo;
    if (range > 1e-20f)
      for (float& v : out.data) v = (v - lo) / range;
    else
      std::fill(out.data.begin(), out.data.end(), 0.f);
  }
  return out;
}

double otsu_threshold(const GrayImage& gray) {
  std::array<double, kBins> hist{};
  for (float v : gray.data) hist[size_t(std::clamp(int(v * kBins), 0, kBins - 1))] += 1.0;
  double total = double(gray.data.size());
  double sum_all = 0.0;
  for (int i = 0; i < kBins; ++i) sum_all += i * hist[size_t(i)];

  double best_var = -1.0;
  int best_cut = kBins / 2;
  double w0 = 0.0, sum0 = 0.0;
  for (int cut = 0; cut < kBins - 1; ++cut) {
    w0 += hist[size_t(cut)];
    sum0 += cut * hist[size_t(cut)];
    double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best_var) {
      best_var = between;
      best_cut = cut;
    }
  }
  return (best_cut + 1) / double(kBins);  // foreground = values <= threshold
}

namespace {

BinaryMask morph_pass(const BinaryMask& mask, bool erode_pass) {
  BinaryMask out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      bool hit = erode_pass;
      for (int dy = -1; dy <= 1 && hit == erode_pass; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          int px = x + dx, py = y + dy;
          bool in_frame = px >= 0 && py >= 0 && px < mask.width && py < mask.height;
          // Border-replicate: erosion must not eat blobs off the frame edge
          // (clear_border relies on genuine border contact surviving).
          bool v = in_frame ? mask.at(px, py) : erode_pass;
          if (erode_pass && !v) {
            hit = false;
            break;
          }
          if (!erode_pass && v) {
            hit = true;
            break;
          }
        }
      out.set(x, y, hit);
    }
  out.scale = mask.scale;
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int iterations) {
  BinaryMask out = mask;
  for (int i = 0; i < iterations; ++i) out = morph_pass(out, true);
  return out;
}

BinaryMask dilate(const BinaryMask& mask, int iterations) {
  BinaryMask out = mask;
  for (int i = 0; i < iterations; ++i) out = morph_pass(out, false);
  return out;
}

BinaryMask fill_holes(const BinaryMask& mask) {
  // Flood the background from the border; anything unreached is a hole.
  BinaryMask reached(mask.width, mask.height);
  std::vector<std::pair<int, int>> stack;
  auto push = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= mask.width || y >= mask.height) return;
    if (mask.at(x, y) || reached.at(x, y)) return;
    reached.set(x, y, true);
    stack.push_back({x, y});
  };
  for (int x = 0; x < mask.width; ++x) {
    push(x, 0);
    push(x, mask.height - 1);
  }
  for (int y = 0; y < mask.height; ++y) {
    push(0, y);
    push(mask.width - 1, y);
  }
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    push(x + 1, y);
    push(x - 1, y);
    push(x, y + 1);
    push(x, y - 1);
  }
  BinaryMask out(mask.width, mask.height);
  for (size_t i = 0; i < mask.data.size(); ++i)
    out.data[i] = (mask.data[i] || !reached.data[i]) ? 1 : 0;
  out.scale = mask.scale;
  return out;
}

BinaryMask clear_border(const BinaryMask& mask) {
  int n = 0;
  std::vector<int> labels = label_components(mask, n);
  std::vector<bool> touches(size_t(n) + 1, false);
  for (int x = 0; x < mask.width; ++x) {
    touches[size_t(labels[size_t(x)])] = true;
    touches[size_t(labels[size_t(mask.height - 1) * size_t(mask.width) + size_t(x)])] = true;
  }
  for (int y = 0; y < mask.height; ++y) {
    touches[size_t(labels[size_t(y) * size_t(mask.width)])] = true;
    touches[size_t(labels[size_t(y) * size_t(mask.width) + size_t(mask.width - 1)])] = true;
  }
  BinaryMask out(mask.width, mask.height);
  for (size_t i = 0; i < mask.data.size(); ++i)
    out.data[i] = (labels[i] != 0 && !touches[size_t(labels[i])]) ? 1 : 0;
  out.scale = mask.scale;
  return out;
}

BinaryMask binarize_and_clean(const GrayImage& gray, const BinarizeParams& params) {
  BinaryMask mask(gray.width, gray.height);
  if (params.method == ThresholdMethod::fixed || params.method == ThresholdMethod::otsu) {
    double thr = params.method == ThresholdMethod::fixed ? params.fixed_value : otsu_threshold(gray);
    for (size_t i = 0; i < gray.data.size(); ++i) mask.data[i] = gray.data[i] <= thr ? 1 : 0;
  } else {
    int win = params.adaptive_window > 0 ? params.adaptive_window
                                         : std::max(3, std::min(gray.width, gray.height) / 8);
    int r = win / 2;
    // Summed-area table for local means.
    std::vector<double> sat(size_t(gray.width + 1) * size_t(gray.height + 1), 0.0);
    auto sat_at = [&](int x, int y) -> double& {
      return sat[size_t(y) * size_t(gray.width + 1) + size_t(x)];
    };
    for (int y = 0; y < gray.height; ++y)
      for (int x = 0; x < gray.width; ++x)
        sat_at(x + 1, y + 1) = gray.at(x, y) + sat_at(x, y + 1) + sat_at(x + 1, y) - sat_at(x, y);
    for (int y = 0; y < gray.height; ++y)
      for (int x = 0; x < gray.width; ++x) {
        int x0 = std::max(0, x - r), x1 = std::min(gray.width - 1, x + r);
        int y0 = std::max(0, y - r), y1 = std::min(gray.height - 1, y + r);
        double area = double(x1 - x0 + 1) * double(y1 - y0 + 1);
        double mean = (sat_at(x1 + 1, y1 + 1) - sat_at(x0, y1 + 1) - sat_at(x1 + 1, y0) +
                       sat_at(x0, y0)) / area;
        mask.set(x, y, gray.at(x, y) <= mean - params.adaptive_offset);
      }
  }

  mask = dilate(erode(mask, params.morph_iterations), params.morph_iterations);   // open
  mask = erode(dilate(mask, params.morph_iterations), params.morph_iterations);   // close
  mask = fill_holes(mask);
  mask = clear_border(mask);
  if (mask.empty_foreground())
    fail(ErrorKind::domain, "no foreground left after thresholding and cleaning");
  return mask;
}

BinaryMask segment(const ImageRgb8& rgb, const SegmentOptions& options, SegmentReport* report) {
  ImageRgb8 working = rgb;
  if (options.max_dimension > 0 && std::max(rgb.width, rgb.height) > options.max_dimension) {
    double s = double(options.max_dimension) / std::max(rgb.width, rgb.height);
    working = resize_bilinear(rgb, std::max(1, int(rgb.width * s + 0.5)),
                              std::max(1, int(rgb.height * s + 0.5)));
  }

  LabImage lab = rgb_to_lab(working);
  GrayImage chan_a{lab.width, lab.height};
  GrayImage chan_b{lab.width, lab.height};
  chan_a.data = lab.a;
  chan_b.data = lab.b;

  double mono_a = 0.5, mono_b = 0.5;
  auto rep_a = try_representative_colors(chan_a, mono_a);
  auto rep_b = try_representative_colors(chan_b, mono_b);

  // A channel joins the color distance only when its clusters are genuinely
  // apart; min-max rescaling stretches a contrast-free channel's noise over
  // the whole [0, 1] range and would drown the informative one.
  constexpr double kMinChannelSeparation = 0.15;
  double sep_a = rep_a ? std::fabs(rep_a->foreground - rep_a->background) : 0.0;
  double sep_b = rep_b ? std::fabs(rep_b->foreground - rep_b->background) : 0.0;
  bool a_usable = rep_a && sep_a >= kMinChannelSeparation;
  bool b_usable = rep_b && sep_b >= kMinChannelSeparation;
  if (!a_usable && !b_usable)
    fail(ErrorKind::domain, "no foreground/background contrast in either color channel");
  bool use_a = sep_a >= sep_b;

  double ref_a = rep_a ? rep_a->foreground : mono_a;
  double ref_b = rep_b ? rep_b->foreground : mono_b;

  GrayImage dist = distance_map(lab, ref_a, ref_b, options.gamma, true, a_usable ? 1.0 : 0.0,
                                b_usable ? 1.0 : 0.0);
  BinarizeParams bp = options.binarize;
  BinaryMask mask = binarize_and_clean(dist, bp);
  if (options.largest_only) mask = largest_component(mask);

  if (report) {
    report->chosen_channel = use_a ? 'a' : 'b';
    report->ref_a = ref_a;
    report->ref_b = ref_b;
    const auto& rep = use_a ? rep_a : rep_b;
    report->bg_value = rep ? rep->background : (use_a ? mono_a : mono_b);
    report->fg_value = rep ? rep->foreground : (use_a ? mono_a : mono_b);
    report->threshold = bp.method == ThresholdMethod::fixed ? bp.fixed_value
                        : bp.method == ThresholdMethod::otsu ? otsu_threshold(dist)
                                                             : -1.0;
    int n = 0;
    label_components(mask, n);
    report->component_count = n;
    report->foreground_pixels = mask.area();
  }
  return mask;
}

}  // namespace rock
