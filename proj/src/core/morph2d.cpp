#include "morph2d.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace rock {

double calibrate_scale(const BinaryMask& ball_mask, double ball_diameter) {
  if (ball_diameter <= 0.0) fail(ErrorKind::invalid_argument, "ball diameter must be positive");
  size_t area = ball_mask.area();
  if (area == 0) fail(ErrorKind::domain, "calibration ball mask is empty");
  int n = 0;
  label_components(ball_mask, n);
  if (n != 1) fail(ErrorKind::domain, "calibration ball mask must be a single component");
  double equiv_diameter_px = 2.0 * std::sqrt(double(area) / kPi);
  return ball_diameter / equiv_diameter_px;
}

// ---------------------------------------------------------------------------
// Feret calipers over the convex hull of pixel corners.

namespace {

std::vector<Vec2> pixel_corner_hull(const BinaryMask& mask) {
  // Boundary pixels contribute their four corners; interior pixels cannot be
  // hull vertices.
  std::vector<Vec2> pts;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      bool boundary = x == 0 || y == 0 || x == mask.width - 1 || y == mask.height - 1 ||
                      !mask.at(x - 1, y) || !mask.at(x + 1, y) || !mask.at(x, y - 1) ||
                      !mask.at(x, y + 1);
      if (!boundary) continue;
      pts.push_back({double(x), double(y)});
      pts.push_back({double(x + 1), double(y)});
      pts.push_back({double(x), double(y + 1)});
      pts.push_back({double(x + 1), double(y + 1)});
    }
  if (pts.empty()) return pts;
  // Andrew monotone chain.
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], *it - hull[k - 2]) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

double caliper_width(const std::vector<Vec2>& hull, double angle) {
  Vec2 u{std::cos(angle), std::sin(angle)};
  double lo = 1e300, hi = -1e300;
  for (const Vec2& p : hull) {
    double d = dot(p, u);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return hi - lo;
}

}  // namespace

FeretResult feret(const BinaryMask& mask) {
  size_t area = mask.area();
  if (area == 0) fail(ErrorKind::domain, "feret on an empty mask");
  if (area == 1) return {1.0, 1.0, 1.0, 0.0};  // single pixel: FER 1 by convention

  std::vector<Vec2> hull = pixel_corner_hull(mask);
  // Coarse sweep. Caliper widths have period pi.
  double best_w = -1.0, best_angle = 0.0;
  for (int d = 0; d < 180; ++d) {
    double angle = deg2rad(double(d));
    double w = caliper_width(hull, angle);
    if (w > best_w) {
      best_w = w;
      best_angle = angle;
    }
  }
  // Golden-section refinement around the best coarse direction.
  constexpr double phi = 0.6180339887498949;
  double a = best_angle - deg2rad(1.0), b = best_angle + deg2rad(1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = caliper_width(hull, x1), f2 = caliper_width(hull, x2);
  for (int it = 0; it < 40; ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = caliper_width(hull, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = caliper_width(hull, x2);
    }
  }
  double angle = f1 > f2 ? x1 : x2;
  FeretResult out;
  out.l_max = caliper_width(hull, angle);
  out.l_min = caliper_width(hull, angle + kPi / 2.0);
  out.angle_rad = angle;
  if (out.l_min <= 0.0) out.l_min = out.l_max > 0 ? out.l_max : 1.0;
  out.fer2d = std::max(1.0, out.l_max / out.l_min);
  return out;
}

double esd(const BinaryMask& mask, double scale) {
  size_t area = mask.area();
  if (area == 0) fail(ErrorKind::domain, "esd on an empty mask");
  return 2.0 * scale * std::sqrt(double(area) / kPi);
}

// ---------------------------------------------------------------------------
// Contour perimeter (marching squares + corner-cut smoothing)

namespace {

constexpr int kSmoothWindow = 5;
constexpr int kSmoothPasses = 1;

// Extracts the outer boundary polygons of the mask by walking the cracks
// between foreground and background pixels. Vertices sit on the pixel grid;
// smoothing afterwards removes the staircase bias.
std::vector<std::vector<Vec2>> crack_contours(const BinaryMask& mask) {
  auto at = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < mask.width && y < mask.height && mask.at(x, y);
  };
  // Directed crack edges: foreground kept on the left of travel.
  // Key: corner (x, y) packed; value: list of next corners.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> next;
  for (int y = 0; y <= mask.height; ++y)
    for (int x = 0; x <= mask.width; ++x) {
      // Horizontal crack between (x,y-1) above and (x,y) below, from corner
      // (x,y) to (x+1,y) or reverse.
      if (x < mask.width) {
        bool below = at(x, y), above = at(x, y - 1);
        if (below && !above) next[{x, y}].push_back({x + 1, y});
        if (above && !below) next[{x + 1, y}].push_back({x, y});
      }
      if (y < mask.height) {
        bool left = at(x - 1, y), right = at(x, y);
        if (right && !left) next[{x, y + 1}].push_back({x, y});
        if (left && !right) next[{x, y}].push_back({x, y + 1});
      }
    }
  std::vector<std::vector<Vec2>> contours;
  while (!next.empty()) {
    auto start = next.begin()->first;
    std::vector<Vec2> poly;
    auto cur = start;
    do {
      poly.push_back({double(cur.first), double(cur.second)});
      auto it = next.find(cur);
      if (it == next.end() || it->second.empty()) break;
      auto nxt = it->second.back();
      it->second.pop_back();
      if (it->second.empty()) next.erase(it);
      cur = nxt;
    } while (cur != start);
    if (poly.size() >= 4) contours.push_back(std::move(poly));
  }
  return contours;
}

std::vector<Vec2> smooth_closed(const std::vector<Vec2>& poly, int window, int passes) {
  if (poly.size() < size_t(window)) return poly;
  std::vector<Vec2> cur = poly;
  int r = window / 2;
  for (int p = 0; p < passes; ++p) {
    std::vector<Vec2> out(cur.size());
    size_t n = cur.size();
    for (size_t i = 0; i < n; ++i) {
      double sx = 0, sy = 0;
      for (int k = -r; k <= r; ++k) {
        const Vec2& q = cur[(i + n + size_t(k + int(n))) % n];
        sx += q.x;
        sy += q.y;
      }
      out[i] = {sx / window, sy / window};
    }
    cur = std::move(out);
  }
  return cur;
}

double polygon_length(const std::vector<Vec2>& poly) {
  double len = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) len += norm(poly[(i + 1) % poly.size()] - poly[i]);
  return len;
}

double polygon_area_abs(const std::vector<Vec2>& poly) {
  double acc = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return std::fabs(acc) * 0.5;
}

}  // namespace

void contour_measures(const BinaryMask& mask, double& perimeter, double& polygon_area) {
  auto contours = crack_contours(mask);
  if (contours.empty()) fail(ErrorKind::domain, "no contour found");
  // Outer contour = largest enclosed area; holes subtract area but their
  // boundary is not part of the silhouette perimeter used here (masks are
  // hole-filled upstream).
  size_t outer = 0;
  double best = -1.0;
  std::vector<double> areas(contours.size());
  for (size_t i = 0; i < contours.size(); ++i) {
    areas[i] = polygon_area_abs(contours[i]);
    if (areas[i] > best) {
      best = areas[i];
      outer = i;
    }
  }
  auto smooth = smooth_closed(contours[outer], kSmoothWindow, kSmoothPasses);
  perimeter = polygon_length(smooth);
  polygon_area = polygon_area_abs(smooth);
  for (size_t i = 0; i < contours.size(); ++i)
    if (i != outer) polygon_area -= polygon_area_abs(smooth_closed(contours[i], kSmoothWindow, kSmoothPasses));
}

double circularity(const BinaryMask& mask) {
  if (mask.area() == 0) fail(ErrorKind::domain, "circularity on an empty mask");
  int n = 0;
  label_components(mask, n);
  if (n != 1) fail(ErrorKind::domain, "circularity requires a single component");
  double perimeter = 0.0, poly_area = 0.0;
  contour_measures(mask, perimeter, poly_area);
  if (perimeter <= 0.0) return 1.0;
  double c = 4.0 * kPi * poly_area / (perimeter * perimeter);
  return std::min(1.0, c);
}

double estimate_volume_2d(double l_max, double l_min, double assumed_fer3d) {
  if (!(l_max >= l_min && l_min > 0.0))
    fail(ErrorKind::invalid_argument, "need l_max >= l_min > 0");
  if (assumed_fer3d < 1.0) fail(ErrorKind::invalid_argument, "assumed_fer3d must be >= 1");
  double c = l_max / 2.0;
  double a, b;
  if (l_max / l_min >= assumed_fer3d) {
    // The silhouette is already more elongated than the assumed ratio: the
    // short 2D dimension is the true shortest axis; reject the given ratio.
    a = l_min / 2.0;
    b = l_min / 2.0;
  } else {
    b = l_min / 2.0;
    a = c / assumed_fer3d;
  }
  return 4.0 / 3.0 * kPi * a * b * c;
}

MorphReport2D morph_report_2d(const BinaryMask& mask, double scale) {
  MorphReport2D rep;
  FeretResult fr = feret(mask);
  rep.l_max = fr.l_max * scale;
  rep.l_min = fr.l_min * scale;
  rep.fer2d = fr.fer2d;
  rep.esd = esd(mask, scale);
  rep.area = double(mask.area()) * scale * scale;
  double per_px = 0.0, area_px = 0.0;
  contour_measures(mask, per_px, area_px);
  rep.perimeter = per_px * scale;
  int n = 0;
  label_components(mask, n);
  rep.circularity = n == 1 ? circularity(mask) : 0.0;
  return rep;
}

double GradationReport::percent_at_or_below(double v) const {
  if (values.empty()) return 0.0;
  size_t n = 0;
  for (double x : values)
    if (x <= v + 1e-12) ++n;
  return 100.0 * double(n) / double(values.size());
}

GradationReport gradation_report(const std::vector<BinaryMask>& masks, double scale,
                                 GradationMetric metric, int n_bins) {
  if (masks.empty()) fail(ErrorKind::invalid_argument, "gradation needs at least one mask");
  if (n_bins < 1) fail(ErrorKind::invalid_argument, "need at least one bin");
  GradationReport rep;
  rep.metric = metric;
  for (const BinaryMask& m : masks) {
    if (metric == GradationMetric::esd)
      rep.values.push_back(esd(m, scale));
    else
      rep.values.push_back(feret(m).fer2d);
  }
  double lo = *std::min_element(rep.values.begin(), rep.values.end());
  double hi = *std::max_element(rep.values.begin(), rep.values.end());
  if (hi - lo < 1e-12) hi = lo + 1.0;  // single value: one full bin
  rep.bin_edges.resize(size_t(n_bins) + 1);
  for (int i = 0; i <= n_bins; ++i)
    rep.bin_edges[size_t(i)] = lo + (hi - lo) * double(i) / n_bins;
  rep.counts.assign(size_t(n_bins), 0);
  for (double v : rep.values) {
    int b = std::min(n_bins - 1, int((v - lo) / (hi - lo) * n_bins));
    rep.counts[size_t(b)]++;
  }
  rep.cumulative_pct.resize(size_t(n_bins));
  size_t acc = 0;
  for (int i = 0; i < n_bins; ++i) {
    acc += rep.counts[size_t(i)];
    rep.cumulative_pct[size_t(i)] = 100.0 * double(acc) / double(rep.values.size());
  }
  return rep;
}

std::string gradation_csv(const GradationReport& report) {
  std::ostringstream out;
  out << "bin_low,bin_high,count,cumulative_percent\n";
  char buf[160];
  for (size_t i = 0; i < report.counts.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%zu,%.4f\n", report.bin_edges[i],
                  report.bin_edges[i + 1], report.counts[i], report.cumulative_pct[i]);
    out << buf;
  }
  return out.str();
}

}  // namespace rock
