#ifndef ROCKMORPH_MORPH2D_HPP
#define ROCKMORPH_MORPH2D_HPP

// 2D descriptors from binary silhouettes: scale calibration, Feret
// dimensions, equivalent spherical diameter, circularity, ellipsoid volume
// estimation from a single silhouette, and gradation reports.

#include <string>
#include <vector>

#include "image.hpp"

namespace rock {

// Pixel-to-length factor from a calibration ball silhouette of known
// physical diameter. The mask must be a single component.
double calibrate_scale(const BinaryMask& ball_mask, double ball_diameter);

struct FeretResult {
  double l_max = 0.0;     // longest caliper over all directions (pixels)
  double l_min = 0.0;     // caliper perpendicular to the l_max direction
  double fer2d = 1.0;     // l_max / l_min, >= 1
  double angle_rad = 0.0; // direction of the longest caliper
};

// Caliper search over pixel-corner hull points: 1-degree sweep plus
// golden-section refinement. Single-pixel masks report FER 1 by convention.
FeretResult feret(const BinaryMask& mask);

// 2 * sqrt(area / pi) in physical units.
double esd(const BinaryMask& mask, double scale = 1.0);

// 4*pi*A / P^2 with the perimeter from a smoothed marching-squares contour;
// clamped to 1. Multi-component masks are rejected.
double circularity(const BinaryMask& mask);

// Smoothed outer-contour perimeter and polygon area, in pixels.
void contour_measures(const BinaryMask& mask, double& perimeter, double& polygon_area);

// Ellipsoid volume from one silhouette and an assumed 3D elongation ratio:
// the longest 2D dimension is taken as the ellipsoid's longest axis; the
// hidden axis comes from the assumed ratio unless the silhouette already
// shows a stronger elongation, in which case the given ratio is rejected
// and both hidden axes equal the short 2D dimension.
double estimate_volume_2d(double l_max, double l_min, double assumed_fer3d);

struct MorphReport2D {
  double esd = 0.0;
  double l_max = 0.0, l_min = 0.0;
  double fer2d = 1.0;
  double circularity = 0.0;
  double area = 0.0;       // physical units^2
  double perimeter = 0.0;  // physical units
};

MorphReport2D morph_report_2d(const BinaryMask& mask, double scale = 1.0);

enum class GradationMetric { esd, fer };

struct GradationReport {
  GradationMetric metric = GradationMetric::esd;
  std::vector<double> bin_edges;        // size = counts.size() + 1
  std::vector<size_t> counts;
  std::vector<double> cumulative_pct;   // at each upper edge, inclusive
  std::vector<double> values;           // per-mask metric values

  // Percent of samples with value <= v (inclusive convention).
  double percent_at_or_below(double v) const;
};

GradationReport gradation_report(const std::vector<BinaryMask>& masks, double scale,
                                 GradationMetric metric, int n_bins = 10);

std::string gradation_csv(const GradationReport& report);

}  // namespace rock

#endif
