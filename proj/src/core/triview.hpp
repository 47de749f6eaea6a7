#ifndef ROCKMORPH_TRIVIEW_HPP
#define ROCKMORPH_TRIVIEW_HPP

// Three-orthogonal-view volumetric reconstruction: orthogonality
// calibration, replicated-silhouette intersection, the systematic and
// resolution-based volume corrections, and the end-to-end estimate.

#include <optional>

#include "image.hpp"
#include "voxel.hpp"

namespace rock {

// Axis convention for the three views (matching the calibration system):
//   top:   rows = x, cols = z
//   front: rows = y, cols = x
//   side:  rows = y, cols = z
// A voxel (x, y, z) is occupied when all three replicated silhouettes
// cover it.
struct SilhouetteTriplet {
  BinaryMask top, front, side;

  int x_dim() const { return top.height; }
  int y_dim() const { return front.height; }
  int z_dim() const { return top.width; }

  // Throws unless the three masks agree on (x, y, z) extents.
  void validate() const;
};

struct ViewTriplet {
  BinaryMask top, front, side;      // full-frame rock silhouettes
  double ball_top = 0.0, ball_front = 0.0, ball_side = 0.0;  // ball px diameters
  double ball_diameter = 0.0;       // physical
};

struct CalibratedDims {
  double x0 = 0.0, y0 = 0.0, z0 = 0.0;
};

// Least-squares solution of the fixed 6x3 view-incidence system; reduces to
// pairwise means of the dimensions that observe each axis.
CalibratedDims orthogonality_calibrate(double w_top, double h_top, double w_front, double h_front,
                                       double w_side, double h_side);

// Occupied-voxel count of the intersection (does not materialize the grid;
// y-columns are packed into 64-bit words).
size_t intersect_count(const SilhouetteTriplet& views);

// Materialized intersection for moderate lattice sizes.
VoxelGrid intersect_silhouettes(const SilhouetteTriplet& views);

// Re-projections of the intersection along the three axes (for checking the
// projection identity against the inputs).
SilhouetteTriplet reproject(const SilhouetteTriplet& views);

// Axis-aligned silhouettes of an occupancy grid, in the same convention.
SilhouetteTriplet silhouettes_of_grid(const VoxelGrid& grid);

// Resolution-based correction c2 = (1 - (t-1)/(t*r_ball - 1))^3 for a
// one-pixel boundary shrink; r_ball is the ball pixel radius at working
// resolution and t the rock/ball size ratio.
double resolution_correction(double r_ball, double t);

struct TriviewOptions {
  double c1 = 0.954;              // empirical systematic correction
  double specific_gravity = 2.66; // set <= 0 to skip the weight estimate
  double water_density = 1000.0;  // kg per cubic unit-volume
  int max_resolution = 1024;      // cap on the longest calibrated axis
};

struct TriviewResult {
  double raw_volume = 0.0;        // physical units^3
  double corrected_volume = 0.0;
  double c1 = 0.0, c2 = 0.0;
  std::optional<double> weight;
  CalibratedDims dims;            // calibrated pixel dims actually used
  double ball_radius_px = 0.0;    // working-resolution ball radius
  double size_ratio = 0.0;        // measured rock/ball ratio t
  size_t rock_voxels = 0, ball_voxels = 0;
};

// Full pipeline: resize views onto a common ball reference, calibrate the
// orthogonal dimensions, intersect, convert through the ball voxel ratio,
// then apply c1 and c2.
TriviewResult reconstruct_volume(const ViewTriplet& views, const TriviewOptions& options = {});

// Filled disc silhouette of the given pixel diameter (used for the ball's
// reconstruction and by the correction-model tests).
BinaryMask disc_mask(double diameter_px);

}  // namespace rock

#endif
