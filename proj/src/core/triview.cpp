#include "triview.hpp"

#include <algorithm>
#include <cmath>

namespace rock {

void SilhouetteTriplet::validate() const {
  if (top.area() == 0 || front.area() == 0 || side.area() == 0)
    fail(ErrorKind::domain, "all three silhouettes must be non-empty");
  if (top.height != front.width)
    fail(ErrorKind::invalid_argument, "x extent mismatch between top and front views");
  if (front.height != side.height)
    fail(ErrorKind::invalid_argument, "y extent mismatch between front and side views");
  if (top.width != side.width)
    fail(ErrorKind::invalid_argument, "z extent mismatch between top and side views");
}

CalibratedDims orthogonality_calibrate(double w_top, double h_top, double w_front, double h_front,
                                       double w_side, double h_side) {
  for (double d : {w_top, h_top, w_front, h_front, w_side, h_side})
    if (d <= 0.0) fail(ErrorKind::invalid_argument, "view dimensions must be positive");
  // Normal equations of the 6x3 incidence system: each axis is observed by
  // exactly two view dimensions, so the solution is their mean.
  return {(h_top + w_front) / 2.0, (h_front + h_side) / 2.0, (w_top + w_side) / 2.0};
}

namespace {

// Per-column bitmasks over y (little-endian within 64-bit words).
std::vector<uint64_t> column_bits(const BinaryMask& mask /* rows = y */) {
  size_t words_per_col = (size_t(mask.height) + 63) / 64;
  std::vector<uint64_t> bits(size_t(mask.width) * words_per_col, 0);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y))
        bits[size_t(x) * words_per_col + size_t(y) / 64] |= uint64_t(1) << (y % 64);
  return bits;
}

}  // namespace

size_t intersect_count(const SilhouetteTriplet& views) {
  views.validate();
  int x0 = views.x_dim(), y0 = views.y_dim(), z0 = views.z_dim();
  size_t words = (size_t(y0) + 63) / 64;
  std::vector<uint64_t> front_bits = column_bits(views.front);  // indexed by x
  std::vector<uint64_t> side_bits = column_bits(views.side);    // indexed by z

  std::vector<size_t> partial(size_t(x0), 0);
  parallel_for(size_t(x0), [&](size_t xb, size_t xe) {
    for (size_t x = xb; x < xe; ++x) {
      const uint64_t* fcol = &front_bits[x * words];
      size_t acc = 0;
      for (int z = 0; z < z0; ++z) {
        if (!views.top.at(z, int(x))) continue;
        const uint64_t* scol = &side_bits[size_t(z) * words];
        for (size_t w = 0; w < words; ++w) acc += size_t(__builtin_popcountll(fcol[w] & scol[w]));
      }
      partial[x] = acc;
    }
  });
  size_t total = 0;
  for (size_t p : partial) total += p;
  return total;
}

VoxelGrid intersect_silhouettes(const SilhouetteTriplet& views) {
  views.validate();
  int x0 = views.x_dim(), y0 = views.y_dim(), z0 = views.z_dim();
  VoxelGrid grid({0, 0, 0}, 1.0, x0, y0, z0);
  parallel_for(size_t(z0), [&](size_t zb, size_t ze) {
    for (size_t z = zb; z < ze; ++z)
      for (int y = 0; y < y0; ++y) {
        bool side_ok = views.side.at(int(z), y);
        if (!side_ok) continue;
        for (int x = 0; x < x0; ++x)
          if (views.top.at(int(z), x) && views.front.at(x, y)) grid.set(x, y, int(z), true);
      }
  });
  return grid;
}

SilhouetteTriplet reproject(const SilhouetteTriplet& views) {
  views.validate();
  int x0 = views.x_dim(), y0 = views.y_dim(), z0 = views.z_dim();
  size_t words = (size_t(y0) + 63) / 64;
  std::vector<uint64_t> front_bits = column_bits(views.front);
  std::vector<uint64_t> side_bits = column_bits(views.side);

  SilhouetteTriplet out;
  out.top = BinaryMask(z0, x0);
  out.front = BinaryMask(x0, y0);
  out.side = BinaryMask(z0, y0);

  for (int x = 0; x < x0; ++x) {
    const uint64_t* fcol = &front_bits[size_t(x) * words];
    for (int z = 0; z < z0; ++z) {
      if (!views.top.at(z, x)) continue;
      const uint64_t* scol = &side_bits[size_t(z) * words];
      bool any = false;
      for (size_t w = 0; w < words && !any; ++w) any = (fcol[w] & scol[w]) != 0;
      if (!any) continue;
      out.top.set(z, x, true);
      for (int y = 0; y < y0; ++y) {
        if (!views.front.at(x, y) || !views.side.at(z, y)) continue;
        out.front.set(x, y, true);
        out.side.set(z, y, true);
      }
    }
  }
  return out;
}

SilhouetteTriplet silhouettes_of_grid(const VoxelGrid& grid) {
  SilhouetteTriplet out;
  out.top = BinaryMask(grid.nz, grid.nx);
  out.front = BinaryMask(grid.nx, grid.ny);
  out.side = BinaryMask(grid.nz, grid.ny);
  for (int z = 0; z < grid.nz; ++z)
    for (int y = 0; y < grid.ny; ++y)
      for (int x = 0; x < grid.nx; ++x) {
        if (!grid.at(x, y, z)) continue;
        out.top.set(z, x, true);
        out.front.set(x, y, true);
        out.side.set(z, y, true);
      }
  return out;
}

double resolution_correction(double r_ball, double t) {
  if (r_ball <= 1.0) fail(ErrorKind::invalid_argument, "ball radius must exceed one pixel");
  if (t < 1.0) fail(ErrorKind::invalid_argument, "size ratio t must be >= 1");
  double base = 1.0 - (t - 1.0) / (t * r_ball - 1.0);
  return base * base * base;
}

BinaryMask disc_mask(double diameter_px) {
  if (diameter_px <= 0.0) fail(ErrorKind::invalid_argument, "disc diameter must be positive");
  double r = diameter_px / 2.0;
  int n = int(std::ceil(diameter_px)) + 2;
  BinaryMask mask(n, n);
  double c = n / 2.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double dx = x + 0.5 - c, dy = y + 0.5 - c;
      if (dx * dx + dy * dy <= r * r) mask.set(x, y, true);
    }
  return mask;
}

namespace {

struct CropInfo {
  BinaryMask mask;
  int width = 0, height = 0;
};

CropInfo crop_to_foreground(const BinaryMask& mask) {
  int xlo = mask.width, xhi = -1, ylo = mask.height, yhi = -1;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) {
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
      }
  if (xhi < 0) fail(ErrorKind::domain, "silhouette is empty");
  CropInfo out;
  out.width = xhi - xlo + 1;
  out.height = yhi - ylo + 1;
  out.mask = BinaryMask(out.width, out.height);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.mask.set(x, y, mask.at(x + xlo, y + ylo));
  return out;
}

double equivalent_radius_px(const BinaryMask& mask) {
  return std::sqrt(double(mask.area()) / kPi);
}

}  // namespace

TriviewResult reconstruct_volume(const ViewTriplet& views, const TriviewOptions& options) {
  if (views.ball_diameter <= 0.0)
    fail(ErrorKind::invalid_argument, "ball physical diameter must be positive");
  for (double r : {views.ball_top, views.ball_front, views.ball_side})
    if (r <= 1.0) fail(ErrorKind::invalid_argument, "ball pixel diameters must exceed one pixel");

  // Bring all views onto a common ball reference (counteracts zoom and
  // camera-distance differences between the three shots).
  double r_ref = std::max({views.ball_top, views.ball_front, views.ball_side});
  const BinaryMask* masks[3] = {&views.top, &views.front, &views.side};
  double ball_px[3] = {views.ball_top, views.ball_front, views.ball_side};
  CropInfo cropped[3];
  for (int i = 0; i < 3; ++i) {
    double s = r_ref / ball_px[i];
    BinaryMask scaled = *masks[i];
    if (std::fabs(s - 1.0) > 1e-12) {
      int nw = std::max(1, int(std::lround(masks[i]->width * s)));
      int nh = std::max(1, int(std::lround(masks[i]->height * s)));
      scaled = resize_nearest(*masks[i], nw, nh);
    }
    cropped[i] = crop_to_foreground(scaled);
  }

  CalibratedDims dims = orthogonality_calibrate(cropped[0].width, cropped[0].height,
                                                cropped[1].width, cropped[1].height,
                                                cropped[2].width, cropped[2].height);
  // Cap the working resolution; the ball reference shrinks with it so the
  // rock/ball ratio is preserved.
  double longest = std::max({dims.x0, dims.y0, dims.z0});
  if (options.max_resolution > 0 && longest > options.max_resolution) {
    double g = options.max_resolution / longest;
    dims.x0 *= g;
    dims.y0 *= g;
    dims.z0 *= g;
    r_ref *= g;
  }
  int xi = std::max(1, int(std::lround(dims.x0)));
  int yi = std::max(1, int(std::lround(dims.y0)));
  int zi = std::max(1, int(std::lround(dims.z0)));

  SilhouetteTriplet rock;
  rock.top = resize_nearest(cropped[0].mask, zi, xi);
  rock.front = resize_nearest(cropped[1].mask, xi, yi);
  rock.side = resize_nearest(cropped[2].mask, zi, yi);
  size_t rock_voxels = intersect_count(rock);

  // The ball goes through the same reconstruction, so the systematic
  // intersection overestimate cancels in the voxel ratio.
  BinaryMask ball_view = crop_to_foreground(disc_mask(r_ref)).mask;
  SilhouetteTriplet ball{ball_view, ball_view, ball_view};
  size_t ball_voxels = intersect_count(ball);
  if (ball_voxels == 0) fail(ErrorKind::domain, "degenerate calibration ball");

  double ball_volume = kPi / 6.0 * views.ball_diameter * views.ball_diameter * views.ball_diameter;
  double raw = double(rock_voxels) / double(ball_voxels) * ball_volume;

  double r_ball_px = r_ref / 2.0;
  double r_rock_px = (equivalent_radius_px(rock.top) + equivalent_radius_px(rock.front) +
                      equivalent_radius_px(rock.side)) / 3.0;
  double t = std::max(1.0, r_rock_px / r_ball_px);

  TriviewResult out;
  out.raw_volume = raw;
  out.c1 = options.c1;
  out.c2 = resolution_correction(r_ball_px, t);
  out.corrected_volume = raw * out.c1 * out.c2;
  out.dims = dims;
  out.ball_radius_px = r_ball_px;
  out.size_ratio = t;
  out.rock_voxels = rock_voxels;
  out.ball_voxels = ball_voxels;
  if (options.specific_gravity > 0.0)
    out.weight = out.corrected_volume * options.specific_gravity * options.water_density;
  return out;
}

}  // namespace rock
