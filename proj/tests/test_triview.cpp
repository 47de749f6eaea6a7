#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "imgseg.hpp"
#include "triview.hpp"
#include "voxel.hpp"

using namespace rock;
using namespace fixtures;

namespace {

BinaryMask square_mask(int side) {
  BinaryMask m(side, side);
  std::fill(m.data.begin(), m.data.end(), uint8_t(1));
  return m;
}

// Eroded-detection disc: the radius shrinks by one pixel, the way a
// contrast-based boundary reads a photographed sphere.
BinaryMask detected_disc(double true_radius_px) {
  return disc_mask(2.0 * (true_radius_px - 1.0));
}

}  // namespace

TEST_CASE("orthogonality_calibrate solves the incidence system") {
  // Consistent dims (w_top, h_top, w_front, h_front, w_side, h_side).
  CalibratedDims d = orthogonality_calibrate(3, 1, 1, 2, 3, 2);
  CHECK(d.x0 == doctest::Approx(1.0));
  CHECK(d.y0 == doctest::Approx(2.0));
  CHECK(d.z0 == doctest::Approx(3.0));

  CalibratedDims k = orthogonality_calibrate(5, 5, 5, 5, 5, 5);
  CHECK(k.x0 == doctest::Approx(5.0));
  CHECK(k.y0 == doctest::Approx(5.0));
  CHECK(k.z0 == doctest::Approx(5.0));
}

TEST_CASE("calibration equals the normal-equations oracle") {
  // Oracle: solve A^T A x = A^T b for the fixed 6x3 incidence matrix.
  // Rows observe (z, x, x, y, z, y); A^T A = 2I, so x = A^T b / 2.
  RngStream rng(77, "calib");
  for (int trial = 0; trial < 20; ++trial) {
    double b[6];
    for (double& v : b) v = rng.uniform(1.0, 100.0);
    double oracle_x = (b[1] + b[2]) / 2.0;
    double oracle_y = (b[3] + b[5]) / 2.0;
    double oracle_z = (b[0] + b[4]) / 2.0;
    CalibratedDims d = orthogonality_calibrate(b[0], b[1], b[2], b[3], b[4], b[5]);
    CHECK(d.x0 == doctest::Approx(oracle_x).epsilon(1e-12));
    CHECK(d.y0 == doctest::Approx(oracle_y).epsilon(1e-12));
    CHECK(d.z0 == doctest::Approx(oracle_z).epsilon(1e-12));
  }

  // Worked inconsistent case: h_top = 4, w_front = 6 average to 5.
  CalibratedDims d = orthogonality_calibrate(3, 4, 6, 2, 3, 2);
  CHECK(d.x0 == doctest::Approx(5.0));
}

TEST_CASE("three squares intersect to a solid cube") {
  int s = 40;
  SilhouetteTriplet views{square_mask(s), square_mask(s), square_mask(s)};
  CHECK(intersect_count(views) == size_t(s) * size_t(s) * size_t(s));
  VoxelGrid grid = intersect_silhouettes(views);
  CHECK(grid.occupied_count() == size_t(s) * size_t(s) * size_t(s));
}

TEST_CASE("count-only and materialized intersections agree") {
  BinaryMask top = raster_ellipse(30, 18, 0.4);
  BinaryMask front = resize_nearest(raster_disc(50.0), top.height, 44);
  BinaryMask side = resize_nearest(raster_ellipse(25, 20, 1.2), top.width, 44);
  SilhouetteTriplet views{top, front, side};
  CHECK(intersect_count(views) == intersect_silhouettes(views).occupied_count());
}

TEST_CASE("three discs intersect to the Steinmetz tricylinder") {
  double r = 64.0;
  BinaryMask disc = disc_mask(2.0 * r);
  SilhouetteTriplet views{disc, disc, disc};
  double analytic = 8.0 * (2.0 - std::sqrt(2.0)) * r * r * r;
  CHECK(double(intersect_count(views)) == doctest::Approx(analytic).epsilon(0.02));
}

TEST_CASE("an empty row collapses that slab to zero thickness") {
  int s = 16;
  BinaryMask top = square_mask(s);
  for (int z = 0; z < s; ++z) top.set(z, 5, false);  // row x = 5 empty
  SilhouetteTriplet views{top, square_mask(s), square_mask(s)};
  VoxelGrid grid = intersect_silhouettes(views);
  for (int z = 0; z < s; ++z)
    for (int y = 0; y < s; ++y) CHECK_FALSE(grid.at(5, y, z));
  CHECK(grid.occupied_count() == size_t(s) * size_t(s) * size_t(s - 1));
}

TEST_CASE("reprojection identity holds bit-exactly for consistent triplets") {
  for (uint64_t seed : {101ull, 102ull, 103ull}) {
    VoxelGrid grid = voxelize(make_rock(seed, 1.0, 3), 0.02);
    SilhouetteTriplet views = silhouettes_of_grid(grid);
    SilhouetteTriplet back = reproject(views);
    CHECK(back.top.data == views.top.data);
    CHECK(back.front.data == views.front.data);
    CHECK(back.side.data == views.side.data);
  }
}

TEST_CASE("silhouette intersection never underestimates the voxel solid") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    VoxelGrid grid = voxelize(make_rock(seed, 1.0, 2), 0.03);
    SilhouetteTriplet views = silhouettes_of_grid(grid);
    CHECK(intersect_count(views) >= grid.occupied_count());
  }
}

TEST_CASE("resolution_correction reference values") {
  CHECK(resolution_correction(25, 7) == doctest::Approx(0.900).epsilon(0.00112));
  CHECK(resolution_correction(45, 10) == doctest::Approx(0.9410).epsilon(0.00054));
  CHECK(resolution_correction(33, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(resolution_correction(1.0, 5.0), Error);
  CHECK_THROWS_AS(resolution_correction(25.0, 0.5), Error);
}

TEST_CASE("resolution_correction agrees with a pixel-erosion simulation") {
  // Rasterize the ball and the rock as discs, erode each boundary by one
  // pixel, and push both through the ratio method of the correction model.
  // A 4x supersample tames the lattice-count wobble of small discs; the
  // erosion scales with it, so the simulated c2 is unchanged.
  const double s = 4.0;
  for (double r_ball : {25.0, 45.0}) {
    for (double t : {4.0, 10.0}) {
      double r_rock = t * r_ball;
      double a_ball = double(disc_mask(2 * s * r_ball).area());
      double a_ball_det = double(disc_mask(2 * s * (r_ball - 1)).area());
      double a_rock = double(disc_mask(2 * s * r_rock).area());
      double a_rock_det = double(disc_mask(2 * s * (r_rock - 1)).area());
      // Volumes scale as area^(3/2) for spheres; c2 = V_true / V_detected
      // with both converted through the reconstructed ball reference.
      double sim = std::pow(a_rock / a_rock_det, 1.5) * std::pow(a_ball_det / a_ball, 1.5);
      CHECK(resolution_correction(r_ball, t) == doctest::Approx(sim).epsilon(0.004));
    }
  }
}

TEST_CASE("c2 is monotone decreasing in t and increasing in ball radius") {
  for (double r_ball : {15.0, 25.0, 45.0}) {
    double prev = 2.0;
    for (double t = 1.0; t <= 15.0; t += 0.5) {
      double c2 = resolution_correction(r_ball, t);
      CHECK(c2 > 0.0);
      CHECK(c2 <= 1.0);
      CHECK(c2 <= prev + 1e-12);
      prev = c2;
    }
  }
  for (double t : {2.0, 7.0, 14.0}) {
    double prev = 0.0;
    for (double r_ball : {15.0, 25.0, 45.0}) {
      double c2 = resolution_correction(r_ball, t);
      CHECK(c2 >= prev - 1e-12);
      prev = c2;
    }
  }
}

TEST_CASE("reconstruct_volume recovers a synthetic sphere within 5%") {
  // Rock/ball ratio 8 with one-pixel detection shrink on every silhouette.
  double r_ball = 30.0, t = 8.0;
  BinaryMask rock_view = detected_disc(r_ball * t);
  BinaryMask ball_view = detected_disc(r_ball);
  double detected_ball_d = 2.0 * std::sqrt(double(ball_view.area()) / kPi);

  ViewTriplet views;
  views.top = rock_view;
  views.front = rock_view;
  views.side = rock_view;
  views.ball_top = detected_ball_d;
  views.ball_front = detected_ball_d;
  views.ball_side = detected_ball_d;
  views.ball_diameter = 0.2;  // meters

  TriviewResult res = reconstruct_volume(views);
  double true_radius = 0.1 * t;
  double analytic = 4.0 / 3.0 * kPi * true_radius * true_radius * true_radius;
  CHECK(res.corrected_volume == doctest::Approx(analytic).epsilon(0.05));
  CHECK(res.raw_volume > analytic);  // uncorrected reconstruction over-reads
  REQUIRE(res.weight.has_value());
  CHECK(*res.weight == doctest::Approx(res.corrected_volume * 2.66 * 1000.0));
}

TEST_CASE("reconstruct_volume is deterministic") {
  BinaryMask rock_view = raster_ellipse(60, 40, 0.3);
  ViewTriplet views{rock_view, rock_view, rock_view, 30.0, 30.0, 30.0, 0.1};
  TriviewResult a = reconstruct_volume(views);
  TriviewResult b = reconstruct_volume(views);
  CHECK(a.raw_volume == b.raw_volume);
  CHECK(a.corrected_volume == b.corrected_volume);
  CHECK(a.rock_voxels == b.rock_voxels);
}

TEST_CASE("reconstruct_volume validates its inputs") {
  BinaryMask rock_view = raster_disc(40.0);
  ViewTriplet bad{rock_view, rock_view, rock_view, 0.5, 20.0, 20.0, 0.1};
  CHECK_THROWS_AS(reconstruct_volume(bad), Error);  // ball diameter <= 1 px
  ViewTriplet no_ball{rock_view, rock_view, rock_view, 20.0, 20.0, 20.0, 0.0};
  CHECK_THROWS_AS(reconstruct_volume(no_ball), Error);
}
