#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "evalkit.hpp"
#include "fixtures.hpp"
#include "shapepairs.hpp"
#include "stockgen.hpp"

using namespace rock;
using namespace fixtures;

namespace {

// Coarse spacing keeps the unit tests fast; geometry is unchanged.
PairConfig coarse_config() {
  PairConfig c;
  c.arc_spacing = 0.008;
  c.ring_spacing = 0.008;
  c.partial_n = 128;
  c.complete_n = 512;
  c.seed = 3;
  return c;
}

SceneIndex index_of(const TriMesh& mesh) {
  SceneIndex index;
  index.add_instance(mesh, Mat3::identity(), {0, 0, 0}, 0);
  index.build();
  return index;
}

double disk_radius_of(const TriMesh& mesh, const PairConfig& c) {
  Vec3 extent = mesh.bbox_max() - mesh.bbox_min();
  return c.disk_radius_factor * 0.5 * norm(extent);
}

}  // namespace

TEST_CASE("full sensor set covers a convex shape almost completely") {
  TriMesh sphere = recenter(make_icosphere(3, 0.08));
  PairConfig c = coarse_config();
  c.arc_spacing = 0.004;
  c.ring_spacing = 0.004;
  SceneIndex index = index_of(sphere);
  std::vector<Vec3> sensors = sensor_positions(sphere, c);
  REQUIRE(sensors.size() == 16);

  LabeledPointCloud cloud = scan_partial(index, sensors, 16, disk_radius_of(sphere, c), c);
  std::vector<Vec3> pts = cloud.positions();
  CHECK(shape_percentage(pts, 1000, 3.0) >= 99.0);
}

TEST_CASE("every sensor hit lies on the mesh surface") {
  TriMesh rock_mesh = recenter(make_rock(17, 0.1, 2));
  PairConfig c = coarse_config();
  SceneIndex index = index_of(rock_mesh);
  std::vector<Vec3> sensors = sensor_positions(rock_mesh, c);
  LabeledPointCloud cloud = scan_partial(index, sensors, 4, disk_radius_of(rock_mesh, c), c);
  REQUIRE_FALSE(cloud.empty());
  for (const LabeledPoint& p : cloud.points) {
    double best = 1e300;
    for (const auto& f : rock_mesh.faces) {
      const Vec3 &a = rock_mesh.vertices[f[0]], &b = rock_mesh.vertices[f[1]],
                 &cc = rock_mesh.vertices[f[2]];
      Vec3 n = cross(b - a, cc - a);
      double nn = norm(n);
      if (nn < 1e-30) continue;
      best = std::min(best, std::fabs(dot(p.position - a, n / nn)));
      if (best < 1e-9) break;
    }
    CHECK(best <= 1e-6);
  }
}

TEST_CASE("sensor subsets nest: more sensors only add hits") {
  TriMesh rock_mesh = recenter(make_rock(23, 0.1, 2));
  PairConfig c = coarse_config();
  SceneIndex index = index_of(rock_mesh);
  std::vector<Vec3> sensors = sensor_positions(rock_mesh, c);
  double dr = disk_radius_of(rock_mesh, c);

  LabeledPointCloud small = scan_partial(index, sensors, 3, dr, c);
  LabeledPointCloud large = scan_partial(index, sensors, 5, dr, c);
  REQUIRE(small.size() <= large.size());
  // The first-k union is a strict prefix of the first-(k+j) union.
  for (size_t i = 0; i < small.size(); ++i) CHECK(small.points[i] == large.points[i]);
}

TEST_CASE("fps picks the farthest corner first") {
  std::vector<Vec3> corners = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  // Find a seed whose first pick is corner 0, then the second must be (1,1).
  for (uint64_t seed = 0; seed < 64; ++seed) {
    std::vector<size_t> picks = fps_downsample_indices(corners, 2, seed);
    if (picks[0] == 0) {
      CHECK(picks[1] == 3);
      return;
    }
  }
  FAIL("no seed started from corner 0");
}

TEST_CASE("fps selecting everything returns the whole set") {
  RngStream rng(14, "fps_all");
  std::vector<Vec3> pts(37);
  for (Vec3& p : pts) p = rng.unit_vector();
  std::vector<size_t> picks = fps_downsample_indices(pts, pts.size(), 4);
  CHECK(picks.size() == pts.size());
  std::vector<bool> seen(pts.size(), false);
  for (size_t i : picks) {
    CHECK_FALSE(seen[i]);
    seen[i] = true;
  }
}

TEST_CASE("fps selections form a greedy prefix") {
  RngStream rng(15, "fps_prefix");
  std::vector<Vec3> pts(500);
  for (Vec3& p : pts) p = rng.unit_vector() * rng.uniform(0.2, 1.0);
  std::vector<size_t> k8 = fps_downsample_indices(pts, 8, 9);
  std::vector<size_t> k32 = fps_downsample_indices(pts, 32, 9);
  for (size_t i = 0; i < k8.size(); ++i) CHECK(k8[i] == k32[i]);
}

TEST_CASE("fps rejects oversampling") {
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(fps_downsample_indices(pts, 3, 0), Error);
}

TEST_CASE("generate_pairs lays out the dataset with exact counts") {
  TempDir dir("pairs_dataset");
  TempDir lib_dir("pairs_library");
  save_mesh_obj(make_rock(41, 0.09, 2), lib_dir.file("rock_a.obj"));
  save_mesh_obj(make_rock(42, 0.11, 2), lib_dir.file("rock_b.obj"));

  PairConfig c = coarse_config();
  c.orientations = 3;
  c.subset_sizes = {3, 5};
  PairSummary summary = generate_pairs(lib_dir.path().string(), c, dir.path().string());
  CHECK(summary.models == 2);
  CHECK(summary.pairs == 2 * 3 * 2);

  LabeledPointCloud partial = load_cloud_ply(
      (dir.path() / "rock_a" / "orientation_0" / "visibility_3" / "partial.ply").string());
  CHECK(partial.size() == c.partial_n);
  LabeledPointCloud complete =
      load_cloud_ply((dir.path() / "rock_a" / "orientation_0" / "complete.ply").string());
  CHECK(complete.size() == c.complete_n);

  std::ifstream manifest_in(dir.file("manifest.json"));
  std::string manifest((std::istreambuf_iterator<char>(manifest_in)),
                       std::istreambuf_iterator<char>());
  CHECK(manifest.find("\"pairs\": 12") != std::string::npos);
}

TEST_CASE("generate_pairs is byte-deterministic for a fixed seed") {
  TempDir lib_dir("pairs_det_lib");
  save_mesh_obj(make_rock(55, 0.1, 2), lib_dir.file("rock.obj"));
  PairConfig c = coarse_config();
  c.orientations = 2;
  c.subset_sizes = {3};

  auto read_bytes = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };

  TempDir out1("pairs_det_1");
  TempDir out2("pairs_det_2");
  generate_pairs(lib_dir.path().string(), c, out1.path().string());
  generate_pairs(lib_dir.path().string(), c, out2.path().string());

  for (const char* rel : {"rock/orientation_0/complete.ply",
                          "rock/orientation_0/visibility_3/partial.ply", "manifest.json"}) {
    CHECK(read_bytes(out1.path() / rel) == read_bytes(out2.path() / rel));
  }
}

TEST_CASE("partial clouds are subsets of the pre-sampling union") {
  TriMesh rock_mesh = recenter(make_rock(61, 0.1, 2));
  PairConfig c = coarse_config();
  SceneIndex index = index_of(rock_mesh);
  std::vector<Vec3> sensors = sensor_positions(rock_mesh, c);
  double dr = disk_radius_of(rock_mesh, c);
  LabeledPointCloud unioned = scan_partial(index, sensors, 4, dr, c);
  LabeledPointCloud sampled = fps_downsample(unioned, 128, 7);
  for (const LabeledPoint& p : sampled.points) {
    bool found = false;
    for (const LabeledPoint& q : unioned.points)
      if (p == q) {
        found = true;
        break;
      }
    CHECK(found);
  }
}
