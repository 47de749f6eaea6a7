#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "raycast.hpp"

using namespace rock;
using namespace fixtures;

TEST_CASE("cast hits the top face of a unit cube") {
  SceneIndex index;
  index.add_instance(make_cube(1.0, {-0.5, 0.0, -0.5}), Mat3::identity(), {0, 0, 0}, 7);
  index.build();
  auto hit = index.cast({{0.0, 2.0, 0.0}, {0.0, -1.0, 0.0}});
  REQUIRE(hit.has_value());
  CHECK(hit->instance_id == 7);
  CHECK(hit->point.y == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(hit->t == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("rays that miss everything produce no hit") {
  SceneIndex index;
  index.add_instance(make_cube(), Mat3::identity(), {0, 0, 0}, 0);
  index.build();
  CHECK_FALSE(index.cast({{5, 5, 5}, normalized(Vec3{1, 0.2, 0.1})}).has_value());
}

TEST_CASE("duplicate instance ids are rejected") {
  SceneIndex index;
  index.add_instance(make_cube(), Mat3::identity(), {0, 0, 0}, 1);
  CHECK_THROWS_AS(index.add_instance(make_cube(), Mat3::identity(), {2, 0, 0}, 1), Error);
}

TEST_CASE("bvh traversal equals the brute-force nearest-triangle oracle") {
  SceneIndex index;
  RngStream rng(42, "raycast_oracle");
  for (int i = 0; i < 12; ++i) {
    Mat3 rot = seeded_rotation(uint64_t(i) + 1, "pose");
    Vec3 pos{rng.uniform(-1.0, 1.0), rng.uniform(0.0, 0.6), rng.uniform(-1.0, 1.0)};
    index.add_instance(make_rock(uint64_t(i), 0.35), rot, pos, i);
  }
  index.build();

  size_t hits = 0;
  for (int k = 0; k < 10000; ++k) {
    Vec3 origin{rng.uniform(-2.0, 2.0), rng.uniform(1.0, 2.5), rng.uniform(-2.0, 2.0)};
    Vec3 target{rng.uniform(-1.2, 1.2), rng.uniform(-0.2, 0.5), rng.uniform(-1.2, 1.2)};
    Ray ray{origin, normalized(target - origin)};
    auto fast = index.cast(ray);
    auto slow = index.cast_brute_force(ray);
    REQUIRE(fast.has_value() == slow.has_value());
    if (fast) {
      ++hits;
      CHECK(fast->instance_id == slow->instance_id);
      CHECK(fast->t == doctest::Approx(slow->t).epsilon(1e-9));
      CHECK(norm(fast->point - (ray.pos + ray.dir * fast->t)) <= 1e-9);
    }
  }
  CHECK(hits > 1000);  // the fixture must actually exercise hits
}

TEST_CASE("cast_rays drops misses and stamps the emitter id") {
  SceneIndex index;
  index.add_instance(make_cube(1.0, {-0.5, 0.0, -0.5}), Mat3::identity(), {0, 0, 0}, 3);
  index.build();
  std::vector<Ray> rays = {{{0, 2, 0}, {0, -1, 0}},
                           {{5, 2, 5}, {0, -1, 0}},
                           {{0.2, 2, 0.2}, {0, -1, 0}}};
  std::vector<Hit> hits = cast_rays(index, rays, 9);
  REQUIRE(hits.size() == 2);
  for (const Hit& h : hits) {
    CHECK(h.lidar_id == 9);
    CHECK(h.instance_id == 3);
  }
}

TEST_CASE("ring_positions places n points on the ring") {
  // Radius forced to 1: lx = lz = sqrt(2) gives R = r * 1.
  std::vector<Vec3> ring = ring_positions(0, 0, std::sqrt(2.0), std::sqrt(2.0), 4, 1.0, 1.0);
  REQUIRE(ring.size() == 4);
  CHECK(norm(ring[0] - Vec3{1, 1, 0}) < 1e-12);
  CHECK(norm(ring[1] - Vec3{0, 1, 1}) < 1e-12);
  CHECK(norm(ring[2] - Vec3{-1, 1, 0}) < 1e-12);
  CHECK(norm(ring[3] - Vec3{0, 1, -1}) < 1e-12);
}

TEST_CASE("ring radius follows the half-diagonal formula") {
  std::vector<Vec3> ring = ring_positions(0, 0, 2.0, 2.0, 1, 0.5, 3.0);
  CHECK(norm(Vec3{ring[0].x, 0, ring[0].z}) == doctest::Approx(3.0 * std::sqrt(2.0)));
  CHECK(ring[0].y == doctest::Approx(0.5));
}

TEST_CASE("36 ring positions are pairwise distinct at the given height") {
  std::vector<Vec3> ring = ring_positions(0.3, -0.2, 2.0, 2.0, 36, 1.0, 3.0);
  REQUIRE(ring.size() == 36);
  for (size_t i = 0; i < ring.size(); ++i) {
    CHECK(ring[i].y == doctest::Approx(1.0));
    for (size_t j = i + 1; j < ring.size(); ++j) CHECK(norm(ring[i] - ring[j]) > 1e-6);
  }
}

TEST_CASE("grid_endpoints counts and plane") {
  std::vector<Vec3> grid = grid_endpoints(0, 0, 2.0, 2.0, 1.2, 0.02);
  CHECK(grid.size() == 14641);  // 121 x 121

  std::vector<Vec3> small = grid_endpoints(0, 0, 1.0, 1.0, 1.0, 0.5);
  CHECK(small.size() == 9);
  for (const Vec3& p : small) CHECK(p.y == 0.0);
}

TEST_CASE("disk_rays ring layout") {
  // One ring of radius 1 at arc spacing pi/2: four endpoints 90 degrees apart.
  std::vector<Ray> rays = disk_rays({0, 0, -2}, {0, 0, 0}, 1.0, kPi / 2.0, 1.0);
  REQUIRE(rays.size() == 5);  // central + 4
  CHECK(norm(rays[0].dir - Vec3{0, 0, 1}) < 1e-12);
  // Ray endpoints on the z=0 plane form the unit circle.
  std::vector<Vec3> endpoints;
  for (size_t i = 1; i < rays.size(); ++i) {
    const Ray& r = rays[i];
    double t = -r.pos.z / r.dir.z;
    endpoints.push_back(r.pos + r.dir * t);
  }
  for (const Vec3& e : endpoints) CHECK(std::hypot(e.x, e.y) == doctest::Approx(1.0));
  for (size_t i = 0; i < endpoints.size(); ++i) {
    Vec3 a = endpoints[i], b = endpoints[(i + 1) % endpoints.size()];
    double angle = std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0));
    CHECK(angle == doctest::Approx(kPi / 2.0));
  }
}

TEST_CASE("disk_rays endpoint count per ring follows the arc-spacing formula") {
  std::vector<Ray> rays = disk_rays({0, 0, -5}, {0, 0, 0}, 3.0, 0.2, 1.0);
  // floor(2*pi*r / 0.2) for r = 1, 2, 3.
  size_t expected = 1 + 31 + 62 + 94;
  CHECK(rays.size() == expected);
}

TEST_CASE("disk basis is orthonormal for random sensor placements") {
  RngStream rng(5, "disk_basis");
  for (int i = 0; i < 100; ++i) {
    Vec3 sensor = rng.unit_vector() * rng.uniform(0.5, 4.0);
    Vec3 center = rng.unit_vector() * rng.uniform(0.0, 0.3);
    Vec3 n = normalized(center - sensor);
    Vec3 u, v;
    plane_basis(n, u, v);
    CHECK(std::fabs(dot(u, v)) < 1e-9);
    CHECK(std::fabs(dot(u, n)) < 1e-9);
    CHECK(std::fabs(dot(v, n)) < 1e-9);
    CHECK(norm(u) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("sphere_directions basics") {
  std::vector<Vec3> one = sphere_directions(1);
  REQUIRE(one.size() == 1);
  CHECK(norm(one[0]) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<Vec3> dirs = sphere_directions(500, 17);
  for (const Vec3& d : dirs) CHECK(std::fabs(norm(d) - 1.0) < 1e-12);

  std::vector<Vec3> again = sphere_directions(500, 17);
  for (size_t i = 0; i < dirs.size(); ++i) CHECK(norm(dirs[i] - again[i]) == 0.0);

  std::vector<Vec3> other = sphere_directions(500, 18);
  double diff = 0;
  for (size_t i = 0; i < dirs.size(); ++i) diff += norm(dirs[i] - other[i]);
  CHECK(diff > 1.0);  // a different seed rotates the lattice
}

TEST_CASE("sphere_directions spread: minimum pairwise angle at n=1000") {
  std::vector<Vec3> dirs = sphere_directions(1000);
  double min_angle = 1e9;
  for (size_t i = 0; i < dirs.size(); ++i)
    for (size_t j = i + 1; j < dirs.size(); ++j) {
      double c = std::clamp(dot(dirs[i], dirs[j]), -1.0, 1.0);
      min_angle = std::min(min_angle, rad2deg(std::acos(c)));
    }
  CHECK(min_angle >= 3.5);
}
