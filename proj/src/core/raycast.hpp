#ifndef ROCKMORPH_RAYCAST_HPP
#define ROCKMORPH_RAYCAST_HPP

// The ray engine: a BVH over instanced mesh scenes plus the ray-pattern
// generators (camera ring, ground grid, sensor disk, sphere directions).
// A built SceneIndex is immutable; cast() is safe under concurrent callers.

#include <cstdint>
#include <optional>
#include <vector>

#include "common.hpp"
#include "mesh.hpp"

namespace rock {

struct Ray {
  Vec3 pos;
  Vec3 dir;  // unit
};

struct Hit {
  Vec3 point;
  Rgb8 rgb;
  uint16_t lidar_id = 0;
  int32_t instance_id = -1;
  double t = 0.0;
};

class SceneIndex {
public:
  struct Instance {
    int32_t instance_id;
    size_t first_triangle;  // into the flattened triangle arrays
    size_t triangle_count;
  };

  SceneIndex() = default;

  // World-space triangles are flattened at build time.
  void add_instance(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation,
                    int32_t instance_id);
  void build();
  bool built() const { return built_; }

  size_t triangle_count() const { return tri_a_.size(); }
  const std::vector<Instance>& instances() const { return instances_; }
  double scene_extent() const { return scene_extent_; }

  // Nearest hit beyond the self-intersection epsilon; nullopt on a miss.
  std::optional<Hit> cast(const Ray& ray) const;

  // Exhaustive nearest-triangle reference; used by the exactness tests.
  std::optional<Hit> cast_brute_force(const Ray& ray) const;

private:
  struct Node {
    Vec3 lo, hi;
    uint32_t left = 0, right = 0;     // children when count == 0
    uint32_t first = 0, count = 0;    // leaf triangle range
  };

  bool intersect_triangle(size_t idx, const Ray& ray, double t_min, double& t, double& u,
                          double& v) const;
  Hit make_hit(size_t idx, const Ray& ray, double t, double u, double v) const;
  uint32_t build_node(std::vector<uint32_t>& order, uint32_t begin, uint32_t end);

  std::vector<Vec3> tri_a_, tri_b_, tri_c_;
  std::vector<Rgb8> col_a_, col_b_, col_c_;
  std::vector<int32_t> tri_instance_;
  std::vector<Instance> instances_;
  std::vector<Node> nodes_;
  std::vector<uint32_t> tri_order_;
  double scene_extent_ = 0.0;
  bool built_ = false;
};

// Nearest-hit per ray; misses are dropped. Parallel over rays, hit order
// follows ray order.
std::vector<Hit> cast_rays(const SceneIndex& index, const std::vector<Ray>& rays,
                           uint16_t lidar_id);

// Ring of positions at height h around the region center:
// radius = radius_factor * sqrt(lx^2 + lz^2) / 2, positions every 2*pi/n
// starting on the +X axis.
std::vector<Vec3> ring_positions(double center_x, double center_z, double lx, double lz, int n,
                                 double height, double radius_factor);

// Inclusive lattice of ground-plane (y = 0) targets over the enlarged
// region; spacing d, (floor(lx*e/d)+1) * (floor(lz*e/d)+1) points.
std::vector<Vec3> grid_endpoints(double center_x, double center_z, double lx, double lz,
                                 double enlargement, double d);

// Rays from the sensor through a disk of endpoints facing the target:
// concentric rings (spacing ring_spacing, up to disk_radius) with constant
// arc spacing along each ring, plus one central ray.
std::vector<Ray> disk_rays(const Vec3& sensor_pos, const Vec3& target_center, double disk_radius,
                           double arc_spacing, double ring_spacing);

// n near-uniform unit vectors from a Fibonacci lattice; the seed only
// rotates the lattice (seed 0 = canonical orientation).
std::vector<Vec3> sphere_directions(int n, uint64_t seed = 0);

}  // namespace rock

#endif
