#include "raycast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rock {

void SceneIndex::add_instance(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation,
                              int32_t instance_id) {
  if (built_) fail(ErrorKind::invalid_argument, "scene index already built");
  for (const Instance& inst : instances_)
    if (inst.instance_id == instance_id)
      fail(ErrorKind::invalid_argument, "duplicate instance id " + std::to_string(instance_id));
  Instance inst{instance_id, tri_a_.size(), mesh.faces.size()};
  for (const auto& f : mesh.faces) {
    tri_a_.push_back(rotation * mesh.vertices[f[0]] + translation);
    tri_b_.push_back(rotation * mesh.vertices[f[1]] + translation);
    tri_c_.push_back(rotation * mesh.vertices[f[2]] + translation);
    if (mesh.has_colors()) {
      col_a_.push_back(mesh.vertex_colors[f[0]]);
      col_b_.push_back(mesh.vertex_colors[f[1]]);
      col_c_.push_back(mesh.vertex_colors[f[2]]);
    } else {
      col_a_.push_back({});
      col_b_.push_back({});
      col_c_.push_back({});
    }
    tri_instance_.push_back(instance_id);
  }
  instances_.push_back(inst);
}

uint32_t SceneIndex::build_node(std::vector<uint32_t>& order, uint32_t begin, uint32_t end) {
  uint32_t node_id = uint32_t(nodes_.size());
  nodes_.push_back({});
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  Vec3 clo = lo, chi = hi;  // centroid bounds drive the split
  for (uint32_t i = begin; i < end; ++i) {
    uint32_t t = order[i];
    Vec3 tlo = min3(min3(tri_a_[t], tri_b_[t]), tri_c_[t]);
    Vec3 thi = max3(max3(tri_a_[t], tri_b_[t]), tri_c_[t]);
    lo = min3(lo, tlo);
    hi = max3(hi, thi);
    Vec3 c = (tlo + thi) * 0.5;
    clo = min3(clo, c);
    chi = max3(chi, c);
  }
  nodes_[node_id].lo = lo;
  nodes_[node_id].hi = hi;

  uint32_t count = end - begin;
  Vec3 spread = chi - clo;
  if (count <= 4 || (spread.x <= 0 && spread.y <= 0 && spread.z <= 0)) {
    nodes_[node_id].first = begin;
    nodes_[node_id].count = count;
    return node_id;
  }
  int axis = spread.x >= spread.y && spread.x >= spread.z ? 0 : (spread.y >= spread.z ? 1 : 2);
  uint32_t mid = begin + count / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](uint32_t a, uint32_t b) {
                     auto centroid = [&](uint32_t t) {
                       return (tri_a_[t][axis] + tri_b_[t][axis] + tri_c_[t][axis]) / 3.0;
                     };
                     return centroid(a) < centroid(b);
                   });
  uint32_t left = build_node(order, begin, mid);
  uint32_t right = build_node(order, mid, end);
  nodes_[node_id].left = left;
  nodes_[node_id].right = right;
  nodes_[node_id].count = 0;
  return node_id;
}

void SceneIndex::build() {
  if (built_) return;
  if (tri_a_.empty()) fail(ErrorKind::invalid_argument, "scene index has no triangles");
  tri_order_.resize(tri_a_.size());
  std::iota(tri_order_.begin(), tri_order_.end(), 0u);
  nodes_.reserve(tri_a_.size() / 2 + 1);
  build_node(tri_order_, 0, uint32_t(tri_order_.size()));
  scene_extent_ = norm(nodes_[0].hi - nodes_[0].lo);
  built_ = true;
}

bool SceneIndex::intersect_triangle(size_t idx, const Ray& ray, double t_min, double& t, double& u,
                                    double& v) const {
  // Moller-Trumbore.
  const Vec3& a = tri_a_[idx];
  Vec3 e1 = tri_b_[idx] - a;
  Vec3 e2 = tri_c_[idx] - a;
  Vec3 p = cross(ray.dir, e2);
  double det = dot(e1, p);
  if (std::fabs(det) < 1e-14) return false;
  double inv = 1.0 / det;
  Vec3 s = ray.pos - a;
  u = dot(s, p) * inv;
  if (u < 0.0 || u > 1.0) return false;
  Vec3 q = cross(s, e1);
  v = dot(ray.dir, q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  t = dot(e2, q) * inv;
  return t > t_min;
}

Hit SceneIndex::make_hit(size_t idx, const Ray& ray, double t, double u, double v) const {
  Hit h;
  h.t = t;
  h.point = ray.pos + ray.dir * t;
  h.instance_id = tri_instance_[idx];
  double w = 1.0 - u - v;
  auto blend = [&](uint8_t ca, uint8_t cb, uint8_t cc) {
    return uint8_t(std::clamp(w * ca + u * cb + v * cc, 0.0, 255.0) + 0.5);
  };
  h.rgb = {blend(col_a_[idx].r, col_b_[idx].r, col_c_[idx].r),
           blend(col_a_[idx].g, col_b_[idx].g, col_c_[idx].g),
           blend(col_a_[idx].b, col_b_[idx].b, col_c_[idx].b)};
  return h;
}

namespace {

inline bool slab_hit(const Vec3& lo, const Vec3& hi, const Vec3& pos, const Vec3& inv_dir,
                     double t_best) {
  double t0 = (lo.x - pos.x) * inv_dir.x;
  double t1 = (hi.x - pos.x) * inv_dir.x;
  double tmin = std::min(t0, t1), tmax = std::max(t0, t1);
  t0 = (lo.y - pos.y) * inv_dir.y;
  t1 = (hi.y - pos.y) * inv_dir.y;
  tmin = std::max(tmin, std::min(t0, t1));
  tmax = std::min(tmax, std::max(t0, t1));
  t0 = (lo.z - pos.z) * inv_dir.z;
  t1 = (hi.z - pos.z) * inv_dir.z;
  tmin = std::max(tmin, std::min(t0, t1));
  tmax = std::min(tmax, std::max(t0, t1));
  return tmax >= std::max(tmin, 0.0) && tmin < t_best;
}

}  // namespace

std::optional<Hit> SceneIndex::cast(const Ray& ray) const {
  if (!built_) fail(ErrorKind::invalid_argument, "scene index not built");
  double t_min = 1e-7 * scene_extent_;
  Vec3 inv_dir{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};

  double best_t = 1e300;
  size_t best_idx = SIZE_MAX;
  double best_u = 0, best_v = 0;

  uint32_t stack[64];
  int sp = 0;
  stack[sp++] = 0;
  while (sp > 0) {
    const Node& node = nodes_[stack[--sp]];
    if (!slab_hit(node.lo, node.hi, ray.pos, inv_dir, best_t)) continue;
    if (node.count > 0) {
      for (uint32_t i = node.first; i < node.first + node.count; ++i) {
        size_t idx = tri_order_[i];
        double t, u, v;
        if (intersect_triangle(idx, ray, t_min, t, u, v) && t < best_t) {
          best_t = t;
          best_idx = idx;
          best_u = u;
          best_v = v;
        }
      }
    } else {
      stack[sp++] = node.left;
      stack[sp++] = node.right;
    }
  }
  if (best_idx == SIZE_MAX) return std::nullopt;
  return make_hit(best_idx, ray, best_t, best_u, best_v);
}

std::optional<Hit> SceneIndex::cast_brute_force(const Ray& ray) const {
  double t_min = 1e-7 * scene_extent_;
  double best_t = 1e300;
  size_t best_idx = SIZE_MAX;
  double best_u = 0, best_v = 0;
  for (size_t idx = 0; idx < tri_a_.size(); ++idx) {
    double t, u, v;
    if (intersect_triangle(idx, ray, t_min, t, u, v) && t < best_t) {
      best_t = t;
      best_idx = idx;
      best_u = u;
      best_v = v;
    }
  }
  if (best_idx == SIZE_MAX) return std::nullopt;
  return make_hit(best_idx, ray, best_t, best_u, best_v);
}

std::vector<Hit> cast_rays(const SceneIndex& index, const std::vector<Ray>& rays,
                           uint16_t lidar_id) {
  std::vector<std::optional<Hit>> per_ray(rays.size());
  parallel_for(rays.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) per_ray[i] = index.cast(rays[i]);
  });
  std::vector<Hit> hits;
  hits.reserve(rays.size());
  for (auto& h : per_ray) {
    if (!h) continue;
    h->lidar_id = lidar_id;
    hits.push_back(*h);
  }
  return hits;
}

std::vector<Vec3> ring_positions(double center_x, double center_z, double lx, double lz, int n,
                                 double height, double radius_factor) {
  if (n < 1) fail(ErrorKind::invalid_argument, "need at least one ring position");
  double radius = radius_factor * std::sqrt(lx * lx + lz * lz) / 2.0;
  std::vector<Vec3> out;
  out.reserve(size_t(n));
  double step = 2.0 * kPi / n;
  for (int i = 0; i < n; ++i) {
    double angle = double(i) * step;
    out.push_back({center_x + radius * std::cos(angle), height, center_z + radius * std::sin(angle)});
  }
  return out;
}

std::vector<Vec3> grid_endpoints(double center_x, double center_z, double lx, double lz,
                                 double enlargement, double d) {
  if (d <= 0.0) fail(ErrorKind::invalid_argument, "grid spacing must be positive");
  double ex = lx * enlargement, ez = lz * enlargement;
  int nx = int(std::floor(ex / d + 1e-9)) + 1;
  int nz = int(std::floor(ez / d + 1e-9)) + 1;
  std::vector<Vec3> out;
  out.reserve(size_t(nx) * size_t(nz));
  double x0 = center_x - ex / 2.0, z0 = center_z - ez / 2.0;
  for (int iz = 0; iz < nz; ++iz)
    for (int ix = 0; ix < nx; ++ix)
      out.push_back({x0 + ix * d, 0.0, z0 + iz * d});
  return out;
}

std::vector<Ray> disk_rays(const Vec3& sensor_pos, const Vec3& target_center, double disk_radius,
                           double arc_spacing, double ring_spacing) {
  if (disk_radius <= 0 || arc_spacing <= 0 || ring_spacing <= 0)
    fail(ErrorKind::invalid_argument, "disk parameters must be positive");
  Vec3 n = target_center - sensor_pos;
  double dist = norm(n);
  if (dist < 1e-12) fail(ErrorKind::invalid_argument, "sensor coincides with target");
  n = n / dist;
  Vec3 u, v;
  plane_basis(n, u, v);

  std::vector<Ray> rays;
  rays.push_back({sensor_pos, n});  // central ray
  for (double r = ring_spacing; r <= disk_radius + 1e-12; r += ring_spacing) {
    int count = int(std::floor(2.0 * kPi * r / arc_spacing));
    if (count < 1) continue;
    double step = 2.0 * kPi / count;
    for (int k = 0; k < count; ++k) {
      double theta = k * step;
      Vec3 endpoint = target_center + u * (r * std::cos(theta)) + v * (r * std::sin(theta));
      rays.push_back({sensor_pos, normalized(endpoint - sensor_pos)});
    }
  }
  return rays;
}

std::vector<Vec3> sphere_directions(int n, uint64_t seed) {
  if (n < 1) fail(ErrorKind::invalid_argument, "need at least one direction");
  std::vector<Vec3> out;
  out.reserve(size_t(n));
  // Offset Fibonacci lattice; the half-sample shift avoids pole crowding.
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / n;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden_angle * i;
    out.push_back({r * std::cos(phi), z, r * std::sin(phi)});
  }
  if (seed != 0) {
    Mat3 rot = seeded_rotation(seed, "sphere_directions");
    for (Vec3& d : out) d = rot * d;
  }
  return out;
}

}  // namespace rock
