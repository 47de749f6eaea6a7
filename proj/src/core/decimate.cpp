#include <algorithm>
#include <queue>
#include <set>
#include <unordered_set>

#include "mesh.hpp"

// Quadric error metric edge-collapse simplification (Garland-Heckbert style).
// Collapses the cheapest valid edge until the face budget is met. Guards:
// link condition (keeps the surface manifold) and normal-flip rejection
// (keeps the volume drift small).

namespace rock {

namespace {

// Symmetric 4x4 quadric stored as the 10 unique coefficients of
// [ A  b ]   with A symmetric 3x3, b 3-vector, c scalar:
// [ bT c ]   q(v) = vT A v + 2 bT v + c
struct Quadric {
  double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;
  double b0 = 0, b1 = 0, b2 = 0;
  double c = 0;

  void add_plane(const Vec3& n, double d, double weight) {
    a00 += weight * n.x * n.x;
    a01 += weight * n.x * n.y;
    a02 += weight * n.x * n.z;
    a11 += weight * n.y * n.y;
    a12 += weight * n.y * n.z;
    a22 += weight * n.z * n.z;
    b0 += weight * d * n.x;
    b1 += weight * d * n.y;
    b2 += weight * d * n.z;
    c += weight * d * d;
  }

  Quadric& operator+=(const Quadric& o) {
    a00 += o.a00; a01 += o.a01; a02 += o.a02;
    a11 += o.a11; a12 += o.a12; a22 += o.a22;
    b0 += o.b0; b1 += o.b1; b2 += o.b2;
    c += o.c;
    return *this;
  }

  double eval(const Vec3& v) const {
    double ax = a00 * v.x + a01 * v.y + a02 * v.z;
    double ay = a01 * v.x + a11 * v.y + a12 * v.z;
    double az = a02 * v.x + a12 * v.y + a22 * v.z;
    return v.x * ax + v.y * ay + v.z * az + 2.0 * (b0 * v.x + b1 * v.y + b2 * v.z) + c;
  }

  // Minimizer of q(v); false when A is (near-)singular.
  bool minimizer(Vec3& out) const {
    double det = a00 * (a11 * a22 - a12 * a12) - a01 * (a01 * a22 - a12 * a02) +
                 a02 * (a01 * a12 - a11 * a02);
    double scale = std::max({std::fabs(a00), std::fabs(a11), std::fabs(a22), 1e-300});
    if (std::fabs(det) < 1e-10 * scale * scale * scale) return false;
    double inv = 1.0 / det;
    double i00 = (a11 * a22 - a12 * a12) * inv;
    double i01 = (a02 * a12 - a01 * a22) * inv;
    double i02 = (a01 * a12 - a02 * a11) * inv;
    double i11 = (a00 * a22 - a02 * a02) * inv;
    double i12 = (a02 * a01 - a00 * a12) * inv;
    double i22 = (a00 * a11 - a01 * a01) * inv;
    out = {-(i00 * b0 + i01 * b1 + i02 * b2),
           -(i01 * b0 + i11 * b1 + i12 * b2),
           -(i02 * b0 + i12 * b1 + i22 * b2)};
    return true;
  }
};

struct HeapEntry {
  double cost;
  uint32_t v0, v1;
  uint64_t stamp;  // sum of vertex versions at push time; stale entries are skipped
  bool operator>(const HeapEntry& o) const { return cost > o.cost; }
};

struct Connectivity {
  std::vector<Vec3> pos;
  std::vector<Quadric> quadric;
  std::vector<std::vector<uint32_t>> vfaces;  // incident face ids
  std::vector<std::array<uint32_t, 3>> faces;
  std::vector<bool> face_alive;
  std::vector<bool> vert_alive;
  std::vector<uint64_t> version;
  size_t alive_faces = 0;
};

Vec3 face_normal(const Connectivity& c, uint32_t fi) {
  const auto& f = c.faces[fi];
  return cross(c.pos[f[1]] - c.pos[f[0]], c.pos[f[2]] - c.pos[f[0]]);
}

std::vector<uint32_t> neighbor_vertices(const Connectivity& c, uint32_t v) {
  std::vector<uint32_t> out;
  for (uint32_t fi : c.vfaces[v]) {
    if (!c.face_alive[fi]) continue;
    for (uint32_t w : c.faces[fi])
      if (w != v) out.push_back(w);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Candidate position for collapsing (v0, v1): quadric minimizer when well
// conditioned, else the best of endpoints and midpoint.
Vec3 collapse_target(const Connectivity& c, uint32_t v0, uint32_t v1, const Quadric& q,
                     double& cost) {
  Vec3 best;
  if (q.minimizer(best)) {
    cost = q.eval(best);
    return best;
  }
  Vec3 mid = (c.pos[v0] + c.pos[v1]) * 0.5;
  Vec3 candidates[3] = {c.pos[v0], c.pos[v1], mid};
  cost = q.eval(candidates[0]);
  best = candidates[0];
  for (int i = 1; i < 3; ++i) {
    double e = q.eval(candidates[i]);
    if (e < cost) {
      cost = e;
      best = candidates[i];
    }
  }
  return best;
}

}  // namespace

TriMesh decimate(const TriMesh& mesh, size_t target_faces) {
  if (target_faces < 4)
    fail(ErrorKind::invalid_argument, "target_faces below the smallest closed surface");
  if (mesh.face_count() <= target_faces) return mesh;

  Connectivity c;
  c.pos = mesh.vertices;
  c.faces = mesh.faces;
  c.quadric.resize(mesh.vertex_count());
  c.vfaces.resize(mesh.vertex_count());
  c.face_alive.assign(mesh.face_count(), true);
  c.vert_alive.assign(mesh.vertex_count(), true);
  c.version.assign(mesh.vertex_count(), 0);
  c.alive_faces = mesh.face_count();

  for (uint32_t fi = 0; fi < c.faces.size(); ++fi) {
    const auto& f = c.faces[fi];
    for (uint32_t v : f) c.vfaces[v].push_back(fi);
    Vec3 n = face_normal(c, fi);
    double len = norm(n);
    if (len < 1e-30) continue;
    n *= 1.0 / len;
    double area = 0.5 * len;
    c.quadric[f[0]].add_plane(n, -dot(n, c.pos[f[0]]), area);
    c.quadric[f[1]].add_plane(n, -dot(n, c.pos[f[1]]), area);
    c.quadric[f[2]].add_plane(n, -dot(n, c.pos[f[2]]), area);
  }

  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
  auto push_edge = [&](uint32_t a, uint32_t b) {
    if (a > b) std::swap(a, b);
    Quadric q = c.quadric[a];
    q += c.quadric[b];
    double cost;
    collapse_target(c, a, b, q, cost);
    heap.push({cost, a, b, c.version[a] + c.version[b]});
  };

  {
    std::unordered_set<uint64_t> seen;
    for (const auto& f : c.faces)
      for (int e = 0; e < 3; ++e) {
        uint32_t a = f[size_t(e)], b = f[size_t((e + 1) % 3)];
        if (a > b) std::swap(a, b);
        if (seen.insert(uint64_t(a) << 32 | b).second) push_edge(a, b);
      }
  }

  while (c.alive_faces > target_faces && !heap.empty()) {
    HeapEntry top = heap.top();
    heap.pop();
    uint32_t v0 = top.v0, v1 = top.v1;
    if (!c.vert_alive[v0] || !c.vert_alive[v1]) continue;
    if (top.stamp != c.version[v0] + c.version[v1]) continue;  // stale

    // Edge must still exist.
    bool edge_exists = false;
    for (uint32_t fi : c.vfaces[v0]) {
      if (!c.face_alive[fi]) continue;
      const auto& f = c.faces[fi];
      if (f[0] == v1 || f[1] == v1 || f[2] == v1) {
        edge_exists = true;
        break;
      }
    }
    if (!edge_exists) continue;

    // Link condition: shared neighbors must be exactly the two opposite
    // vertices of the edge's two faces, else the collapse pinches the surface.
    std::vector<uint32_t> n0 = neighbor_vertices(c, v0);
    std::vector<uint32_t> n1 = neighbor_vertices(c, v1);
    std::vector<uint32_t> shared;
    std::set_intersection(n0.begin(), n0.end(), n1.begin(), n1.end(), std::back_inserter(shared));
    if (shared.size() != 2) continue;

    Quadric q = c.quadric[v0];
    q += c.quadric[v1];
    double cost;
    Vec3 target = collapse_target(c, v0, v1, q, cost);

    // Reject collapses that flip any surviving face normal.
    bool flip = false;
    for (uint32_t who : {v0, v1}) {
      for (uint32_t fi : c.vfaces[who]) {
        if (!c.face_alive[fi]) continue;
        const auto& f = c.faces[fi];
        bool dies = (f[0] == v0 || f[1] == v0 || f[2] == v0) &&
                    (f[0] == v1 || f[1] == v1 || f[2] == v1);
        if (dies) continue;
        Vec3 before = face_normal(c, fi);
        Vec3 p[3];
        for (int k = 0; k < 3; ++k) p[k] = f[size_t(k)] == who ? target : c.pos[f[size_t(k)]];
        Vec3 after = cross(p[1] - p[0], p[2] - p[0]);
        if (dot(before, after) <= 0.0) {
          flip = true;
          break;
        }
      }
      if (flip) break;
    }
    if (flip) continue;

    // Commit: v1 merges into v0 at the target position.
    c.pos[v0] = target;
    c.quadric[v0] = q;
    for (uint32_t fi : c.vfaces[v1]) {
      if (!c.face_alive[fi]) continue;
      auto& f = c.faces[fi];
      bool dies = (f[0] == v0 || f[1] == v0 || f[2] == v0);
      if (dies) {
        c.face_alive[fi] = false;
        --c.alive_faces;
      } else {
        for (uint32_t& w : f)
          if (w == v1) w = v0;
        c.vfaces[v0].push_back(fi);
      }
    }
    c.vert_alive[v1] = false;
    ++c.version[v0];
    ++c.version[v1];

    for (uint32_t w : neighbor_vertices(c, v0)) push_edge(v0, w);
  }

  // Compact the result.
  TriMesh out;
  std::vector<uint32_t> remap(c.pos.size(), UINT32_MAX);
  for (uint32_t fi = 0; fi < c.faces.size(); ++fi) {
    if (!c.face_alive[fi]) continue;
    const auto& f = c.faces[fi];
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
    std::array<uint32_t, 3> nf{};
    for (int k = 0; k < 3; ++k) {
      uint32_t v = f[size_t(k)];
      if (remap[v] == UINT32_MAX) {
        remap[v] = uint32_t(out.vertices.size());
        out.vertices.push_back(c.pos[v]);
        if (mesh.has_colors()) out.vertex_colors.push_back(mesh.vertex_colors[v]);
      }
      nf[size_t(k)] = remap[v];
    }
    out.faces.push_back(nf);
  }
  out.non_manifold = !is_watertight(out);
  return out;
}

}  // namespace rock
