#ifndef ROCKMORPH_TEST_FIXTURES_HPP
#define ROCKMORPH_TEST_FIXTURES_HPP

// Procedural fixtures shared across the test suites: canonical meshes,
// mask rasterizers, and scratch-directory helpers.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "common.hpp"
#include "image.hpp"
#include "mesh.hpp"

namespace fixtures {

using rock::BinaryMask;
using rock::TriMesh;
using rock::Vec3;

inline TriMesh make_tetrahedron(double edge = 1.0) {
  TriMesh m;
  double s = edge / std::sqrt(2.0);
  m.vertices = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  m.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  return m;
}

inline TriMesh make_box(double ax, double ay, double az, Vec3 origin = {0, 0, 0}) {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {ax, 0, 0}, {ax, ay, 0}, {0, ay, 0},
                {0, 0, az}, {ax, 0, az}, {ax, ay, az}, {0, ay, az}};
  for (Vec3& v : m.vertices) v += origin;
  m.faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
             {2, 3, 7}, {2, 7, 6}, {1, 2, 6}, {1, 6, 5}, {3, 0, 4}, {3, 4, 7}};
  return m;
}

inline TriMesh make_cube(double edge = 1.0, Vec3 origin = {0, 0, 0}) {
  return make_box(edge, edge, edge, origin);
}

// Open unit square sheet in the XY plane (not watertight).
inline TriMesh make_quad_sheet() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

inline TriMesh make_icosphere(int subdivisions, double radius = 1.0) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : m.vertices) v = normalized(v);
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
             {5, 11, 4}, {11, 10, 2}, {10, 7, 6},  {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
             {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
             {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> midpoints;
    auto midpoint = [&](uint32_t a, uint32_t b) {
      auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      uint32_t idx = uint32_t(m.vertices.size());
      m.vertices.push_back(normalized((m.vertices[a] + m.vertices[b]) * 0.5));
      midpoints[key] = idx;
      return idx;
    };
    std::vector<std::array<uint32_t, 3>> faces;
    faces.reserve(m.faces.size() * 4);
    for (const auto& f : m.faces) {
      uint32_t ab = midpoint(f[0], f[1]);
      uint32_t bc = midpoint(f[1], f[2]);
      uint32_t ca = midpoint(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    m.faces = std::move(faces);
  }
  for (Vec3& v : m.vertices) v *= radius;
  return m;
}

inline TriMesh make_ellipsoid(double a, double b, double c, int subdivisions = 3) {
  TriMesh m = make_icosphere(subdivisions, 1.0);
  for (Vec3& v : m.vertices) {
    v.x *= a;
    v.y *= b;
    v.z *= c;
  }
  return m;
}

// Star-shaped rock: an icosphere with a smooth low-order radial field and a
// mild anisotropic stretch. Watertight by construction.
inline TriMesh make_rock(uint64_t seed, double size = 0.15, int subdivisions = 3,
                         double bumpiness = 0.22) {
  rock::RngStream rng(seed, "fixture_rock");
  double p1 = rng.uniform(0.0, 2 * rock::kPi), p2 = rng.uniform(0.0, 2 * rock::kPi);
  double p3 = rng.uniform(0.0, 2 * rock::kPi);
  double f1 = rng.uniform(1.5, 3.0), f2 = rng.uniform(1.5, 3.0), f3 = rng.uniform(1.5, 3.0);
  double sx = rng.uniform(0.75, 1.3), sy = rng.uniform(0.75, 1.3), sz = rng.uniform(0.75, 1.3);

  TriMesh m = make_icosphere(subdivisions, 1.0);
  for (Vec3& v : m.vertices) {
    double bump = std::sin(f1 * v.x + p1) * std::cos(f2 * v.y + p2) +
                  0.6 * std::sin(f3 * v.z + p3) * std::cos(f1 * v.x + p2);
    double r = 1.0 + bumpiness * 0.5 * bump;
    v = v * r;
    v.x *= sx;
    v.y *= sy;
    v.z *= sz;
    v = v * (size / 2.0);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Mask rasterizers (pixel-center coverage)

inline BinaryMask raster_disc(double diameter_px, int pad = 2) {
  double r = diameter_px / 2.0;
  int n = int(std::ceil(diameter_px)) + 2 * pad;
  BinaryMask mask(n, n);
  double c = n / 2.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double dx = x + 0.5 - c, dy = y + 0.5 - c;
      if (dx * dx + dy * dy <= r * r) mask.set(x, y, true);
    }
  return mask;
}

inline BinaryMask raster_ellipse(double semi_a, double semi_b, double angle_rad = 0.0,
                                 int pad = 4) {
  int n = int(std::ceil(2 * std::max(semi_a, semi_b))) + 2 * pad;
  BinaryMask mask(n, n);
  double c = n / 2.0;
  double ca = std::cos(angle_rad), sa = std::sin(angle_rad);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double dx = x + 0.5 - c, dy = y + 0.5 - c;
      double u = ca * dx + sa * dy, v = -sa * dx + ca * dy;
      if (u * u / (semi_a * semi_a) + v * v / (semi_b * semi_b) <= 1.0) mask.set(x, y, true);
    }
  return mask;
}

inline BinaryMask raster_square(int side_px, int pad = 4) {
  BinaryMask mask(side_px + 2 * pad, side_px + 2 * pad);
  for (int y = 0; y < side_px; ++y)
    for (int x = 0; x < side_px; ++x) mask.set(x + pad, y + pad, true);
  return mask;
}

inline BinaryMask raster_equilateral_triangle(double side_px, int pad = 4) {
  double h = side_px * std::sqrt(3.0) / 2.0;
  int w = int(std::ceil(side_px)) + 2 * pad;
  int ht = int(std::ceil(h)) + 2 * pad;
  BinaryMask mask(w, ht);
  double x0 = pad, y0 = pad;
  // Vertices: (0,h), (side,h), (side/2,0) in local coordinates.
  for (int y = 0; y < ht; ++y)
    for (int x = 0; x < w; ++x) {
      double px = x + 0.5 - x0, py = y + 0.5 - y0;
      if (py < 0 || py > h) continue;
      // Width shrinks linearly toward the apex at py = 0.
      double half = (py / h) * side_px / 2.0;
      double cx = side_px / 2.0;
      if (px >= cx - half && px <= cx + half) mask.set(x, y, true);
    }
  return mask;
}

// ---------------------------------------------------------------------------
// Scratch directories

class TempDir {
public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() / ("rockmorph_test_" + name);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace fixtures

#endif
