#include "voxel.hpp"

#include <algorithm>
#include <cmath>

namespace rock {

VoxelGrid::VoxelGrid(Vec3 origin_, double cell, int nx_, int ny_, int nz_)
    : origin(origin_), cell_size(cell), nx(nx_), ny(ny_), nz(nz_) {
  if (cell <= 0.0) fail(ErrorKind::invalid_argument, "cell_size must be positive");
  if (nx <= 0 || ny <= 0 || nz <= 0) fail(ErrorKind::invalid_argument, "grid dims must be positive");
  occupancy.assign(size_t(nx) * size_t(ny) * size_t(nz), 0);
}

size_t VoxelGrid::occupied_count() const {
  size_t n = 0;
  for (uint8_t v : occupancy) n += v;
  return n;
}

namespace {

// Crossing heights of the vertical line (x, z) with a triangle, projected to
// the XZ plane. Uses an inclusive-exclusive edge rule so a line crossing a
// shared edge is counted for exactly one of the two triangles.
bool column_hit(const Vec3& a, const Vec3& b, const Vec3& c, double x, double z, double& y_out) {
  double d1 = (b.x - a.x) * (z - a.z) - (b.z - a.z) * (x - a.x);
  double d2 = (c.x - b.x) * (z - b.z) - (c.z - b.z) * (x - b.x);
  double d3 = (a.x - c.x) * (z - c.z) - (a.z - c.z) * (x - c.x);
  bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
  bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
  if (has_neg && has_pos) return false;
  // Degenerate (projected sliver) or on-boundary columns are handled by the
  // caller's jitter fallback when the parity comes out odd.
  Vec3 n = cross(b - a, c - a);
  if (std::fabs(n.y) < 1e-300) return false;
  y_out = a.y - ((x - a.x) * n.x + (z - a.z) * n.z) / n.y;
  return true;
}

}  // namespace

VoxelGrid voxelize(const TriMesh& mesh, double cell_size) {
  if (cell_size <= 0.0) fail(ErrorKind::invalid_argument, "cell_size must be positive");
  if (mesh.faces.empty() || !is_watertight(mesh))
    fail(ErrorKind::domain, "voxelize requires a watertight mesh");

  Vec3 lo = mesh.bbox_min(), hi = mesh.bbox_max();
  Vec3 extent = hi - lo;
  double max_extent = std::max({extent.x, extent.y, extent.z});
  if (cell_size > max_extent)
    fail(ErrorKind::invalid_argument, "cell_size larger than the mesh extent");

  // Quarter-cell offset keeps cell centers off axis-aligned surfaces, the
  // common degenerate case for box-like meshes.
  Vec3 origin = lo - Vec3{cell_size, cell_size, cell_size} * 0.75;
  int nx = int(std::ceil((extent.x + 1.5 * cell_size) / cell_size));
  int ny = int(std::ceil((extent.y + 1.5 * cell_size) / cell_size));
  int nz = int(std::ceil((extent.z + 1.5 * cell_size) / cell_size));
  VoxelGrid grid(origin, cell_size, nx, ny, nz);

  // Bin triangles by the XZ cells their projection can touch.
  std::vector<std::vector<uint32_t>> bins(size_t(nx) * size_t(nz));
  for (uint32_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const auto& f = mesh.faces[fi];
    Vec3 tlo = min3(min3(mesh.vertices[f[0]], mesh.vertices[f[1]]), mesh.vertices[f[2]]);
    Vec3 thi = max3(max3(mesh.vertices[f[0]], mesh.vertices[f[1]]), mesh.vertices[f[2]]);
    int x0 = std::max(0, int(std::floor((tlo.x - origin.x) / cell_size - 0.5)));
    int x1 = std::min(nx - 1, int(std::floor((thi.x - origin.x) / cell_size)));
    int z0 = std::max(0, int(std::floor((tlo.z - origin.z) / cell_size - 0.5)));
    int z1 = std::min(nz - 1, int(std::floor((thi.z - origin.z) / cell_size)));
    for (int z = z0; z <= z1; ++z)
      for (int x = x0; x <= x1; ++x)
        bins[size_t(z) * size_t(nx) + size_t(x)].push_back(fi);
  }

  parallel_for(size_t(nz), [&](size_t zb, size_t ze) {
    std::vector<double> crossings;
    for (size_t z = zb; z < ze; ++z) {
      for (int x = 0; x < nx; ++x) {
        const auto& tris = bins[z * size_t(nx) + size_t(x)];
        if (tris.empty()) continue;
        double cx = origin.x + (x + 0.5) * cell_size;
        double cz = origin.z + (double(z) + 0.5) * cell_size;
        // Columns grazing an edge or vertex produce odd parity or duplicated
        // crossings; nudge the column until the crossing list is clean.
        for (int attempt = 0;; ++attempt) {
          crossings.clear();
          double px = cx + attempt * 3.1e-4 * cell_size;
          double pz = cz + attempt * 5.3e-4 * cell_size;
          for (uint32_t fi : tris) {
            const auto& f = mesh.faces[fi];
            double y;
            if (column_hit(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]], px, pz, y))
              crossings.push_back(y);
          }
          std::sort(crossings.begin(), crossings.end());
          bool duplicated = false;
          for (size_t k = 0; k + 1 < crossings.size(); ++k)
            if (crossings[k + 1] - crossings[k] < 1e-12 * max_extent) {
              duplicated = true;
              break;
            }
          if ((crossings.size() % 2 == 0 && !duplicated) || attempt >= 8) break;
        }
        if (crossings.size() < 2) continue;
        for (size_t k = 0; k + 1 < crossings.size(); k += 2) {
          int y0 = int(std::ceil((crossings[k] - origin.y) / cell_size - 0.5));
          int y1 = int(std::floor((crossings[k + 1] - origin.y) / cell_size - 0.5));
          y0 = std::max(y0, 0);
          y1 = std::min(y1, ny - 1);
          for (int y = y0; y <= y1; ++y) grid.set(x, int(y), int(z), true);
        }
      }
    }
  });

  return grid;
}

}  // namespace rock
