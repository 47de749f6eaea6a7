#ifndef ROCKMORPH_VOXEL_HPP
#define ROCKMORPH_VOXEL_HPP

// Axis-aligned occupancy lattice. Medium for silhouette intersection and
// for the stockpile settling collision field.

#include <cstdint>
#include <vector>

#include "common.hpp"
#include "mesh.hpp"

namespace rock {

struct VoxelGrid {
  Vec3 origin{0, 0, 0};
  double cell_size = 1.0;
  int nx = 0, ny = 0, nz = 0;
  std::vector<uint8_t> occupancy;  // nx*ny*nz, x fastest then y then z

  VoxelGrid() = default;
  VoxelGrid(Vec3 origin_, double cell, int nx_, int ny_, int nz_);

  size_t index(int x, int y, int z) const {
    return (size_t(z) * size_t(ny) + size_t(y)) * size_t(nx) + size_t(x);
  }
  bool at(int x, int y, int z) const { return occupancy[index(x, y, z)] != 0; }
  void set(int x, int y, int z, bool v) { occupancy[index(x, y, z)] = v ? 1 : 0; }
  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
  }

  Vec3 cell_center(int x, int y, int z) const {
    return origin + Vec3{(x + 0.5) * cell_size, (y + 0.5) * cell_size, (z + 0.5) * cell_size};
  }

  size_t occupied_count() const;
  double occupied_volume() const { return double(occupied_count()) * cell_size * cell_size * cell_size; }
};

// Solid voxelization: a cell is occupied when its center lies inside the
// mesh, decided by crossing parity along +Y columns. Requires a watertight
// mesh and cell_size no larger than the mesh extent.
VoxelGrid voxelize(const TriMesh& mesh, double cell_size);

}  // namespace rock

#endif
