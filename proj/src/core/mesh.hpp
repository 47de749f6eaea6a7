#ifndef ROCKMORPH_MESH_HPP
#define ROCKMORPH_MESH_HPP

// Triangle mesh type plus loaders and the exact geometric measures the rest
// of the toolkit builds on. Meshes are treated as immutable values: every
// operation returns a new mesh or plain numbers.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace rock {

struct Rgb8 {
  uint8_t r = 200, g = 200, b = 200;
};

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<uint32_t, 3>> faces;
  std::vector<Rgb8> vertex_colors;  // empty or one per vertex
  // Set by loaders when the edge-sharing check fails; volume queries on such
  // meshes report no value rather than a wrong one.
  bool non_manifold = false;

  bool has_colors() const { return !vertex_colors.empty(); }
  size_t vertex_count() const { return vertices.size(); }
  size_t face_count() const { return faces.size(); }

  Vec3 bbox_min() const;
  Vec3 bbox_max() const;
};

struct MeshMeasures {
  std::optional<double> volume;    // absent when the mesh is not watertight
  double surface_area = 0.0;
  std::optional<Vec3> centroid;    // solid centroid; absent with volume
};

// Every edge shared by exactly two faces.
bool is_watertight(const TriMesh& mesh);

// OBJ (v/f, optional xyzrgb vertex colors) or PLY (ascii and
// binary_little_endian) by extension. Coordinates are multiplied by
// unit_scale on load. Parse failures carry a line number where available.
TriMesh load_mesh(const std::string& path, double unit_scale = 1.0);

void save_mesh_obj(const TriMesh& mesh, const std::string& path);
void save_mesh_ply(const TriMesh& mesh, const std::string& path, bool binary = true);
// Dispatches on extension (.obj / .ply).
void save_mesh(const TriMesh& mesh, const std::string& path);

// Volume by signed tetrahedron sum (reported as the absolute value, so
// inconsistent winding from scans cannot flip the sign), area by triangle
// sum, solid centroid via the same decomposition.
MeshMeasures mesh_measures(const TriMesh& mesh);

// Translates so the vertex mean is at the origin.
TriMesh recenter(const TriMesh& mesh);

TriMesh transformed(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation);
TriMesh scaled(const TriMesh& mesh, double factor);

// Quadric edge-collapse simplification. Contract: face count <= target_faces
// and volume drift stays small (<= 5% for targets >= 500 on library-scale
// meshes). Meshes already under target are returned unchanged.
TriMesh decimate(const TriMesh& mesh, size_t target_faces);

}  // namespace rock

#endif
