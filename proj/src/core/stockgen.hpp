#ifndef ROCKMORPH_STOCKGEN_HPP
#define ROCKMORPH_STOCKGEN_HPP

// Synthetic stockpile pipeline: grid instantiation over the region of
// interest, deterministic drop-and-jitter settling on a voxel occupancy
// field, a two-ring multi-LiDAR scan, and the labeled dataset writer.

#include <string>
#include <vector>

#include "mesh.hpp"
#include "pointcloud.hpp"
#include "raycast.hpp"

namespace rock {

struct StockpileConfig {
  // Region of interest.
  double center_x = 0.0, center_z = 0.0;
  double lx = 2.0, lz = 2.0;
  // Instantiation.
  int grid_n = 7;          // instances per grid side (80% of ROI)
  int layers_min = 6, layers_max = 8;
  // Camera ring (recorded in the manifest for scene inspection).
  int cameras = 36;
  double camera_height = 1.0, camera_radius_factor = 3.0;
  // LiDAR rig: narrow high ring + wide low ring + one central emitter.
  int lidars_ring1 = 6, lidars_ring2 = 8;
  double lidar_height1 = 1.5, lidar_height2 = 1.0;
  double lidar_radius1 = 0.7, lidar_radius2 = 1.5;
  double ray_spacing = 0.02;
  double roi_enlargement = 1.2;
  // Settling.
  double tilt_limit_deg = 15.0;  // roll/pitch range on top of the random yaw
  int jitter_probes = 8;
  uint64_t seed = 0;

  int emitter_count() const { return lidars_ring1 + lidars_ring2 + 1; }
  void validate() const;
};

// Fills in the per-category scene-control presets (RR3 / RR4 / RR3-RR4 mix).
StockpileConfig stockpile_preset(const std::string& category);

struct InstancePose {
  int32_t instance_id = 0;
  int mesh_index = 0;
  Mat3 rotation;
  Vec3 translation;
};

// Samples layers * grid_n^2 instances (with replacement, random yaw plus a
// bounded tilt), then drops them in seeded order onto a voxel occupancy
// field: straight descent to first collision, with jitter probes keeping
// the lowest resting spot. Bit-identical for a given (library, config).
std::vector<InstancePose> assemble_scene(const std::vector<TriMesh>& library,
                                         const StockpileConfig& config);

SceneIndex build_scene_index(const std::vector<TriMesh>& library,
                             const std::vector<InstancePose>& poses);

// Emitter positions in lidar_id order (ring1, ring2, central).
std::vector<Vec3> lidar_positions(const StockpileConfig& config);

// Casts every emitter over the enlarged-region ground grid and accumulates
// labeled hits. The ground plane is not in the index, so it is never hit.
LabeledPointCloud scan_stockpile(const SceneIndex& index, const StockpileConfig& config);

// cloud.ply + cloud.csv + manifest.json under out_dir. mesh_names label the
// library entries in the manifest.
void write_scene(const LabeledPointCloud& cloud, const std::vector<InstancePose>& poses,
                 const std::vector<std::string>& mesh_names, const StockpileConfig& config,
                 const std::string& out_dir);

// Load library (sorted by filename), assemble, scan, write. Returns the
// scene directory's point count.
size_t generate_stockpile(const std::string& library_dir, const StockpileConfig& config,
                          const std::string& out_dir);

// Directory listing helper shared with the pair generator: mesh files
// (.obj/.ply) sorted by name.
std::vector<std::string> list_mesh_files(const std::string& dir);

}  // namespace rock

#endif
