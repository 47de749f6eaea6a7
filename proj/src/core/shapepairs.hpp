#ifndef ROCKMORPH_SHAPEPAIRS_HPP
#define ROCKMORPH_SHAPEPAIRS_HPP

// Partial-complete shape pair generator: disk-raycasting sensor sets at
// varying visibility, varying model orientations, and farthest-point
// downsampling to fixed cloud sizes.

#include <string>
#include <vector>

#include "mesh.hpp"
#include "pointcloud.hpp"
#include "raycast.hpp"

namespace rock {

struct PairConfig {
  int sensor_total = 16;
  std::vector<int> subset_sizes = {3, 4, 5, 6, 7, 8, 9};
  int orientations = 16;
  double sphere_radius_factor = 5.0;   // times the model's equivalent radius
  double disk_radius_factor = 1.5;     // times the model size (half bbox diagonal)
  double arc_spacing = 0.002;
  double ring_spacing = 0.002;
  size_t partial_n = 2048;
  size_t complete_n = 16384;
  uint64_t seed = 0;

  void validate() const;
  size_t pairs_per_model() const { return subset_sizes.size() * size_t(orientations); }
};

// Sensor positions for a recentered mesh: sphere_directions(sensor_total,
// seed) scaled to sphere_radius_factor times the volume-equivalent radius.
std::vector<Vec3> sensor_positions(const TriMesh& recentered_mesh, const PairConfig& config);

// Disk-raycast hits of each sensor separately (lidar_id = sensor index).
std::vector<LabeledPointCloud> scan_all_sensors(const SceneIndex& index,
                                                const std::vector<Vec3>& sensors,
                                                double disk_radius, const PairConfig& config);

// Union of disk-raycast hits from the first `active_sensors` positions (the
// canonical lattice order, so subsets nest). lidar_id = sensor index.
LabeledPointCloud scan_partial(const SceneIndex& index, const std::vector<Vec3>& sensors,
                               int active_sensors, double disk_radius, const PairConfig& config);

// Greedy farthest-point subsample: returns the selected indices in pick
// order. Seeded start; the first k picks are a prefix of any longer run.
std::vector<size_t> fps_downsample_indices(const std::vector<Vec3>& points, size_t n,
                                           uint64_t seed);
LabeledPointCloud fps_downsample(const LabeledPointCloud& cloud, size_t n, uint64_t seed);

struct PairSummary {
  size_t models = 0;
  size_t pairs = 0;
};

// Full dataset: for every model x orientation, a complete cloud (all
// sensors, complete_n points) plus one partial cloud per subset size
// (partial_n points), laid out as model/orientation/visibility with a
// manifest at the root.
PairSummary generate_pairs(const std::string& library_dir, const PairConfig& config,
                           const std::string& out_dir);

}  // namespace rock

#endif
