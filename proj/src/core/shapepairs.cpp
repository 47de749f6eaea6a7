#include "shapepairs.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "stockgen.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace rock {

void PairConfig::validate() const {
  if (sensor_total < 1) fail(ErrorKind::invalid_argument, "need at least one sensor");
  if (subset_sizes.empty()) fail(ErrorKind::invalid_argument, "no visibility levels");
  for (int k : subset_sizes)
    if (k < 1 || k > sensor_total)
      fail(ErrorKind::invalid_argument, "subset size outside [1, sensor_total]");
  if (orientations < 1) fail(ErrorKind::invalid_argument, "need at least one orientation");
  if (partial_n >= complete_n)
    fail(ErrorKind::invalid_argument, "partial_n must be smaller than complete_n");
  if (sphere_radius_factor <= 1.0 || disk_radius_factor <= 0.0 || arc_spacing <= 0.0 ||
      ring_spacing <= 0.0)
    fail(ErrorKind::invalid_argument, "bad sensor geometry parameters");
}

std::vector<Vec3> sensor_positions(const TriMesh& recentered_mesh, const PairConfig& config) {
  MeshMeasures mm = mesh_measures(recentered_mesh);
  if (!mm.volume || *mm.volume <= 0.0)
    fail(ErrorKind::domain, "sensor placement needs a watertight mesh");
  double equiv_radius = std::cbrt(3.0 * (*mm.volume) / (4.0 * kPi));
  double radius = config.sphere_radius_factor * equiv_radius;
  std::vector<Vec3> dirs = sphere_directions(config.sensor_total, config.seed);
  for (Vec3& d : dirs) d *= radius;
  return dirs;
}

std::vector<LabeledPointCloud> scan_all_sensors(const SceneIndex& index,
                                                const std::vector<Vec3>& sensors,
                                                double disk_radius, const PairConfig& config) {
  std::vector<LabeledPointCloud> out(sensors.size());
  for (size_t s = 0; s < sensors.size(); ++s) {
    std::vector<Ray> rays =
        disk_rays(sensors[s], {0, 0, 0}, disk_radius, config.arc_spacing, config.ring_spacing);
    std::vector<Hit> hits = cast_rays(index, rays, uint16_t(s));
    out[s].points.reserve(hits.size());
    for (const Hit& h : hits) out[s].points.push_back({h.point, h.rgb, h.lidar_id, h.instance_id});
  }
  return out;
}

namespace {

LabeledPointCloud union_of(const std::vector<LabeledPointCloud>& per_sensor, size_t first_k) {
  LabeledPointCloud cloud;
  size_t total = 0;
  for (size_t s = 0; s < first_k; ++s) total += per_sensor[s].points.size();
  cloud.points.reserve(total);
  for (size_t s = 0; s < first_k; ++s)
    cloud.points.insert(cloud.points.end(), per_sensor[s].points.begin(),
                        per_sensor[s].points.end());
  return cloud;
}

}  // namespace

LabeledPointCloud scan_partial(const SceneIndex& index, const std::vector<Vec3>& sensors,
                               int active_sensors, double disk_radius, const PairConfig& config) {
  if (active_sensors < 1 || size_t(active_sensors) > sensors.size())
    fail(ErrorKind::invalid_argument, "active sensor count out of range");
  std::vector<Vec3> active(sensors.begin(), sensors.begin() + active_sensors);
  LabeledPointCloud cloud = union_of(scan_all_sensors(index, active, disk_radius, config),
                                     size_t(active_sensors));
  if (cloud.empty())
    fail(ErrorKind::domain, "no sensor ray reached the mesh; check the disk radius factor");
  return cloud;
}

std::vector<size_t> fps_downsample_indices(const std::vector<Vec3>& points, size_t n,
                                           uint64_t seed) {
  if (n > points.size())
    fail(ErrorKind::invalid_argument, "cannot sample " + std::to_string(n) + " points from " +
                                          std::to_string(points.size()));
  std::vector<size_t> picks;
  if (n == 0) return picks;
  picks.reserve(n);

  RngStream rng(seed, "fps");
  size_t start = size_t(rng.uniform_int(0, int(points.size() - 1)));
  picks.push_back(start);

  std::vector<double> dist2(points.size(), 1e300);
  size_t last = start;
  size_t n_pts = points.size();
  size_t workers = std::min(size_t(max_threads()), n_pts);
  size_t chunk = (n_pts + workers - 1) / workers;  // mirrors parallel_for's split
  // Below this size the per-pick relax/argmax pass is cheaper than spawning
  // workers. Both paths share the smallest-index tie rule, so the selection
  // is identical either way.
  const bool serial = n_pts < 262144 || workers <= 1;
  for (size_t k = 1; k < n; ++k) {
    struct Best {
      double d2 = -1.0;
      size_t idx = 0;
    };
    const Vec3 last_p = points[last];
    Best best;
    if (serial) {
      for (size_t i = 0; i < n_pts; ++i) {
        double d2 = norm2(points[i] - last_p);
        if (d2 < dist2[i]) dist2[i] = d2;
        if (dist2[i] > best.d2) {
          best.d2 = dist2[i];
          best.idx = i;
        }
      }
    } else {
      // Relax distances against the last pick, tracking the farthest point.
      std::vector<Best> chunk_best(workers + 1);
      parallel_for(n_pts, [&](size_t b, size_t e) {
        size_t slot = std::min(b / chunk, workers);
        Best local;
        for (size_t i = b; i < e; ++i) {
          double d2 = norm2(points[i] - last_p);
          if (d2 < dist2[i]) dist2[i] = d2;
          if (dist2[i] > local.d2) {
            local.d2 = dist2[i];
            local.idx = i;
          }
        }
        chunk_best[slot] = local;
      });
      for (const Best& cb : chunk_best)
        if (cb.d2 > best.d2 || (cb.d2 == best.d2 && cb.d2 >= 0 && cb.idx < best.idx)) best = cb;
    }
    picks.push_back(best.idx);
    last = best.idx;
  }
  return picks;
}

LabeledPointCloud fps_downsample(const LabeledPointCloud& cloud, size_t n, uint64_t seed) {
  std::vector<Vec3> pts = cloud.positions();
  std::vector<size_t> picks = fps_downsample_indices(pts, n, seed);
  LabeledPointCloud out;
  out.points.reserve(picks.size());
  for (size_t i : picks) out.points.push_back(cloud.points[i]);
  return out;
}

PairSummary generate_pairs(const std::string& library_dir, const PairConfig& config,
                           const std::string& out_dir) {
  config.validate();
  std::vector<std::string> files = list_mesh_files(library_dir);
  fs::create_directories(out_dir);

  std::vector<Vec3> orientation_dirs = sphere_directions(config.orientations, config.seed);

  ordered_json manifest;
  manifest["format"] = "rockmorph-pairs/1";
  ordered_json jc;
  jc["sensor_total"] = config.sensor_total;
  jc["subset_sizes"] = config.subset_sizes;
  jc["orientations"] = config.orientations;
  jc["sphere_radius_factor"] = config.sphere_radius_factor;
  jc["disk_radius_factor"] = config.disk_radius_factor;
  jc["arc_spacing"] = config.arc_spacing;
  jc["ring_spacing"] = config.ring_spacing;
  jc["partial_n"] = config.partial_n;
  jc["complete_n"] = config.complete_n;
  jc["seed"] = config.seed;
  manifest["config"] = jc;
  ordered_json jpairs = ordered_json::array();

  PairSummary summary;
  for (const std::string& file : files) {
    std::string model_id = fs::path(file).stem().string();
    TriMesh base = recenter(load_mesh(file));
    ++summary.models;

    for (int m = 0; m < config.orientations; ++m) {
      // Rotation taking +Y onto the m-th lattice direction, roll-free.
      Mat3 rot = Mat3::align({0, 1, 0}, orientation_dirs[size_t(m)]);
      TriMesh oriented = transformed(base, rot, {0, 0, 0});

      SceneIndex index;
      index.add_instance(oriented, Mat3::identity(), {0, 0, 0}, 0);
      index.build();

      std::vector<Vec3> sensors = sensor_positions(oriented, config);
      Vec3 extent = oriented.bbox_max() - oriented.bbox_min();
      double disk_radius = config.disk_radius_factor * 0.5 * norm(extent);

      fs::path orient_dir = fs::path(out_dir) / model_id /
                            ("orientation_" + std::to_string(m));
      fs::create_directories(orient_dir);

      std::vector<LabeledPointCloud> per_sensor =
          scan_all_sensors(index, sensors, disk_radius, config);
      LabeledPointCloud complete_union = union_of(per_sensor, per_sensor.size());
      if (complete_union.empty())
        fail(ErrorKind::domain, "no sensor ray reached model " + model_id);
      uint64_t unit_seed = config.seed ^ (uint64_t(m) << 20);
      LabeledPointCloud complete =
          fps_downsample(complete_union, config.complete_n, unit_seed);
      std::string complete_path = (orient_dir / "complete.ply").string();
      save_cloud_ply(complete, complete_path);

      for (int k : config.subset_sizes) {
        LabeledPointCloud partial_union = union_of(per_sensor, size_t(k));
        LabeledPointCloud partial =
            fps_downsample(partial_union, config.partial_n, unit_seed ^ uint64_t(k));
        fs::path vis_dir = orient_dir / ("visibility_" + std::to_string(k));
        fs::create_directories(vis_dir);
        std::string partial_path = (vis_dir / "partial.ply").string();
        save_cloud_ply(partial, partial_path);

        ordered_json jp;
        jp["model"] = model_id;
        jp["orientation"] = m;
        jp["visibility"] = k;
        jp["partial"] = fs::relative(partial_path, out_dir).string();
        jp["complete"] = fs::relative(complete_path, out_dir).string();
        jp["partial_points"] = partial.points.size();
        jp["complete_points"] = complete.points.size();
        jpairs.push_back(jp);
        ++summary.pairs;
      }
    }
  }
  manifest["models"] = summary.models;
  manifest["pairs"] = summary.pairs;
  manifest["pair_list"] = jpairs;
  std::ofstream out(fs::path(out_dir) / "manifest.json");
  if (!out) fail(ErrorKind::io, "cannot write manifest in " + out_dir);
  out << manifest.dump(2) << "\n";
  return summary;
}

}  // namespace rock
