#include "stockgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "voxel.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace rock {

void StockpileConfig::validate() const {
  if (lx <= 0 || lz <= 0 || ray_spacing <= 0 || roi_enlargement <= 0)
    fail(ErrorKind::invalid_argument, "region and ray parameters must be positive");
  if (grid_n < 1 || layers_min < 1 || layers_max < layers_min)
    fail(ErrorKind::invalid_argument, "bad instantiation parameters");
  if (cameras < 1 || lidars_ring1 < 0 || lidars_ring2 < 0)
    fail(ErrorKind::invalid_argument, "bad rig parameters");
  if (camera_height <= 0 || lidar_height1 <= 0 || lidar_height2 <= 0)
    fail(ErrorKind::invalid_argument, "rig heights must be positive");
}

StockpileConfig stockpile_preset(const std::string& category) {
  StockpileConfig c;  // defaults hold the RR4 values
  if (category == "rr4" || category == "RR4") {
    c.grid_n = 7;
    c.camera_height = 1.0;
    c.camera_radius_factor = 3.0;
    c.lidar_height1 = 1.5;
    c.lidar_height2 = 1.0;
    c.lidar_radius1 = 0.7;
    c.lidar_radius2 = 1.5;
  } else if (category == "rr3" || category == "RR3") {
    c.grid_n = 9;
    c.camera_height = 0.5;
    c.camera_radius_factor = 2.5;
    c.lidar_height1 = 0.8;
    c.lidar_height2 = 0.6;
    c.lidar_radius1 = 0.5;
    c.lidar_radius2 = 1.3;
  } else if (category == "mix" || category == "rr3-rr4" || category == "RR3-RR4") {
    c.grid_n = 7;
    c.camera_height = 0.8;
    c.camera_radius_factor = 3.0;
    c.lidar_height1 = 1.2;
    c.lidar_height2 = 0.7;
    c.lidar_radius1 = 0.7;
    c.lidar_radius2 = 1.5;
  } else {
    fail(ErrorKind::invalid_argument, "unknown stockpile category: " + category);
  }
  return c;
}

namespace {

struct SettleField {
  // Topmost occupied cell per ground column; -1 = bare ground.
  double cell = 0.0;
  double x0 = 0.0, z0 = 0.0;
  int nx = 0, nz = 0;
  std::vector<int32_t> top;

  int32_t& at(int ix, int iz) { return top[size_t(iz) * size_t(nx) + size_t(ix)]; }
};

struct InstanceFootprint {
  // Per-column vertical extents of the instance's voxelization, plus the
  // grid origin of that voxelization relative to the mesh frame.
  VoxelGrid grid;
  std::vector<int> col_bottom, col_top;  // -1 where the column is empty
};

InstanceFootprint footprint(const TriMesh& mesh, double cell) {
  InstanceFootprint fp;
  fp.grid = voxelize(mesh, cell);
  fp.col_bottom.assign(size_t(fp.grid.nx) * size_t(fp.grid.nz), -1);
  fp.col_top.assign(size_t(fp.grid.nx) * size_t(fp.grid.nz), -1);
  for (int z = 0; z < fp.grid.nz; ++z)
    for (int x = 0; x < fp.grid.nx; ++x) {
      size_t c = size_t(z) * size_t(fp.grid.nx) + size_t(x);
      for (int y = 0; y < fp.grid.ny; ++y) {
        if (!fp.grid.at(x, y, z)) continue;
        if (fp.col_bottom[c] < 0) fp.col_bottom[c] = y;
        fp.col_top[c] = y;
      }
    }
  return fp;
}

}  // namespace

std::vector<InstancePose> assemble_scene(const std::vector<TriMesh>& library,
                                         const StockpileConfig& config) {
  config.validate();
  if (library.empty()) fail(ErrorKind::invalid_argument, "mesh library is empty");

  // Median and max instance sizes drive the settle lattice and field extent.
  std::vector<double> sizes;
  for (const TriMesh& m : library) {
    Vec3 e = m.bbox_max() - m.bbox_min();
    sizes.push_back(std::max({e.x, e.y, e.z}));
  }
  std::vector<double> sorted_sizes = sizes;
  std::sort(sorted_sizes.begin(), sorted_sizes.end());
  double median_size = sorted_sizes[sorted_sizes.size() / 2];
  double max_size = sorted_sizes.back();

  double pitch = 0.8 * std::min(config.lx, config.lz) / config.grid_n;
  for (size_t i = 0; i < library.size(); ++i)
    if (sizes[i] > pitch)
      fail(ErrorKind::domain, "library mesh larger than a grid cell (" +
                                  std::to_string(sizes[i]) + " > " + std::to_string(pitch) + ")");

  SettleField field;
  field.cell = median_size / 50.0;
  double half_x = 0.5 * 0.8 * config.lx + 2.0 * max_size;
  double half_z = 0.5 * 0.8 * config.lz + 2.0 * max_size;
  field.x0 = config.center_x - half_x;
  field.z0 = config.center_z - half_z;
  field.nx = int(std::ceil(2.0 * half_x / field.cell)) + 2;
  field.nz = int(std::ceil(2.0 * half_z / field.cell)) + 2;
  field.top.assign(size_t(field.nx) * size_t(field.nz), -1);

  RngStream rng(config.seed, "assemble");
  int layers = rng.uniform_int(config.layers_min, config.layers_max);
  double tilt = deg2rad(config.tilt_limit_deg);

  std::vector<InstancePose> poses;
  poses.reserve(size_t(layers) * size_t(config.grid_n) * size_t(config.grid_n));
  int32_t next_id = 0;

  for (int layer = 0; layer < layers; ++layer) {
    for (int gz = 0; gz < config.grid_n; ++gz) {
      for (int gx = 0; gx < config.grid_n; ++gx) {
        int mesh_index = rng.uniform_int(0, int(library.size()) - 1);
        double yaw = rng.uniform(0.0, 2.0 * kPi);
        double pitch_a = rng.uniform(-tilt, tilt);
        double roll_a = rng.uniform(-tilt, tilt);
        Mat3 rot = Mat3::axis_angle({0, 1, 0}, yaw) * Mat3::axis_angle({1, 0, 0}, pitch_a) *
                   Mat3::axis_angle({0, 0, 1}, roll_a);

        TriMesh inst = transformed(library[size_t(mesh_index)], rot, {0, 0, 0});
        InstanceFootprint fp = footprint(inst, field.cell);

        double base_x = config.center_x + (gx + 0.5 - config.grid_n / 2.0) * pitch;
        double base_z = config.center_z + (gz + 0.5 - config.grid_n / 2.0) * pitch;

        // Probe the base position plus seeded lateral offsets; keep the
        // lowest rest height (first probe wins ties).
        double best_rest = 1e18;
        int best_cx = 0, best_cz = 0, best_cells = 0;
        for (int probe = 0; probe <= config.jitter_probes; ++probe) {
          double px = base_x, pz = base_z;
          if (probe > 0) {
            px += rng.uniform(-0.25 * pitch, 0.25 * pitch);
            pz += rng.uniform(-0.25 * pitch, 0.25 * pitch);
          }
          // Snap the instance lattice onto the field lattice.
          int cx = int(std::lround((px + fp.grid.origin.x - field.x0) / field.cell));
          int cz = int(std::lround((pz + fp.grid.origin.z - field.z0) / field.cell));
          if (cx < 0 || cz < 0 || cx + fp.grid.nx > field.nx || cz + fp.grid.nz > field.nz)
            continue;
          int rest_cells = 0;  // instance cell y=0 sits at this field cell
          for (int fz = 0; fz < fp.grid.nz; ++fz)
            for (int fx = 0; fx < fp.grid.nx; ++fx) {
              int bot = fp.col_bottom[size_t(fz) * size_t(fp.grid.nx) + size_t(fx)];
              if (bot < 0) continue;
              int32_t floor_top = field.at(cx + fx, cz + fz);
              rest_cells = std::max(rest_cells, floor_top + 1 - bot);
            }
          double rest_y = rest_cells * field.cell;
          if (rest_y < best_rest) {
            best_rest = rest_y;
            best_cx = cx;
            best_cz = cz;
            best_cells = rest_cells;
          }
        }
        if (best_rest >= 1e18)
          fail(ErrorKind::domain, "instance does not fit inside the settling field");

        // Commit: occupy columns and record the pose.
        for (int fz = 0; fz < fp.grid.nz; ++fz)
          for (int fx = 0; fx < fp.grid.nx; ++fx) {
            int top = fp.col_top[size_t(fz) * size_t(fp.grid.nx) + size_t(fx)];
            if (top < 0) continue;
            int32_t& cell_top = field.at(best_cx + fx, best_cz + fz);
            cell_top = std::max(cell_top, int32_t(best_cells + top));
          }

        InstancePose pose;
        pose.instance_id = next_id++;
        pose.mesh_index = mesh_index;
        pose.rotation = rot;
        pose.translation = {field.x0 + best_cx * field.cell - fp.grid.origin.x,
                            best_cells * field.cell - fp.grid.origin.y,
                            field.z0 + best_cz * field.cell - fp.grid.origin.z};
        poses.push_back(pose);
      }
    }
  }
  return poses;
}

SceneIndex build_scene_index(const std::vector<TriMesh>& library,
                             const std::vector<InstancePose>& poses) {
  SceneIndex index;
  for (const InstancePose& p : poses)
    index.add_instance(library[size_t(p.mesh_index)], p.rotation, p.translation, p.instance_id);
  index.build();
  return index;
}

std::vector<Vec3> lidar_positions(const StockpileConfig& config) {
  std::vector<Vec3> out;
  if (config.lidars_ring1 > 0) {
    out = ring_positions(config.center_x, config.center_z, config.lx, config.lz,
                         config.lidars_ring1, config.lidar_height1, config.lidar_radius1);
  }
  if (config.lidars_ring2 > 0) {
    std::vector<Vec3> ring2 =
        ring_positions(config.center_x, config.center_z, config.lx, config.lz,
                       config.lidars_ring2, config.lidar_height2, config.lidar_radius2);
    out.insert(out.end(), ring2.begin(), ring2.end());
  }
  out.push_back({config.center_x, config.lidar_height1, config.center_z});
  return out;
}

LabeledPointCloud scan_stockpile(const SceneIndex& index, const StockpileConfig& config) {
  config.validate();
  std::vector<Vec3> endpoints = grid_endpoints(config.center_x, config.center_z, config.lx,
                                               config.lz, config.roi_enlargement,
                                               config.ray_spacing);
  std::vector<Vec3> emitters = lidar_positions(config);

  LabeledPointCloud cloud;
  for (size_t e = 0; e < emitters.size(); ++e) {
    std::vector<Ray> rays;
    rays.reserve(endpoints.size());
    for (const Vec3& target : endpoints) {
      Vec3 dir = target - emitters[e];
      double len = norm(dir);
      if (len < 1e-12) continue;
      rays.push_back({emitters[e], dir / len});
    }
    std::vector<Hit> hits = cast_rays(index, rays, uint16_t(e));
    for (const Hit& h : hits)
      cloud.points.push_back({h.point, h.rgb, h.lidar_id, h.instance_id});
  }
  return cloud;
}

namespace {

ordered_json config_to_json(const StockpileConfig& c) {
  ordered_json j;
  j["center_x"] = c.center_x;
  j["center_z"] = c.center_z;
  j["lx"] = c.lx;
  j["lz"] = c.lz;
  j["grid_n"] = c.grid_n;
  j["layers_min"] = c.layers_min;
  j["layers_max"] = c.layers_max;
  j["cameras"] = c.cameras;
  j["camera_height"] = c.camera_height;
  j["camera_radius_factor"] = c.camera_radius_factor;
  j["lidars_ring1"] = c.lidars_ring1;
  j["lidars_ring2"] = c.lidars_ring2;
  j["lidar_height1"] = c.lidar_height1;
  j["lidar_height2"] = c.lidar_height2;
  j["lidar_radius1"] = c.lidar_radius1;
  j["lidar_radius2"] = c.lidar_radius2;
  j["ray_spacing"] = c.ray_spacing;
  j["roi_enlargement"] = c.roi_enlargement;
  j["tilt_limit_deg"] = c.tilt_limit_deg;
  j["jitter_probes"] = c.jitter_probes;
  j["seed"] = c.seed;
  return j;
}

}  // namespace

void write_scene(const LabeledPointCloud& cloud, const std::vector<InstancePose>& poses,
                 const std::vector<std::string>& mesh_names, const StockpileConfig& config,
                 const std::string& out_dir) {
  fs::create_directories(out_dir);
  save_cloud_ply(cloud, (fs::path(out_dir) / "cloud.ply").string());
  save_cloud_csv(cloud, (fs::path(out_dir) / "cloud.csv").string());

  std::vector<size_t> hits_per_instance(poses.size(), 0);
  for (const LabeledPoint& p : cloud.points)
    if (p.instance_id >= 0 && size_t(p.instance_id) < poses.size())
      hits_per_instance[size_t(p.instance_id)]++;

  ordered_json manifest;
  manifest["format"] = "rockmorph-stockpile/1";
  manifest["config"] = config_to_json(config);
  manifest["seed"] = config.seed;
  manifest["point_count"] = cloud.points.size();
  manifest["instance_count"] = poses.size();

  ordered_json instances = ordered_json::array();
  for (const InstancePose& p : poses) {
    ordered_json ji;
    ji["instance_id"] = p.instance_id;
    ji["mesh"] = mesh_names.empty() ? std::to_string(p.mesh_index)
                                    : mesh_names[size_t(p.mesh_index)];
    ji["position"] = {p.translation.x, p.translation.y, p.translation.z};
    ji["rotation"] = {p.rotation(0, 0), p.rotation(0, 1), p.rotation(0, 2),
                      p.rotation(1, 0), p.rotation(1, 1), p.rotation(1, 2),
                      p.rotation(2, 0), p.rotation(2, 1), p.rotation(2, 2)};
    ji["hits"] = hits_per_instance[size_t(p.instance_id)];
    instances.push_back(ji);
  }
  manifest["instances"] = instances;

  ordered_json cams = ordered_json::array();
  for (const Vec3& p : ring_positions(config.center_x, config.center_z, config.lx, config.lz,
                                      config.cameras, config.camera_height,
                                      config.camera_radius_factor)) {
    ordered_json jc;
    jc["position"] = {p.x, p.y, p.z};
    jc["look_at"] = {config.center_x, 0.0, config.center_z};
    cams.push_back(jc);
  }
  manifest["cameras"] = cams;

  ordered_json lidars = ordered_json::array();
  for (const Vec3& p : lidar_positions(config)) lidars.push_back({p.x, p.y, p.z});
  manifest["lidars"] = lidars;

  std::ofstream out(fs::path(out_dir) / "manifest.json");
  if (!out) fail(ErrorKind::io, "cannot write manifest in " + out_dir);
  out << manifest.dump(2) << "\n";
}

std::vector<std::string> list_mesh_files(const std::string& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::io, "not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj" || ext == ".ply") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorKind::io, "no mesh files (.obj/.ply) in " + dir);
  return files;
}

size_t generate_stockpile(const std::string& library_dir, const StockpileConfig& config,
                          const std::string& out_dir) {
  std::vector<std::string> files = list_mesh_files(library_dir);
  std::vector<TriMesh> library;
  std::vector<std::string> names;
  for (const std::string& f : files) {
    library.push_back(recenter(load_mesh(f)));
    names.push_back(fs::path(f).filename().string());
  }
  std::vector<InstancePose> poses = assemble_scene(library, config);
  SceneIndex index = build_scene_index(library, poses);
  LabeledPointCloud cloud = scan_stockpile(index, config);
  write_scene(cloud, poses, names, config, out_dir);
  return cloud.points.size();
}

}  // namespace rock
