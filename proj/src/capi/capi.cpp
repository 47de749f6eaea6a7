// C API shim over the core library: opaque handles, status codes, JSON
// in and out. All exceptions stop here.

#include "rockmorph/rockmorph.h"

#include <cstring>
#include <sstream>
#include <string>

#include <json.hpp>

#include "common.hpp"
#include "evalkit.hpp"
#include "imgseg.hpp"
#include "mesh.hpp"
#include "morph2d.hpp"
#include "morph3d.hpp"
#include "pointcloud.hpp"
#include "shapepairs.hpp"
#include "stockgen.hpp"
#include "triview.hpp"

using ordered_json = nlohmann::ordered_json;

struct rm_mesh {
  rock::TriMesh mesh;
};

struct rm_cloud {
  rock::LabeledPointCloud cloud;
};

namespace {

thread_local std::string g_last_error;

rm_status status_of(const rock::Error& e) {
  switch (e.kind()) {
    case rock::ErrorKind::invalid_argument: return RM_ERR_INVALID_ARGUMENT;
    case rock::ErrorKind::parse: return RM_ERR_PARSE;
    case rock::ErrorKind::io: return RM_ERR_IO;
    case rock::ErrorKind::domain: return RM_ERR_DOMAIN;
  }
  return RM_ERR_INTERNAL;
}

template <typename Fn>
rm_status guarded(Fn&& fn) {
  try {
    fn();
    return RM_OK;
  } catch (const rock::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return RM_ERR_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return RM_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void maybe_out(char** slot, const std::string& value) {
  if (slot) *slot = dup_string(value);
}

ordered_json parse_options(const char* options_json) {
  if (!options_json || !*options_json) return ordered_json::object();
  ordered_json j = ordered_json::parse(options_json);
  if (!j.is_object()) rock::fail(rock::ErrorKind::parse, "options must be a JSON object");
  return j;
}

void reject_unknown_keys(const ordered_json& j, std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) rock::fail(rock::ErrorKind::invalid_argument, "unknown config key: " + it.key());
  }
}

void require(bool cond, const char* msg) {
  if (!cond) rock::fail(rock::ErrorKind::invalid_argument, msg);
}

rock::StockpileConfig stockpile_config_from_json(const ordered_json& cfg, uint64_t seed) {
  rock::StockpileConfig c;
  if (cfg.contains("category")) c = rock::stockpile_preset(cfg["category"].get<std::string>());
  reject_unknown_keys(cfg, {"category", "center_x", "center_z", "lx", "lz", "grid_n",
                            "layers_min", "layers_max", "cameras", "camera_height",
                            "camera_radius_factor", "lidars_ring1", "lidars_ring2",
                            "lidar_height1", "lidar_height2", "lidar_radius1", "lidar_radius2",
                            "ray_spacing", "roi_enlargement", "tilt_limit_deg", "jitter_probes",
                            "seed"});
  c.center_x = cfg.value("center_x", c.center_x);
  c.center_z = cfg.value("center_z", c.center_z);
  c.lx = cfg.value("lx", c.lx);
  c.lz = cfg.value("lz", c.lz);
  c.grid_n = cfg.value("grid_n", c.grid_n);
  c.layers_min = cfg.value("layers_min", c.layers_min);
  c.layers_max = cfg.value("layers_max", c.layers_max);
  c.cameras = cfg.value("cameras", c.cameras);
  c.camera_height = cfg.value("camera_height", c.camera_height);
  c.camera_radius_factor = cfg.value("camera_radius_factor", c.camera_radius_factor);
  c.lidars_ring1 = cfg.value("lidars_ring1", c.lidars_ring1);
  c.lidars_ring2 = cfg.value("lidars_ring2", c.lidars_ring2);
  c.lidar_height1 = cfg.value("lidar_height1", c.lidar_height1);
  c.lidar_height2 = cfg.value("lidar_height2", c.lidar_height2);
  c.lidar_radius1 = cfg.value("lidar_radius1", c.lidar_radius1);
  c.lidar_radius2 = cfg.value("lidar_radius2", c.lidar_radius2);
  c.ray_spacing = cfg.value("ray_spacing", c.ray_spacing);
  c.roi_enlargement = cfg.value("roi_enlargement", c.roi_enlargement);
  c.tilt_limit_deg = cfg.value("tilt_limit_deg", c.tilt_limit_deg);
  c.jitter_probes = cfg.value("jitter_probes", c.jitter_probes);
  // A seed inside the config wins; the argument is the fallback.
  c.seed = cfg.contains("seed") ? cfg["seed"].get<uint64_t>() : seed;
  return c;
}

}  // namespace

extern "C" {

const char* rm_version(void) { return "rockmorph 1.0.0"; }

const char* rm_last_error(void) { return g_last_error.c_str(); }

void rm_string_free(char* s) { std::free(s); }

rm_status rm_set_threads(int n) {
  return guarded([&] { rock::set_max_threads(n); });
}

/* ------------------------------------------------------------------ */

rm_status rm_mesh_load(const char* path, double unit_scale, rm_mesh** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    auto* handle = new rm_mesh{rock::load_mesh(path, unit_scale)};
    *out = handle;
  });
}

rm_status rm_mesh_save(const rm_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh && path, "mesh and path must be non-null");
    rock::save_mesh(mesh->mesh, path);
  });
}

void rm_mesh_free(rm_mesh* mesh) { delete mesh; }

rm_status rm_mesh_stats_json(const rm_mesh* mesh, char** json_out) {
  return guarded([&] {
    require(mesh && json_out, "mesh and json_out must be non-null");
    const rock::TriMesh& m = mesh->mesh;
    rock::MeshMeasures mm = rock::mesh_measures(m);
    ordered_json j;
    j["vertices"] = m.vertex_count();
    j["faces"] = m.face_count();
    j["watertight"] = !m.non_manifold && m.face_count() > 0 && rock::is_watertight(m);
    j["surface_area"] = mm.surface_area;
    if (mm.volume) j["volume"] = *mm.volume;
    else j["volume"] = nullptr;
    if (mm.centroid)
      j["centroid"] = {mm.centroid->x, mm.centroid->y, mm.centroid->z};
    else
      j["centroid"] = nullptr;
    if (m.vertex_count() > 0) {
      rock::Vec3 lo = m.bbox_min(), hi = m.bbox_max();
      j["bbox_min"] = {lo.x, lo.y, lo.z};
      j["bbox_max"] = {hi.x, hi.y, hi.z};
    }
    *json_out = dup_string(j.dump(2));
  });
}

rm_status rm_mesh_recenter(rm_mesh* mesh) {
  return guarded([&] {
    require(mesh != nullptr, "mesh must be non-null");
    mesh->mesh = rock::recenter(mesh->mesh);
  });
}

rm_status rm_mesh_decimate(rm_mesh* mesh, int target_faces) {
  return guarded([&] {
    require(mesh != nullptr, "mesh must be non-null");
    require(target_faces >= 4, "target_faces must be at least 4");
    mesh->mesh = rock::decimate(mesh->mesh, size_t(target_faces));
  });
}

/* ------------------------------------------------------------------ */

rm_status rm_segment(const char* image_path, const char* options_json, const char* out_mask_pgm,
                     char** report_json) {
  return guarded([&] {
    require(image_path && out_mask_pgm, "image_path and out_mask_pgm must be non-null");
    ordered_json opts = parse_options(options_json);
    reject_unknown_keys(opts, {"gamma", "method", "fixed_value", "adaptive_window",
                               "adaptive_offset", "largest_only", "max_dimension",
                               "morph_iterations"});
    rock::SegmentOptions so;
    so.gamma = opts.value("gamma", 2.0);
    std::string method = opts.value("method", "otsu");
    if (method == "otsu") so.binarize.method = rock::ThresholdMethod::otsu;
    else if (method == "fixed") so.binarize.method = rock::ThresholdMethod::fixed;
    else if (method == "adaptive") so.binarize.method = rock::ThresholdMethod::adaptive;
    else rock::fail(rock::ErrorKind::invalid_argument, "unknown threshold method: " + method);
    so.binarize.fixed_value = opts.value("fixed_value", 0.5);
    so.binarize.adaptive_window = opts.value("adaptive_window", 0);
    so.binarize.adaptive_offset = opts.value("adaptive_offset", 0.02);
    so.binarize.morph_iterations = opts.value("morph_iterations", 2);
    so.largest_only = opts.value("largest_only", false);
    so.max_dimension = opts.value("max_dimension", 1024);

    rock::ImageRgb8 img = rock::load_image(image_path);
    rock::SegmentReport rep;
    rock::BinaryMask mask = rock::segment(img, so, &rep);
    rock::save_mask_pgm(mask, out_mask_pgm);

    ordered_json j;
    j["chosen_channel"] = std::string(1, rep.chosen_channel);
    j["ref_a"] = rep.ref_a;
    j["ref_b"] = rep.ref_b;
    j["bg_value"] = rep.bg_value;
    j["fg_value"] = rep.fg_value;
    j["threshold"] = rep.threshold;
    j["components"] = rep.component_count;
    j["foreground_pixels"] = rep.foreground_pixels;
    j["mask"] = out_mask_pgm;
    maybe_out(report_json, j.dump(2));
  });
}

rm_status rm_morph2d(const char* mask_pgm, const char* options_json, char** report_json) {
  return guarded([&] {
    require(mask_pgm && report_json, "mask_pgm and report_json must be non-null");
    ordered_json opts = parse_options(options_json);
    reject_unknown_keys(opts, {"scale", "ball_mask", "ball_diameter", "assumed_fer3d"});
    rock::BinaryMask mask = rock::load_mask_pgm(mask_pgm);
    bool at_border = rock::touches_border(mask);
    double scale = opts.value("scale", 1.0);
    if (opts.contains("ball_mask")) {
      rock::BinaryMask ball = rock::load_mask_pgm(opts["ball_mask"].get<std::string>());
      double diameter = opts.value("ball_diameter", 0.0);
      scale = rock::calibrate_scale(ball, diameter);
    }
    double fer3d = opts.value("assumed_fer3d", 2.0);

    rock::MorphReport2D rep = rock::morph_report_2d(mask, scale);
    ordered_json j;
    j["scale"] = scale;
    j["esd"] = rep.esd;
    j["l_max"] = rep.l_max;
    j["l_min"] = rep.l_min;
    j["fer2d"] = rep.fer2d;
    j["circularity"] = rep.circularity;
    j["area"] = rep.area;
    j["perimeter"] = rep.perimeter;
    j["assumed_fer3d"] = fer3d;
    j["estimated_volume"] = rock::estimate_volume_2d(rep.l_max, rep.l_min, fer3d);
    j["touches_border"] = at_border;
    *report_json = dup_string(j.dump(2));
  });
}

rm_status rm_gradation(const char* const* mask_paths, size_t n_masks, const char* options_json,
                       char** report_json, char** csv_out) {
  return guarded([&] {
    require(mask_paths && n_masks > 0, "need at least one mask");
    ordered_json opts = parse_options(options_json);
    reject_unknown_keys(opts, {"scale", "metric", "bins", "include_border"});
    double scale = opts.value("scale", 1.0);
    std::string metric_name = opts.value("metric", "esd");
    rock::GradationMetric metric = metric_name == "fer" ? rock::GradationMetric::fer
                                                        : rock::GradationMetric::esd;
    if (metric_name != "esd" && metric_name != "fer")
      rock::fail(rock::ErrorKind::invalid_argument, "metric must be esd or fer");
    int bins = opts.value("bins", 10);
    bool include_border = opts.value("include_border", false);

    std::vector<rock::BinaryMask> masks;
    masks.reserve(n_masks);
    size_t skipped = 0;
    for (size_t i = 0; i < n_masks; ++i) {
      rock::BinaryMask mask = rock::load_mask_pgm(mask_paths[i]);
      // Frame-cut particles carry truncated dimensions; keep them out of the
      // distribution unless the caller opts in.
      if (!include_border && rock::touches_border(mask)) {
        ++skipped;
        continue;
      }
      masks.push_back(std::move(mask));
    }
    if (masks.empty())
      rock::fail(rock::ErrorKind::domain, "all masks touch the border; nothing to grade");
    rock::GradationReport rep = rock::gradation_report(masks, scale, metric, bins);

    ordered_json j;
    j["metric"] = metric_name;
    j["masks_used"] = masks.size();
    j["masks_skipped_at_border"] = skipped;
    j["bin_edges"] = rep.bin_edges;
    j["counts"] = rep.counts;
    j["cumulative_percent"] = rep.cumulative_pct;
    j["values"] = rep.values;
    maybe_out(report_json, j.dump(2));
    maybe_out(csv_out, rock::gradation_csv(rep));
  });
}

/* ------------------------------------------------------------------ */

rm_status rm_triview(const char* config_json, char** report_json) {
  return guarded([&] {
    require(config_json && report_json, "config_json and report_json must be non-null");
    ordered_json cfg = ordered_json::parse(config_json);
    reject_unknown_keys(cfg, {"top", "front", "side", "ball_top", "ball_front", "ball_side",
                              "ball_diameter", "c1", "specific_gravity", "max_resolution"});
    rock::ViewTriplet views;
    views.top = rock::load_mask_pgm(cfg.at("top").get<std::string>());
    views.front = rock::load_mask_pgm(cfg.at("front").get<std::string>());
    views.side = rock::load_mask_pgm(cfg.at("side").get<std::string>());
    views.ball_top = cfg.at("ball_top").get<double>();
    views.ball_front = cfg.at("ball_front").get<double>();
    views.ball_side = cfg.at("ball_side").get<double>();
    views.ball_diameter = cfg.at("ball_diameter").get<double>();

    rock::TriviewOptions opts;
    opts.c1 = cfg.value("c1", 0.954);
    opts.specific_gravity = cfg.value("specific_gravity", 2.66);
    opts.max_resolution = cfg.value("max_resolution", 1024);

    rock::TriviewResult res = rock::reconstruct_volume(views, opts);
    ordered_json j;
    j["raw_volume"] = res.raw_volume;
    j["c1"] = res.c1;
    j["c2"] = res.c2;
    j["corrected_volume"] = res.corrected_volume;
    if (res.weight) j["weight"] = *res.weight;
    else j["weight"] = nullptr;
    j["units"] = "volume in ball_diameter units cubed; weight in kg when ball_diameter is meters";
    j["calibrated_dims"] = {res.dims.x0, res.dims.y0, res.dims.z0};
    j["ball_radius_px"] = res.ball_radius_px;
    j["size_ratio"] = res.size_ratio;
    j["rock_voxels"] = res.rock_voxels;
    j["ball_voxels"] = res.ball_voxels;
    *report_json = dup_string(j.dump(2));
  });
}

rm_status rm_resolution_correction(double r_ball, double t, double* c2_out) {
  return guarded([&] {
    require(c2_out != nullptr, "c2_out must be non-null");
    *c2_out = rock::resolution_correction(r_ball, t);
  });
}

/* ------------------------------------------------------------------ */

rm_status rm_morph3d(const rm_mesh* mesh, char** report_json) {
  return guarded([&] {
    require(mesh && report_json, "mesh and report_json must be non-null");
    rock::MorphReport3D rep = rock::morph_report_3d(mesh->mesh);
    ordered_json j;
    j["a"] = rep.a;
    j["b"] = rep.b;
    j["c"] = rep.c;
    j["fer3d"] = rep.fer3d;
    j["sphericity"] = rep.sphericity;
    j["volume"] = rep.volume;
    j["surface_area"] = rep.surface_area;
    j["box_rotation"] = {rep.box_rotation(0, 0), rep.box_rotation(0, 1), rep.box_rotation(0, 2),
                         rep.box_rotation(1, 0), rep.box_rotation(1, 1), rep.box_rotation(1, 2),
                         rep.box_rotation(2, 0), rep.box_rotation(2, 1), rep.box_rotation(2, 2)};
    *report_json = dup_string(j.dump(2));
  });
}

rm_status rm_multiview_stats(const rm_mesh* mesh, int n_views, uint64_t seed, char** report_json,
                             char** csv_out) {
  return guarded([&] {
    require(mesh && report_json, "mesh and report_json must be non-null");
    rock::MultiViewStats st = rock::multiview_2d_stats(mesh->mesh, n_views, seed);
    ordered_json j;
    j["views"] = n_views;
    j["seed"] = seed;
    j["fer2d"] = {{"mean", st.fer_mean}, {"min", st.fer_min},   {"max", st.fer_max},
                  {"std", st.fer_std},   {"cov", st.fer_cov}};
    j["circularity"] = {{"mean", st.circ_mean}, {"min", st.circ_min},   {"max", st.circ_max},
                        {"std", st.circ_std},   {"cov", st.circ_cov}};
    *report_json = dup_string(j.dump(2));
    if (csv_out) {
      std::ostringstream csv;
      csv << "view,fer2d,circularity\n";
      char buf[96];
      for (size_t i = 0; i < st.fer2d.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", i, st.fer2d[i], st.circularity[i]);
        csv << buf;
      }
      *csv_out = dup_string(csv.str());
    }
  });
}

/* ------------------------------------------------------------------ */

rm_status rm_gen_stockpile(const char* library_dir, const char* config_json, uint64_t seed,
                           const char* out_dir, char** summary_json) {
  return guarded([&] {
    require(library_dir && out_dir, "library_dir and out_dir must be non-null");
    ordered_json cfg = parse_options(config_json);
    rock::StockpileConfig c = stockpile_config_from_json(cfg, seed);
    size_t points = rock::generate_stockpile(library_dir, c, out_dir);
    ordered_json j;
    j["out_dir"] = out_dir;
    j["points"] = points;
    j["seed"] = c.seed;
    maybe_out(summary_json, j.dump(2));
  });
}

rm_status rm_gen_pairs(const char* library_dir, const char* config_json, uint64_t seed,
                       const char* out_dir, char** summary_json) {
  return guarded([&] {
    require(library_dir && out_dir, "library_dir and out_dir must be non-null");
    ordered_json cfg = parse_options(config_json);
    reject_unknown_keys(cfg, {"sensor_total", "subset_sizes", "orientations",
                              "sphere_radius_factor", "disk_radius_factor", "arc_spacing",
                              "ring_spacing", "partial_n", "complete_n", "seed"});
    rock::PairConfig c;
    c.sensor_total = cfg.value("sensor_total", c.sensor_total);
    if (cfg.contains("subset_sizes")) c.subset_sizes = cfg["subset_sizes"].get<std::vector<int>>();
    c.orientations = cfg.value("orientations", c.orientations);
    c.sphere_radius_factor = cfg.value("sphere_radius_factor", c.sphere_radius_factor);
    c.disk_radius_factor = cfg.value("disk_radius_factor", c.disk_radius_factor);
    c.arc_spacing = cfg.value("arc_spacing", c.arc_spacing);
    c.ring_spacing = cfg.value("ring_spacing", c.ring_spacing);
    c.partial_n = cfg.value("partial_n", c.partial_n);
    c.complete_n = cfg.value("complete_n", c.complete_n);
    c.seed = cfg.contains("seed") ? cfg["seed"].get<uint64_t>() : seed;
    rock::PairSummary s = rock::generate_pairs(library_dir, c, out_dir);
    ordered_json j;
    j["out_dir"] = out_dir;
    j["models"] = s.models;
    j["pairs"] = s.pairs;
    j["seed"] = c.seed;
    maybe_out(summary_json, j.dump(2));
  });
}

/* ------------------------------------------------------------------ */

rm_status rm_cloud_load(const char* path, rm_cloud** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    *out = new rm_cloud{rock::load_cloud(path)};
  });
}

rm_status rm_cloud_save(const rm_cloud* cloud, const char* path) {
  return guarded([&] {
    require(cloud && path, "cloud and path must be non-null");
    rock::save_cloud(cloud->cloud, path);
  });
}

void rm_cloud_free(rm_cloud* cloud) { delete cloud; }

rm_status rm_cloud_size(const rm_cloud* cloud, size_t* out) {
  return guarded([&] {
    require(cloud && out, "cloud and out must be non-null");
    *out = cloud->cloud.size();
  });
}

rm_status rm_eval_segmentation(const rm_cloud* predicted, const rm_cloud* truth,
                               double iou_threshold, char** report_json, char** csv_out) {
  return guarded([&] {
    require(predicted && truth && report_json, "arguments must be non-null");
    rock::InstanceSet pred = rock::InstanceSet::from_labels(predicted->cloud);
    rock::InstanceSet gt = rock::InstanceSet::from_labels(truth->cloud);
    rock::MatchScores scores = rock::match_and_score_boxes(pred.boxes(predicted->cloud),
                                                           gt.boxes(truth->cloud), iou_threshold);
    ordered_json j;
    j["iou_threshold"] = iou_threshold;
    j["predicted_instances"] = pred.groups.size();
    j["truth_instances"] = gt.groups.size();
    j["matched"] = scores.matches.size();
    j["completeness"] = scores.completeness;
    j["iou_ap"] = scores.iou_ap;
    *report_json = dup_string(j.dump(2));
    maybe_out(csv_out, scores.csv());
  });
}

rm_status rm_chamfer(const rm_cloud* a, const rm_cloud* b, double* out) {
  return guarded([&] {
    require(a && b && out, "arguments must be non-null");
    *out = rock::chamfer_l1(a->cloud.positions(), b->cloud.positions());
  });
}

rm_status rm_shape_percentage(const rm_cloud* cloud, int n_rays, double angular_tol_deg,
                              double* sp_out) {
  return guarded([&] {
    require(cloud && sp_out, "arguments must be non-null");
    *sp_out = rock::shape_percentage(cloud->cloud.positions(), n_rays, angular_tol_deg);
  });
}

rm_status rm_sp_filter(const rm_cloud* cloud, double threshold, int n_rays,
                       double angular_tol_deg, char** report_json) {
  return guarded([&] {
    require(cloud && report_json, "arguments must be non-null");
    std::vector<rock::SPRecord> recs =
        rock::sp_filter(cloud->cloud, threshold, n_rays, angular_tol_deg);
    ordered_json arr = ordered_json::array();
    size_t passed = 0;
    for (const rock::SPRecord& r : recs) {
      arr.push_back({{"instance_id", r.instance_id}, {"sp", r.sp}, {"pass", r.pass}});
      passed += r.pass ? 1 : 0;
    }
    ordered_json j;
    j["threshold"] = threshold;
    j["instances"] = recs.size();
    j["passed"] = passed;
    j["records"] = arr;
    *report_json = dup_string(j.dump(2));
  });
}

rm_status rm_cluster(const rm_cloud* cloud, double radius, size_t min_size,
                     rm_cloud** labeled_out, char** report_json) {
  return guarded([&] {
    require(cloud && labeled_out, "cloud and labeled_out must be non-null");
    rock::InstanceSet inst = rock::cluster_baseline(cloud->cloud, radius, min_size);
    auto* out = new rm_cloud{cloud->cloud};
    for (auto& p : out->cloud.points) p.instance_id = -1;
    for (size_t g = 0; g < inst.groups.size(); ++g)
      for (size_t i : inst.groups[g]) out->cloud.points[i].instance_id = int32_t(g);
    *labeled_out = out;
    if (report_json) {
      ordered_json j;
      j["radius"] = radius;
      j["min_size"] = min_size;
      j["instances"] = inst.groups.size();
      *report_json = dup_string(j.dump(2));
    }
  });
}

rm_status rm_fps(const rm_cloud* cloud, size_t n, uint64_t seed, rm_cloud** out) {
  return guarded([&] {
    require(cloud && out, "cloud and out must be non-null");
    *out = new rm_cloud{rock::fps_downsample(cloud->cloud, n, seed)};
  });
}

rm_status rm_weight_from_volume(double volume_m3, double specific_gravity, double* kg_out) {
  return guarded([&] {
    require(kg_out != nullptr, "kg_out must be non-null");
    *kg_out = rock::weight_from_volume(volume_m3, specific_gravity);
  });
}

}  // extern "C"
