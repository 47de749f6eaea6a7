// Batch command-line front end. Talks to the toolkit exclusively through
// the C API in rockmorph.h; every command writes its artifacts plus a
// run.json echoing the exact configuration, sufficient to re-run it
// identically. Dataset generators additionally write their own
// manifest.json describing the produced data.
//
// Exit codes: 0 success, 1 domain/data error, 2 usage error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rockmorph/rockmorph.h"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct Common {
  uint64_t seed = 0;
  int threads = 0;
  std::string config_path;
  std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("--seed", c.seed, "Seed for all randomized steps");
  cmd->add_option("--threads", c.threads, "Worker thread cap (0 = all cores)");
  cmd->add_option("--config", c.config_path, "JSON config file; flags override its values");
  auto* out = cmd->add_option("--out", c.out_dir, "Output directory");
  if (needs_out) out->required();
}

[[noreturn]] void die_api(const char* what) {
  std::cerr << "error: " << what << ": " << rm_last_error() << "\n";
  std::exit(kExitDomain);
}

void check(rm_status st, const char* what) {
  if (st != RM_OK) die_api(what);
}

ordered_json load_config_file(const std::string& path) {
  if (path.empty()) return ordered_json::object();
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config " << path << "\n";
    std::exit(kExitUsage);
  }
  try {
    ordered_json j;
    in >> j;
    if (!j.is_object()) throw std::runtime_error("config root must be an object");
    return j;
  } catch (const std::exception& e) {
    std::cerr << "error: bad config " << path << ": " << e.what() << "\n";
    std::exit(kExitUsage);
  }
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  rm_string_free(s);
  return out;
}

// Every artifact directory gets a manifest echoing the exact run.
void write_manifest(const std::string& out_dir, const std::string& command,
                    const ordered_json& config, uint64_t seed,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& artifacts) {
  ordered_json m;
  m["command"] = command;
  m["seed"] = seed;
  m["config"] = config;
  m["inputs"] = inputs;
  m["artifacts"] = artifacts;
  std::ofstream out(fs::path(out_dir) / "run.json");
  out << m.dump(2) << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
}

void apply_threads(const Common& c) {
  if (c.threads >= 0) check(rm_set_threads(c.threads), "set threads");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rockmorph: particle morphometry and synthetic-data toolkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::simple);

  // ---- segment ----------------------------------------------------
  Common seg_c;
  std::string seg_image;
  auto* seg = app.add_subcommand("segment", "Segment a photo into a PGM silhouette mask");
  seg->add_option("image", seg_image, "Input PNG/JPEG/PPM")->required();
  add_common(seg, seg_c);

  // ---- morph2d ----------------------------------------------------
  Common m2_c;
  std::vector<std::string> m2_masks;
  double m2_scale = 1.0;
  std::string m2_ball;
  double m2_ball_diameter = 0.0;
  double m2_fer3d = 2.0;
  std::string m2_metric = "esd";
  auto* m2 = app.add_subcommand("morph2d", "2D descriptors (and gradation for multiple masks)");
  m2->add_option("masks", m2_masks, "PGM mask(s)")->required();
  m2->add_option("--scale", m2_scale, "Length units per pixel");
  m2->add_option("--ball-mask", m2_ball, "Calibration ball PGM (overrides --scale)");
  m2->add_option("--ball-diameter", m2_ball_diameter, "Calibration ball physical diameter");
  m2->add_option("--assumed-fer3d", m2_fer3d, "Assumed 3D elongation for volume estimates");
  m2->add_option("--metric", m2_metric, "Gradation metric: esd or fer");
  bool m2_include_border = false;
  m2->add_flag("--include-border", m2_include_border,
               "Keep particles cut off by the image border in the gradation");
  add_common(m2, m2_c);

  // ---- triview ----------------------------------------------------
  Common tv_c;
  auto* tv = app.add_subcommand("triview", "Three-view volumetric reconstruction");
  add_common(tv, tv_c);

  // ---- morph3d ----------------------------------------------------
  Common m3_c;
  std::string m3_mesh;
  double m3_unit = 1.0;
  int m3_views = 0;
  auto* m3 = app.add_subcommand("morph3d", "3D descriptors for a mesh");
  m3->add_option("mesh", m3_mesh, "OBJ/PLY mesh")->required();
  m3->add_option("--unit-scale", m3_unit, "Scale applied to coordinates on load");
  m3->add_option("--views", m3_views, "Add multi-view 2D statistics over this many views");
  add_common(m3, m3_c);

  // ---- mesh-stats -------------------------------------------------
  Common ms_c;
  std::string ms_mesh;
  double ms_unit = 1.0;
  auto* ms = app.add_subcommand("mesh-stats", "Volume, area, centroid, watertightness");
  ms->add_option("mesh", ms_mesh, "OBJ/PLY mesh")->required();
  ms->add_option("--unit-scale", ms_unit, "Scale applied to coordinates on load");
  add_common(ms, ms_c, false);

  // ---- gen-stockpile ----------------------------------------------
  Common gs_c;
  std::string gs_library;
  auto* gs = app.add_subcommand("gen-stockpile", "Generate a labeled synthetic stockpile scan");
  gs->add_option("--library", gs_library, "Directory of watertight meshes")->required();
  add_common(gs, gs_c);

  // ---- gen-pairs --------------------------------------------------
  Common gp_c;
  std::string gp_library;
  auto* gp = app.add_subcommand("gen-pairs", "Generate partial-complete shape pairs");
  gp->add_option("--library", gp_library, "Directory of watertight meshes")->required();
  add_common(gp, gp_c);

  // ---- eval-seg ---------------------------------------------------
  Common es_c;
  std::string es_pred, es_truth;
  double es_iou = 0.5;
  auto* es = app.add_subcommand("eval-seg", "Completeness and IoU-AP of labeled clouds");
  es->add_option("--pred", es_pred, "Predicted labeled cloud (PLY/CSV)")->required();
  es->add_option("--truth", es_truth, "Ground-truth labeled cloud")->required();
  es->add_option("--iou", es_iou, "IoU threshold");
  add_common(es, es_c);

  // ---- eval-cd ----------------------------------------------------
  Common cd_c;
  std::string cd_a, cd_b;
  auto* cd = app.add_subcommand("eval-cd", "L1 Chamfer distance between two clouds");
  cd->add_option("--a", cd_a, "First cloud")->required();
  cd->add_option("--b", cd_b, "Second cloud")->required();
  add_common(cd, cd_c);

  // ---- sp ---------------------------------------------------------
  Common sp_c;
  std::string sp_cloud;
  double sp_threshold = 75.0;
  int sp_rays = 1000;
  double sp_tol = 3.0;
  bool sp_whole = false;
  auto* sp = app.add_subcommand("sp", "Shape percentage (per labeled instance by default)");
  sp->add_option("cloud", sp_cloud, "Point cloud (PLY/CSV)")->required();
  sp->add_option("--threshold", sp_threshold, "Pass threshold in percent");
  sp->add_option("--rays", sp_rays, "Number of directions");
  sp->add_option("--tol", sp_tol, "Angular tolerance in degrees");
  sp->add_flag("--whole", sp_whole, "Score the whole cloud instead of per instance");
  add_common(sp, sp_c);

  // ---- cluster ----------------------------------------------------
  Common cl_c;
  std::string cl_cloud;
  double cl_radius = 0.0;
  size_t cl_min = 1;
  auto* cl = app.add_subcommand("cluster", "Radius-graph clustering baseline segmenter");
  cl->add_option("cloud", cl_cloud, "Point cloud (PLY/CSV)")->required();
  cl->add_option("--radius", cl_radius, "Neighborhood radius")->required();
  cl->add_option("--min-size", cl_min, "Drop components smaller than this");
  add_common(cl, cl_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  // ---- dispatch ----------------------------------------------------

  if (seg->parsed()) {
    apply_threads(seg_c);
    ordered_json cfg = load_config_file(seg_c.config_path);
    fs::create_directories(seg_c.out_dir);
    std::string mask_path = (fs::path(seg_c.out_dir) / "mask.pgm").string();
    char* report = nullptr;
    check(rm_segment(seg_image.c_str(), cfg.dump().c_str(), mask_path.c_str(), &report),
          "segment");
    std::string rep = take_string(report);
    write_text(fs::path(seg_c.out_dir) / "report.json", rep);
    write_manifest(seg_c.out_dir, "segment", cfg, seg_c.seed, {seg_image},
                   {"mask.pgm", "report.json"});
    std::cout << rep << "\n";
    return kExitOk;
  }

  if (m2->parsed()) {
    apply_threads(m2_c);
    ordered_json cfg = load_config_file(m2_c.config_path);
    if (!cfg.contains("scale")) cfg["scale"] = m2_scale;
    if (!m2_ball.empty()) {
      cfg["ball_mask"] = m2_ball;
      cfg["ball_diameter"] = m2_ball_diameter;
    }
    cfg["assumed_fer3d"] = m2_fer3d;
    fs::create_directories(m2_c.out_dir);

    ordered_json all = ordered_json::array();
    for (const std::string& mask : m2_masks) {
      char* report = nullptr;
      check(rm_morph2d(mask.c_str(), cfg.dump().c_str(), &report), "morph2d");
      ordered_json j = ordered_json::parse(take_string(report));
      j["mask"] = mask;
      all.push_back(j);
    }
    write_text(fs::path(m2_c.out_dir) / "report.json", all.dump(2));
    std::vector<std::string> artifacts = {"report.json"};

    if (m2_masks.size() > 1) {
      std::vector<const char*> paths;
      for (const std::string& m : m2_masks) paths.push_back(m.c_str());
      ordered_json gopts;
      gopts["scale"] = cfg["scale"];
      gopts["metric"] = m2_metric;
      gopts["include_border"] = m2_include_border;
      char* greport = nullptr;
      char* gcsv = nullptr;
      check(rm_gradation(paths.data(), paths.size(), gopts.dump().c_str(), &greport, &gcsv),
            "gradation");
      write_text(fs::path(m2_c.out_dir) / "gradation.json", take_string(greport));
      write_text(fs::path(m2_c.out_dir) / "gradation.csv", take_string(gcsv));
      artifacts.push_back("gradation.json");
      artifacts.push_back("gradation.csv");
    }
    write_manifest(m2_c.out_dir, "morph2d", cfg, m2_c.seed,
                   std::vector<std::string>(m2_masks.begin(), m2_masks.end()), artifacts);
    std::cout << all.dump(2) << "\n";
    return kExitOk;
  }

  if (tv->parsed()) {
    apply_threads(tv_c);
    if (tv_c.config_path.empty()) {
      std::cerr << "error: triview requires --config with view and ball entries\n";
      return kExitUsage;
    }
    ordered_json cfg = load_config_file(tv_c.config_path);
    fs::create_directories(tv_c.out_dir);
    char* report = nullptr;
    check(rm_triview(cfg.dump().c_str(), &report), "triview");
    std::string rep = take_string(report);
    write_text(fs::path(tv_c.out_dir) / "report.json", rep);
    write_manifest(tv_c.out_dir, "triview", cfg, tv_c.seed, {}, {"report.json"});
    std::cout << rep << "\n";
    return kExitOk;
  }

  if (m3->parsed()) {
    apply_threads(m3_c);
    ordered_json cfg = load_config_file(m3_c.config_path);
    fs::create_directories(m3_c.out_dir);
    rm_mesh* mesh = nullptr;
    check(rm_mesh_load(m3_mesh.c_str(), m3_unit, &mesh), "load mesh");
    char* report = nullptr;
    if (rm_morph3d(mesh, &report) != RM_OK) {
      rm_mesh_free(mesh);
      die_api("morph3d");
    }
    ordered_json j = ordered_json::parse(take_string(report));
    std::vector<std::string> artifacts = {"report.json"};
    if (m3_views > 1) {
      char* mv = nullptr;
      char* csv = nullptr;
      if (rm_multiview_stats(mesh, m3_views, m3_c.seed, &mv, &csv) != RM_OK) {
        rm_mesh_free(mesh);
        die_api("multiview stats");
      }
      j["multiview"] = ordered_json::parse(take_string(mv));
      write_text(fs::path(m3_c.out_dir) / "views.csv", take_string(csv));
      artifacts.push_back("views.csv");
    }
    rm_mesh_free(mesh);
    write_text(fs::path(m3_c.out_dir) / "report.json", j.dump(2));
    write_manifest(m3_c.out_dir, "morph3d", cfg, m3_c.seed, {m3_mesh}, artifacts);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }

  if (ms->parsed()) {
    apply_threads(ms_c);
    rm_mesh* mesh = nullptr;
    check(rm_mesh_load(ms_mesh.c_str(), ms_unit, &mesh), "load mesh");
    char* report = nullptr;
    if (rm_mesh_stats_json(mesh, &report) != RM_OK) {
      rm_mesh_free(mesh);
      die_api("mesh stats");
    }
    rm_mesh_free(mesh);
    std::string rep = take_string(report);
    if (!ms_c.out_dir.empty()) {
      fs::create_directories(ms_c.out_dir);
      write_text(fs::path(ms_c.out_dir) / "report.json", rep);
      write_manifest(ms_c.out_dir, "mesh-stats", ordered_json::object(), ms_c.seed, {ms_mesh},
                     {"report.json"});
    }
    std::cout << rep << "\n";
    return kExitOk;
  }

  if (gs->parsed()) {
    apply_threads(gs_c);
    ordered_json cfg = load_config_file(gs_c.config_path);
    if (!cfg.contains("seed")) cfg["seed"] = gs_c.seed;
    char* summary = nullptr;
    check(rm_gen_stockpile(gs_library.c_str(), cfg.dump().c_str(), gs_c.seed,
                           gs_c.out_dir.c_str(), &summary),
          "gen-stockpile");
    std::string rep = take_string(summary);
    write_manifest(gs_c.out_dir, "gen-stockpile", cfg, cfg["seed"].get<uint64_t>(),
                   {gs_library}, {"cloud.ply", "cloud.csv", "manifest.json"});
    std::cout << rep << "\n";
    return kExitOk;
  }

  if (gp->parsed()) {
    apply_threads(gp_c);
    ordered_json cfg = load_config_file(gp_c.config_path);
    if (!cfg.contains("seed")) cfg["seed"] = gp_c.seed;
    char* summary = nullptr;
    check(rm_gen_pairs(gp_library.c_str(), cfg.dump().c_str(), gp_c.seed, gp_c.out_dir.c_str(),
                       &summary),
          "gen-pairs");
    std::string rep = take_string(summary);
    write_manifest(gp_c.out_dir, "gen-pairs", cfg, cfg["seed"].get<uint64_t>(), {gp_library},
                   {"manifest.json"});
    std::cout << rep << "\n";
    return kExitOk;
  }

  if (es->parsed()) {
    apply_threads(es_c);
    rm_cloud* pred = nullptr;
    rm_cloud* truth = nullptr;
    check(rm_cloud_load(es_pred.c_str(), &pred), "load predicted cloud");
    if (rm_cloud_load(es_truth.c_str(), &truth) != RM_OK) {
      rm_cloud_free(pred);
      die_api("load truth cloud");
    }
    char* report = nullptr;
    char* csv = nullptr;
    rm_status st = rm_eval_segmentation(pred, truth, es_iou, &report, &csv);
    rm_cloud_free(pred);
    rm_cloud_free(truth);
    check(st, "eval-seg");
    std::string rep = take_string(report);
    fs::create_directories(es_c.out_dir);
    write_text(fs::path(es_c.out_dir) / "scores.json", rep);
    write_text(fs::path(es_c.out_dir) / "scores.csv", take_string(csv));
    ordered_json cfg;
    cfg["iou"] = es_iou;
    write_manifest(es_c.out_dir, "eval-seg", cfg, es_c.seed, {es_pred, es_truth},
                   {"scores.json", "scores.csv"});
    std::cout << rep << "\n";
    return kExitOk;
  }

  if (cd->parsed()) {
    apply_threads(cd_c);
    rm_cloud* a = nullptr;
    rm_cloud* b = nullptr;
    check(rm_cloud_load(cd_a.c_str(), &a), "load cloud a");
    if (rm_cloud_load(cd_b.c_str(), &b) != RM_OK) {
      rm_cloud_free(a);
      die_api("load cloud b");
    }
    double dist = 0.0;
    rm_status st = rm_chamfer(a, b, &dist);
    rm_cloud_free(a);
    rm_cloud_free(b);
    check(st, "eval-cd");
    ordered_json j;
    j["chamfer_l1"] = dist;
    fs::create_directories(cd_c.out_dir);
    write_text(fs::path(cd_c.out_dir) / "chamfer.json", j.dump(2));
    write_manifest(cd_c.out_dir, "eval-cd", ordered_json::object(), cd_c.seed, {cd_a, cd_b},
                   {"chamfer.json"});
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }

  if (sp->parsed()) {
    apply_threads(sp_c);
    rm_cloud* cloud = nullptr;
    check(rm_cloud_load(sp_cloud.c_str(), &cloud), "load cloud");
    ordered_json j;
    rm_status st;
    if (sp_whole) {
      double value = 0.0;
      st = rm_shape_percentage(cloud, sp_rays, sp_tol, &value);
      j["sp"] = value;
    } else {
      char* report = nullptr;
      st = rm_sp_filter(cloud, sp_threshold, sp_rays, sp_tol, &report);
      if (st == RM_OK) j = ordered_json::parse(take_string(report));
    }
    rm_cloud_free(cloud);
    check(st, "sp");
    fs::create_directories(sp_c.out_dir);
    write_text(fs::path(sp_c.out_dir) / "sp.json", j.dump(2));
    ordered_json cfg;
    cfg["threshold"] = sp_threshold;
    cfg["rays"] = sp_rays;
    cfg["tol"] = sp_tol;
    write_manifest(sp_c.out_dir, "sp", cfg, sp_c.seed, {sp_cloud}, {"sp.json"});
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }

  if (cl->parsed()) {
    apply_threads(cl_c);
    rm_cloud* cloud = nullptr;
    check(rm_cloud_load(cl_cloud.c_str(), &cloud), "load cloud");
    rm_cloud* labeled = nullptr;
    char* report = nullptr;
    rm_status st = rm_cluster(cloud, cl_radius, cl_min, &labeled, &report);
    rm_cloud_free(cloud);
    check(st, "cluster");
    fs::create_directories(cl_c.out_dir);
    std::string out_ply = (fs::path(cl_c.out_dir) / "labeled.ply").string();
    st = rm_cloud_save(labeled, out_ply.c_str());
    rm_cloud_free(labeled);
    check(st, "save labeled cloud");
    std::string rep = take_string(report);
    write_text(fs::path(cl_c.out_dir) / "report.json", rep);
    ordered_json cfg;
    cfg["radius"] = cl_radius;
    cfg["min_size"] = cl_min;
    write_manifest(cl_c.out_dir, "cluster", cfg, cl_c.seed, {cl_cloud},
                   {"labeled.ply", "report.json"});
    std::cout << rep << "\n";
    return kExitOk;
  }

  std::cerr << "error: no command\n";
  return kExitUsage;
}
