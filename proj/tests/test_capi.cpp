#include <doctest.h>

#include <cstring>
#include <string>

#include <json.hpp>

#include "fixtures.hpp"
#include "imgseg.hpp"
#include "pointcloud.hpp"
#include "rockmorph/rockmorph.h"

using json = nlohmann::json;
using namespace fixtures;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  rm_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("c api: version and error reporting") {
  CHECK(std::string(rm_version()).find("rockmorph") == 0);

  rm_mesh* mesh = nullptr;
  rm_status st = rm_mesh_load("/nonexistent/file.obj", 1.0, &mesh);
  CHECK(st == RM_ERR_IO);
  CHECK(std::strlen(rm_last_error()) > 0);
}

TEST_CASE("c api: mesh load, stats, recenter, decimate, save") {
  TempDir dir("capi_mesh");
  save_mesh_obj(make_icosphere(3, 1.0), dir.file("sphere.obj"));

  rm_mesh* mesh = nullptr;
  REQUIRE(rm_mesh_load(dir.file("sphere.obj").c_str(), 1.0, &mesh) == RM_OK);

  char* stats = nullptr;
  REQUIRE(rm_mesh_stats_json(mesh, &stats) == RM_OK);
  json j = json::parse(take(stats));
  CHECK(j["watertight"].get<bool>());
  CHECK(j["faces"].get<int>() == 1280);
  CHECK(j["volume"].get<double>() == doctest::Approx(4.0 / 3.0 * 3.14159265).epsilon(0.02));

  CHECK(rm_mesh_recenter(mesh) == RM_OK);
  CHECK(rm_mesh_decimate(mesh, 500) == RM_OK);
  REQUIRE(rm_mesh_stats_json(mesh, &stats) == RM_OK);
  j = json::parse(take(stats));
  CHECK(j["faces"].get<int>() <= 500);

  CHECK(rm_mesh_save(mesh, dir.file("out.ply").c_str()) == RM_OK);
  rm_mesh* back = nullptr;
  CHECK(rm_mesh_load(dir.file("out.ply").c_str(), 1.0, &back) == RM_OK);
  rm_mesh_free(back);
  rm_mesh_free(mesh);
}

TEST_CASE("c api: morph3d report on a cube") {
  TempDir dir("capi_m3");
  save_mesh_obj(make_cube(), dir.file("cube.obj"));
  rm_mesh* mesh = nullptr;
  REQUIRE(rm_mesh_load(dir.file("cube.obj").c_str(), 1.0, &mesh) == RM_OK);
  char* report = nullptr;
  REQUIRE(rm_morph3d(mesh, &report) == RM_OK);
  rm_mesh_free(mesh);
  json j = json::parse(take(report));
  CHECK(j["fer3d"].get<double>() == doctest::Approx(1.0).epsilon(0.02));
  CHECK(j["sphericity"].get<double>() == doctest::Approx(0.806).epsilon(0.01));
}

TEST_CASE("c api: segment to pgm then morph2d") {
  TempDir dir("capi_seg");
  // Blue backdrop, tan disc; saved as ppm for the decoder path.
  int w = 256, h = 192;
  rock::ImageRgb8 img{w, h};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      bool inside = (x - 128) * (x - 128) + (y - 96) * (y - 96) <= 60 * 60;
      img.px(x, y)[0] = inside ? 180 : 70;
      img.px(x, y)[1] = inside ? 150 : 110;
      img.px(x, y)[2] = inside ? 110 : 180;
    }
  std::ofstream ppm(dir.file("scene.ppm"), std::ios::binary);
  ppm << "P6\n" << w << " " << h << "\n255\n";
  ppm.write(reinterpret_cast<const char*>(img.data.data()), std::streamsize(img.data.size()));
  ppm.close();

  char* report = nullptr;
  REQUIRE(rm_segment(dir.file("scene.ppm").c_str(), "{}", dir.file("mask.pgm").c_str(),
                     &report) == RM_OK);
  json seg = json::parse(take(report));
  CHECK(seg["components"].get<int>() == 1);

  char* m2 = nullptr;
  REQUIRE(rm_morph2d(dir.file("mask.pgm").c_str(), R"({"scale": 0.001})", &m2) == RM_OK);
  json rep = json::parse(take(m2));
  CHECK(rep["fer2d"].get<double>() == doctest::Approx(1.0).epsilon(0.03));
  CHECK(rep["esd"].get<double>() == doctest::Approx(0.120).epsilon(0.03));
}

TEST_CASE("c api: gradation excludes border-cut particles by default") {
  TempDir dir("capi_grad");
  rock::BinaryMask interior = raster_disc(30.0);
  rock::BinaryMask cut(40, 40);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) cut.set(x, y, true);  // touches two borders
  rock::save_mask_pgm(interior, dir.file("a.pgm"));
  rock::save_mask_pgm(cut, dir.file("b.pgm"));

  std::string a = dir.file("a.pgm"), b = dir.file("b.pgm");
  const char* paths[2] = {a.c_str(), b.c_str()};
  char* report = nullptr;
  REQUIRE(rm_gradation(paths, 2, "{}", &report, nullptr) == RM_OK);
  json j = json::parse(take(report));
  CHECK(j["masks_used"].get<int>() == 1);
  CHECK(j["masks_skipped_at_border"].get<int>() == 1);

  REQUIRE(rm_gradation(paths, 2, R"({"include_border": true})", &report, nullptr) == RM_OK);
  j = json::parse(take(report));
  CHECK(j["masks_used"].get<int>() == 2);
}

TEST_CASE("c api: unknown option keys are rejected") {
  TempDir dir("capi_opt");
  save_mesh_obj(make_cube(), dir.file("cube.obj"));
  char* report = nullptr;
  rm_status st = rm_morph2d("missing.pgm", R"({"bogus_key": 1})", &report);
  CHECK(st == RM_ERR_INVALID_ARGUMENT);
  CHECK(std::string(rm_last_error()).find("bogus_key") != std::string::npos);
}

TEST_CASE("c api: three-view reconstruction from pgm silhouettes") {
  TempDir dir("capi_triview");
  // Sphere fixture: equal discs in all three views, one-pixel detection
  // shrink baked into the rasters.
  double r_ball = 30.0, t = 6.0;
  rock::BinaryMask rock_view = fixtures::raster_disc(2.0 * (r_ball * t - 1.0));
  rock::BinaryMask ball_view = fixtures::raster_disc(2.0 * (r_ball - 1.0));
  double ball_detected = 2.0 * std::sqrt(double(ball_view.area()) / rock::kPi);
  rock::save_mask_pgm(rock_view, dir.file("rock.pgm"));

  nlohmann::ordered_json cfg;
  cfg["top"] = dir.file("rock.pgm");
  cfg["front"] = dir.file("rock.pgm");
  cfg["side"] = dir.file("rock.pgm");
  cfg["ball_top"] = ball_detected;
  cfg["ball_front"] = ball_detected;
  cfg["ball_side"] = ball_detected;
  cfg["ball_diameter"] = 0.2;

  char* report = nullptr;
  REQUIRE(rm_triview(cfg.dump().c_str(), &report) == RM_OK);
  json j = json::parse(take(report));
  double true_volume = 4.0 / 3.0 * rock::kPi * std::pow(0.1 * t, 3);
  CHECK(j["corrected_volume"].get<double>() == doctest::Approx(true_volume).epsilon(0.05));
  CHECK(j["raw_volume"].get<double>() > true_volume);
  CHECK(j["c1"].get<double>() == doctest::Approx(0.954));
  CHECK(j["weight"].get<double>() ==
        doctest::Approx(j["corrected_volume"].get<double>() * 2.66 * 1000.0));

  cfg["bogus"] = 1;
  CHECK(rm_triview(cfg.dump().c_str(), &report) == RM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("c api: multiview statistics on an elongated mesh") {
  TempDir dir("capi_mv");
  save_mesh_obj(make_ellipsoid(1.0, 1.0, 2.0, 2), dir.file("e.obj"));
  rm_mesh* mesh = nullptr;
  REQUIRE(rm_mesh_load(dir.file("e.obj").c_str(), 1.0, &mesh) == RM_OK);
  char* report = nullptr;
  char* csv = nullptr;
  REQUIRE(rm_multiview_stats(mesh, 12, 3, &report, &csv) == RM_OK);
  rm_mesh_free(mesh);
  json j = json::parse(take(report));
  CHECK(j["fer2d"]["max"].get<double>() <= 2.05);
  CHECK(j["fer2d"]["min"].get<double>() >= 0.98);
  std::string table = take(csv);
  CHECK(table.find("view,fer2d,circularity") == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 13);  // header + 12 rows
}

TEST_CASE("c api: resolution correction and weight helpers") {
  double c2 = 0.0;
  REQUIRE(rm_resolution_correction(25, 7, &c2) == RM_OK);
  CHECK(c2 == doctest::Approx(0.900).epsilon(0.0012));
  CHECK(rm_resolution_correction(0.5, 7, &c2) == RM_ERR_INVALID_ARGUMENT);

  double kg = 0.0;
  REQUIRE(rm_weight_from_volume(0.001, 2.65, &kg) == RM_OK);
  CHECK(kg == doctest::Approx(2.65));
}

TEST_CASE("c api: cloud round trip, fps, chamfer, sp, cluster") {
  TempDir dir("capi_cloud");
  rock::LabeledPointCloud cloud;
  rock::RngStream rng(3, "capi_cloud");
  for (int blob = 0; blob < 2; ++blob)
    for (int i = 0; i < 300; ++i) {
      rock::Vec3 center{blob * 5.0, 0, 0};
      cloud.points.push_back(
          {center + rng.unit_vector() * 0.5, {uint8_t(blob * 200), 0, 0}, 0, -1});
    }
  rock::save_cloud_ply(cloud, dir.file("cloud.ply"));

  rm_cloud* handle = nullptr;
  REQUIRE(rm_cloud_load(dir.file("cloud.ply").c_str(), &handle) == RM_OK);
  size_t n = 0;
  REQUIRE(rm_cloud_size(handle, &n) == RM_OK);
  CHECK(n == 600);

  rm_cloud* sampled = nullptr;
  REQUIRE(rm_fps(handle, 64, 1, &sampled) == RM_OK);
  REQUIRE(rm_cloud_size(sampled, &n) == RM_OK);
  CHECK(n == 64);

  double cd = 0.0;
  REQUIRE(rm_chamfer(handle, handle, &cd) == RM_OK);
  CHECK(cd == doctest::Approx(0.0));

  rm_cloud* labeled = nullptr;
  char* cluster_report = nullptr;
  REQUIRE(rm_cluster(handle, 0.5, 10, &labeled, &cluster_report) == RM_OK);
  json cj = json::parse(take(cluster_report));
  CHECK(cj["instances"].get<int>() == 2);

  char* sp_report = nullptr;
  REQUIRE(rm_sp_filter(labeled, 75.0, 500, 4.0, &sp_report) == RM_OK);
  json sj = json::parse(take(sp_report));
  CHECK(sj["instances"].get<int>() == 2);

  char* eval = nullptr;
  char* eval_csv = nullptr;
  REQUIRE(rm_eval_segmentation(labeled, labeled, 0.5, &eval, &eval_csv) == RM_OK);
  json ej = json::parse(take(eval));
  CHECK(ej["completeness"].get<double>() == doctest::Approx(100.0));
  CHECK(ej["iou_ap"].get<double>() == doctest::Approx(100.0));
  std::string score_table = take(eval_csv);
  CHECK(score_table.find("predicted,truth,iou") == 0);
  CHECK(score_table.find("completeness=100") != std::string::npos);

  rm_cloud_free(labeled);
  rm_cloud_free(sampled);
  rm_cloud_free(handle);
}

TEST_CASE("c api: threads setter") {
  CHECK(rm_set_threads(2) == RM_OK);
  CHECK(rm_set_threads(0) == RM_OK);
}
