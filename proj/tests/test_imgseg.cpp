#include <doctest.h>

#include <cstddef>
#include <cstdio>

#include <jpeglib.h>
#include <png.h>

#include <array>
#include <cmath>

#include "fixtures.hpp"
#include "imgseg.hpp"

using namespace rock;
using namespace fixtures;

namespace {

// Test-only encoders so the real decode paths get exercised.
void write_png(const ImageRgb8& img, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  REQUIRE(setjmp(png_jmpbuf(png)) == 0);
  png_init_io(png, f);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.px(0, y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

void write_jpeg(const ImageRgb8& img, const std::string& path, int quality = 95) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  jpeg_compress_struct cinfo;
  jpeg_error_mgr err;
  cinfo.err = jpeg_std_error(&err);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, f);
  cinfo.image_width = JDIMENSION(img.width);
  cinfo.image_height = JDIMENSION(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(img.px(0, int(cinfo.next_scanline)));
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(f);
}

ImageRgb8 solid_image(int w, int h, uint8_t r, uint8_t g, uint8_t b) {
  ImageRgb8 img{w, h};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.px(x, y)[0] = r;
      img.px(x, y)[1] = g;
      img.px(x, y)[2] = b;
    }
  return img;
}

GrayImage two_level_raster(double lo, double hi, double lo_fraction, int w = 100, int h = 100) {
  GrayImage g{w, h};
  size_t cut = size_t(lo_fraction * double(w) * double(h));
  for (size_t i = 0; i < g.data.size(); ++i) g.data[i] = float(i < cut ? lo : hi);
  return g;
}

// Blue backdrop with a left-to-right shadow gradient and a rotated tan
// ellipse; the exact coverage raster is the segmentation ground truth.
struct ShadowFixture {
  ImageRgb8 image;
  BinaryMask truth;
};

ShadowFixture make_shadow_fixture(double brightness = 1.0) {
  int w = 512, h = 384;
  ShadowFixture fx{solid_image(w, h, 0, 0, 0), BinaryMask(w, h)};
  double cx = w / 2.0, cy = h / 2.0;
  double sa = std::sin(0.5), ca = std::cos(0.5);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double shade = (0.55 + 0.45 * double(x) / w) * brightness;
      double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      double u = ca * dx + sa * dy, v = -sa * dx + ca * dy;
      bool inside = u * u / (140.0 * 140.0) + v * v / (90.0 * 90.0) <= 1.0;
      double r = inside ? 180 : 70, g = inside ? 150 : 110, b = inside ? 110 : 180;
      fx.image.px(x, y)[0] = uint8_t(std::clamp(r * shade, 0.0, 255.0));
      fx.image.px(x, y)[1] = uint8_t(std::clamp(g * shade, 0.0, 255.0));
      fx.image.px(x, y)[2] = uint8_t(std::clamp(b * shade, 0.0, 255.0));
      fx.truth.set(x, y, inside);
    }
  return fx;
}

}  // namespace

TEST_CASE("rgb_to_lab reference colors") {
  LabImage white = rgb_to_lab(solid_image(8, 8, 255, 255, 255));
  CHECK(white.l_at(0, 0) * 100.0 == doctest::Approx(100.0).epsilon(0.001));
  CHECK(white.a_at(0, 0) == doctest::Approx(0.5));  // constant chroma -> midpoint
  CHECK(white.b_at(0, 0) == doctest::Approx(0.5));

  LabImage black = rgb_to_lab(solid_image(8, 8, 0, 0, 0));
  CHECK(black.l_at(0, 0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(black.a_at(0, 0) == doctest::Approx(0.5));

  LabImage gray = rgb_to_lab(solid_image(8, 8, 128, 128, 128));
  CHECK(gray.a_at(0, 0) == doctest::Approx(white.a_at(0, 0)));
  CHECK(gray.b_at(0, 0) == doctest::Approx(white.b_at(0, 0)));
}

TEST_CASE("representative_colors finds the two CDF turning points") {
  GrayImage raster = two_level_raster(0.40, 0.89, 0.70);
  RepresentativeColors rep = representative_colors(raster);
  CHECK(std::fabs(rep.background - 0.40) < 0.01);
  CHECK(std::fabs(rep.foreground - 0.89) < 0.01);
}

TEST_CASE("representative_colors breaks ties toward the lower value") {
  GrayImage raster = two_level_raster(0.0, 1.0, 0.50);
  RepresentativeColors rep = representative_colors(raster);
  CHECK(std::fabs(rep.background - 0.0) < 0.01);
  CHECK(std::fabs(rep.foreground - 1.0) < 0.01);
}

TEST_CASE("representative_colors rejects a constant raster") {
  GrayImage raster{32, 32, 0.5f};
  CHECK_THROWS_AS(representative_colors(raster), Error);
}

TEST_CASE("distance_map raw values and monotonicity") {
  LabImage lab;
  lab.width = 3;
  lab.height = 1;
  lab.L = {0.5f, 0.5f, 0.5f};
  lab.a = {0.2f, 0.5f, 0.9f};
  lab.b = {0.3f, 0.7f, 0.1f};
  GrayImage raw = distance_map(lab, 0.2, 0.3, 2.0, false);
  CHECK(raw.at(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(raw.at(1, 0) == doctest::Approx(0.09 + 0.16).epsilon(1e-5));

  // Larger chroma offset never yields a smaller raw distance.
  for (double gamma : {1.0, 2.0, 3.0}) {
    double prev = -1.0;
    for (int step = 0; step <= 100; ++step) {
      LabImage px;
      px.width = 1;
      px.height = 1;
      px.L = {0.5f};
      px.a = {float(0.2 + 0.01 * step * 0.6)};
      px.b = {float(0.3 + 0.01 * step * 0.5)};
      double d = distance_map(px, 0.2, 0.3, gamma, false).at(0, 0);
      CHECK(d >= prev - 1e-12);
      prev = d;
    }
  }
}

TEST_CASE("otsu matches a brute-force search over all cut points") {
  GrayImage raster = two_level_raster(0.1, 0.9, 0.6, 64, 64);
  // Spread the levels slightly so the histogram is not two lone spikes.
  for (size_t i = 0; i < raster.data.size(); ++i)
    raster.data[i] += float(0.02 * std::sin(double(i) * 0.7));

  double threshold = otsu_threshold(raster);
  CHECK(threshold > 0.12);
  CHECK(threshold < 0.88);

  // Independent oracle: maximize between-class variance over every cut.
  double best_var = -1.0;
  int best_cut = 0;
  std::array<size_t, 256> hist{};
  for (float v : raster.data) hist[size_t(std::clamp(int(v * 256), 0, 255))]++;
  for (int cut = 0; cut < 255; ++cut) {
    double w0 = 0, w1 = 0, m0 = 0, m1 = 0;
    for (int i = 0; i < 256; ++i) {
      if (i <= cut) {
        w0 += double(hist[size_t(i)]);
        m0 += double(i) * double(hist[size_t(i)]);
      } else {
        w1 += double(hist[size_t(i)]);
        m1 += double(i) * double(hist[size_t(i)]);
      }
    }
    if (w0 == 0 || w1 == 0) continue;
    m0 /= w0;
    m1 /= w1;
    double var = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (var > best_var) {
      best_var = var;
      best_cut = cut;
    }
  }
  CHECK(threshold == doctest::Approx((best_cut + 1) / 256.0));
}

TEST_CASE("binarize_and_clean removes salt noise and keeps the blob") {
  GrayImage g{128, 128, 1.0f};  // far from the foreground color everywhere
  for (int y = 40; y < 90; ++y)
    for (int x = 40; x < 90; ++x) g.at(x, y) = 0.05f;
  g.at(10, 10) = 0.02f;
  g.at(100, 20) = 0.02f;

  BinarizeParams params;
  params.method = ThresholdMethod::fixed;
  params.fixed_value = 0.5;
  BinaryMask mask = binarize_and_clean(g, params);
  CHECK_FALSE(mask.at(10, 10));
  CHECK_FALSE(mask.at(100, 20));
  CHECK(mask.at(64, 64));
  int n = 0;
  label_components(mask, n);
  CHECK(n == 1);
}

TEST_CASE("binarize_and_clean clears components touching the border") {
  GrayImage g{96, 96, 1.0f};
  for (int y = 30; y < 60; ++y)
    for (int x = 30; x < 60; ++x) g.at(x, y) = 0.0f;  // interior blob
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) g.at(x, y) = 0.0f;  // corner blob
  BinarizeParams params;
  params.method = ThresholdMethod::fixed;
  params.fixed_value = 0.5;
  BinaryMask mask = binarize_and_clean(g, params);
  CHECK(mask.at(45, 45));
  CHECK_FALSE(mask.at(5, 5));
}

TEST_CASE("adaptive thresholding tracks a slow illumination ramp") {
  // A ramp background defeats any single global cut; the local-mean rule
  // keeps only the genuinely dark blob.
  GrayImage g{200, 160};
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) g.at(x, y) = 0.3f + 0.4f * float(x) / float(g.width);
  for (int y = 60; y < 100; ++y)
    for (int x = 140; x < 180; ++x) g.at(x, y) -= 0.2f;  // blob on the bright side

  BinarizeParams params;
  params.method = ThresholdMethod::adaptive;
  BinaryMask mask = binarize_and_clean(g, params);
  CHECK(mask.at(160, 80));
  // The dark end of the ramp itself must not be picked up.
  size_t ramp_fg = 0;
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < 100; ++x) ramp_fg += mask.at(x, y) ? 1 : 0;
  CHECK(ramp_fg == 0);
}

TEST_CASE("binarize_and_clean fails when nothing is left") {
  GrayImage g{64, 64, 1.0f};
  BinarizeParams params;
  params.method = ThresholdMethod::fixed;
  params.fixed_value = 0.5;
  CHECK_THROWS_AS(binarize_and_clean(g, params), Error);
}

TEST_CASE("binarize_and_clean is idempotent on its own output") {
  ShadowFixture fx = make_shadow_fixture();
  BinaryMask mask = segment(fx.image);
  GrayImage as_gray{mask.width, mask.height};
  for (size_t i = 0; i < mask.data.size(); ++i) as_gray.data[i] = mask.data[i] ? 0.f : 1.f;
  BinarizeParams params;
  params.method = ThresholdMethod::fixed;
  params.fixed_value = 0.5;
  BinaryMask again = binarize_and_clean(as_gray, params);
  CHECK(mask_iou(mask, again) == doctest::Approx(1.0));
}

TEST_CASE("segment recovers the ellipse under a shadow gradient") {
  ShadowFixture fx = make_shadow_fixture();
  SegmentReport report;
  BinaryMask mask = segment(fx.image, {}, &report);
  CHECK(mask_iou(mask, fx.truth) >= 0.95);
  CHECK(report.component_count == 1);
}

TEST_CASE("segment is stable under uniform brightness shifts") {
  BinaryMask base = segment(make_shadow_fixture(1.0).image);
  BinaryMask dim = segment(make_shadow_fixture(0.8).image);
  BinaryMask bright = segment(make_shadow_fixture(1.2).image);
  CHECK(mask_iou(base, dim) >= 0.95);
  CHECK(mask_iou(base, bright) >= 0.95);
}

TEST_CASE("segment fails on a backdrop-only image") {
  CHECK_THROWS_AS(segment(solid_image(128, 128, 70, 110, 180)), Error);
}

TEST_CASE("png and jpeg photos decode and segment end to end") {
  TempDir dir("imgseg_codecs");
  ShadowFixture fx = make_shadow_fixture();

  write_png(fx.image, dir.file("scene.png"));
  ImageRgb8 png_img = load_image(dir.file("scene.png"));
  REQUIRE(png_img.width == fx.image.width);
  REQUIRE(png_img.height == fx.image.height);
  CHECK(png_img.data == fx.image.data);  // png is lossless
  CHECK(mask_iou(segment(png_img), fx.truth) >= 0.95);

  write_jpeg(fx.image, dir.file("scene.jpg"));
  ImageRgb8 jpg_img = load_image(dir.file("scene.jpg"));
  REQUIRE(jpg_img.width == fx.image.width);
  CHECK(mask_iou(segment(jpg_img), fx.truth) >= 0.95);

  CHECK_THROWS_AS(load_image(dir.file("missing.png")), Error);
  write_file(dir.file("junk.png"), "not an image at all");
  CHECK_THROWS_AS(load_image(dir.file("junk.png")), Error);
}

TEST_CASE("segment keeps two separated rocks unless largest_only is set") {
  int w = 320, h = 240;
  ImageRgb8 img = solid_image(w, h, 70, 110, 180);
  auto paint_disc = [&](int cx, int cy, int r) {
    for (int y = cy - r; y <= cy + r; ++y)
      for (int x = cx - r; x <= cx + r; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) {
          img.px(x, y)[0] = 180;
          img.px(x, y)[1] = 150;
          img.px(x, y)[2] = 110;
        }
  };
  paint_disc(100, 120, 40);
  paint_disc(230, 120, 30);

  SegmentReport report;
  BinaryMask both = segment(img, {}, &report);
  CHECK(report.component_count == 2);

  SegmentOptions opts;
  opts.largest_only = true;
  BinaryMask one = segment(img, opts, &report);
  int n = 0;
  label_components(one, n);
  CHECK(n == 1);
  CHECK(one.area() < both.area());
}
