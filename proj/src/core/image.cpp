#include "image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <queue>

namespace rock {

size_t BinaryMask::area() const {
  size_t n = 0;
  for (uint8_t v : data) n += v;
  return n;
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

ImageRgb8 load_png(std::FILE* f, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(ErrorKind::io, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(ErrorKind::io, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::parse, "png decode failed: " + path);
  }
  png_init_io(png, f);
  png_read_info(png, info);

  png_uint_32 w, h;
  int bit_depth, color_type;
  png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  ImageRgb8 img{int(w), int(h)};
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = img.px(0, int(y));
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

// ---------------------------------------------------------------------------
// JPEG

struct JpegErrorMgr {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(mgr->jump, 1);
}

ImageRgb8 load_jpeg(std::FILE* f, const std::string& path) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail(ErrorKind::parse, "jpeg decode failed: " + path);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  ImageRgb8 img(int(cinfo.output_width), int(cinfo.output_height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = img.px(0, int(cinfo.output_scanline));
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

// ---------------------------------------------------------------------------
// PNM

int pnm_next_int(std::FILE* f, const std::string& path) {
  int c;
  for (;;) {
    c = std::fgetc(f);
    if (c == '#') {
      while (c != EOF && c != '\n') c = std::fgetc(f);
    } else if (!std::isspace(c)) {
      break;
    }
  }
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = std::fgetc(f);
  }
  if (!any) fail(ErrorKind::parse, "malformed pnm header: " + path);
  return value;
}

ImageRgb8 load_ppm(std::FILE* f, const std::string& path) {
  int w = pnm_next_int(f, path);
  int h = pnm_next_int(f, path);
  int maxv = pnm_next_int(f, path);
  if (maxv != 255) fail(ErrorKind::parse, "only 8-bit ppm supported: " + path);
  ImageRgb8 img(w, h);
  if (std::fread(img.data.data(), 1, img.data.size(), f) != img.data.size())
    fail(ErrorKind::parse, "truncated ppm: " + path);
  return img;
}

}  // namespace

ImageRgb8 load_image(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) fail(ErrorKind::io, "cannot open " + path);
  FileCloser closer{f};
  unsigned char sig[8] = {0};
  size_t got = std::fread(sig, 1, sizeof(sig), f);
  std::rewind(f);
  if (got >= 8 && png_sig_cmp(sig, 0, 8) == 0) return load_png(f, path);
  if (got >= 2 && sig[0] == 0xFF && sig[1] == 0xD8) return load_jpeg(f, path);
  if (got >= 2 && sig[0] == 'P' && sig[1] == '6') {
    std::fseek(f, 2, SEEK_SET);
    return load_ppm(f, path);
  }
  fail(ErrorKind::parse, "unrecognized image format: " + path);
}

void save_mask_pgm(const BinaryMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  std::vector<uint8_t> row(size_t(mask.width));
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) row[size_t(x)] = mask.at(x, y) ? 255 : 0;
    out.write(reinterpret_cast<const char*>(row.data()), mask.width);
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

BinaryMask load_mask_pgm(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) fail(ErrorKind::io, "cannot open " + path);
  FileCloser closer{f};
  char magic[2];
  if (std::fread(magic, 1, 2, f) != 2 || magic[0] != 'P' || magic[1] != '5')
    fail(ErrorKind::parse, "not a P5 pgm: " + path);
  int w = pnm_next_int(f, path);
  int h = pnm_next_int(f, path);
  int maxv = pnm_next_int(f, path);
  if (maxv != 255) fail(ErrorKind::parse, "only 8-bit pgm supported: " + path);
  std::vector<uint8_t> raw(size_t(w) * size_t(h));
  if (std::fread(raw.data(), 1, raw.size(), f) != raw.size())
    fail(ErrorKind::parse, "truncated pgm: " + path);
  BinaryMask mask(w, h);
  for (size_t i = 0; i < raw.size(); ++i) mask.data[i] = raw[i] >= 128 ? 1 : 0;
  return mask;
}

void save_gray_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.put(char(uint8_t(std::clamp(img.at(x, y), 0.f, 1.f) * 255.f + 0.5f)));
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

ImageRgb8 resize_bilinear(const ImageRgb8& img, int new_w, int new_h) {
  if (new_w <= 0 || new_h <= 0) fail(ErrorKind::invalid_argument, "bad resize dims");
  ImageRgb8 out(new_w, new_h);
  double sx = double(img.width) / new_w;
  double sy = double(img.height) / new_h;
  for (int y = 0; y < new_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = std::clamp(int(std::floor(fy)), 0, img.height - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double wy = std::clamp(fy - y0, 0.0, 1.0);
    for (int x = 0; x < new_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = std::clamp(int(std::floor(fx)), 0, img.width - 1);
      int x1 = std::min(x0 + 1, img.width - 1);
      double wx = std::clamp(fx - x0, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        double v = (1 - wy) * ((1 - wx) * img.px(x0, y0)[c] + wx * img.px(x1, y0)[c]) +
                   wy * ((1 - wx) * img.px(x0, y1)[c] + wx * img.px(x1, y1)[c]);
        out.px(x, y)[c] = uint8_t(std::clamp(v, 0.0, 255.0) + 0.5);
      }
    }
  }
  return out;
}

BinaryMask resize_nearest(const BinaryMask& mask, int new_w, int new_h) {
  if (new_w <= 0 || new_h <= 0) fail(ErrorKind::invalid_argument, "bad resize dims");
  BinaryMask out(new_w, new_h);
  for (int y = 0; y < new_h; ++y) {
    int sy = std::min(mask.height - 1, int((y + 0.5) * mask.height / new_h));
    for (int x = 0; x < new_w; ++x) {
      int sx = std::min(mask.width - 1, int((x + 0.5) * mask.width / new_w));
      out.set(x, y, mask.at(sx, sy));
    }
  }
  out.scale = mask.scale;  // caller rescales if it matters
  return out;
}

std::vector<int> label_components(const BinaryMask& mask, int& n_components) {
  std::vector<int> labels(size_t(mask.width) * size_t(mask.height), 0);
  n_components = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      size_t idx = size_t(y) * size_t(mask.width) + size_t(x);
      if (!mask.at(x, y) || labels[idx] != 0) continue;
      int label = ++n_components;
      stack.push_back({x, y});
      labels[idx] = label;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            int px = cx + dx, py = cy + dy;
            if (px < 0 || py < 0 || px >= mask.width || py >= mask.height) continue;
            size_t pidx = size_t(py) * size_t(mask.width) + size_t(px);
            if (mask.data[pidx] && labels[pidx] == 0) {
              labels[pidx] = label;
              stack.push_back({px, py});
            }
          }
      }
    }
  }
  return labels;
}

bool touches_border(const BinaryMask& mask) {
  for (int x = 0; x < mask.width; ++x)
    if (mask.at(x, 0) || mask.at(x, mask.height - 1)) return true;
  for (int y = 0; y < mask.height; ++y)
    if (mask.at(0, y) || mask.at(mask.width - 1, y)) return true;
  return false;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width != b.width || a.height != b.height)
    fail(ErrorKind::invalid_argument, "mask dimensions differ");
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    inter += (a.data[i] && b.data[i]) ? 1 : 0;
    uni += (a.data[i] || b.data[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

BinaryMask largest_component(const BinaryMask& mask) {
  int n = 0;
  std::vector<int> labels = label_components(mask, n);
  if (n == 0) return mask;
  std::vector<size_t> counts(size_t(n) + 1, 0);
  for (int l : labels) counts[size_t(l)]++;
  int best = 1;
  for (int l = 2; l <= n; ++l)
    if (counts[size_t(l)] > counts[size_t(best)]) best = l;
  BinaryMask out(mask.width, mask.height);
  for (size_t i = 0; i < labels.size(); ++i) out.data[i] = labels[i] == best ? 1 : 0;
  out.scale = mask.scale;
  return out;
}

}  // namespace rock
