#include "mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace rock {

Vec3 TriMesh::bbox_min() const {
  if (vertices.empty()) fail(ErrorKind::domain, "empty mesh has no bounding box");
  Vec3 lo = vertices[0];
  for (const Vec3& v : vertices) lo = min3(lo, v);
  return lo;
}

Vec3 TriMesh::bbox_max() const {
  if (vertices.empty()) fail(ErrorKind::domain, "empty mesh has no bounding box");
  Vec3 hi = vertices[0];
  for (const Vec3& v : vertices) hi = max3(hi, v);
  return hi;
}

bool is_watertight(const TriMesh& mesh) {
  if (mesh.faces.empty()) return false;
  // Undirected edge -> incident face count.
  std::unordered_map<uint64_t, int> edges;
  edges.reserve(mesh.faces.size() * 3);
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      uint32_t a = f[size_t(e)], b = f[size_t((e + 1) % 3)];
      if (a == b) return false;
      uint64_t key = a < b ? (uint64_t(a) << 32 | b) : (uint64_t(b) << 32 | a);
      if (++edges[key] > 2) return false;
    }
  }
  for (const auto& [k, count] : edges)
    if (count != 2) return false;
  return true;
}

// ---------------------------------------------------------------------------
// OBJ

namespace {

[[noreturn]] void parse_fail(const std::string& path, size_t line, const std::string& what) {
  fail(ErrorKind::parse, path + ":" + std::to_string(line) + ": " + what);
}

uint8_t color_byte(double v) {
  // OBJ colors are floats in [0,1]; PLY-style 0..255 also appears in the wild.
  if (v <= 1.0) return uint8_t(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
  return uint8_t(std::clamp(v, 0.0, 255.0) + 0.5);
}

TriMesh load_obj(const std::string& path, double unit_scale) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  TriMesh mesh;
  bool any_color = false;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) parse_fail(path, lineno, "bad vertex line");
      mesh.vertices.push_back(Vec3{x, y, z} * unit_scale);
      double r, g, b;
      if (ss >> r >> g >> b) {
        mesh.vertex_colors.resize(mesh.vertices.size());
        mesh.vertex_colors.back() = {color_byte(r), color_byte(g), color_byte(b)};
        any_color = true;
      } else if (any_color) {
        mesh.vertex_colors.resize(mesh.vertices.size());
      }
    } else if (tag == "f") {
      std::vector<long> idx;
      std::string tok;
      while (ss >> tok) {
        // "i", "i/t", "i//n", "i/t/n"
        size_t slash = tok.find('/');
        std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        long i = 0;
        auto [p, ec] = std::from_chars(head.data(), head.data() + head.size(), i);
        if (ec != std::errc() || p != head.data() + head.size())
          parse_fail(path, lineno, "bad face index '" + tok + "'");
        if (i < 0) i = long(mesh.vertices.size()) + i + 1;  // negative = relative
        if (i < 1 || size_t(i) > mesh.vertices.size())
          parse_fail(path, lineno, "face index out of range");
        idx.push_back(i - 1);
      }
      if (idx.size() < 3) parse_fail(path, lineno, "face with fewer than 3 vertices");
      for (size_t k = 2; k < idx.size(); ++k)
        mesh.faces.push_back({uint32_t(idx[0]), uint32_t(idx[k - 1]), uint32_t(idx[k])});
    }
    // vn/vt/usemtl etc. are ignored.
  }
  if (mesh.vertices.empty()) parse_fail(path, lineno, "no vertices found");
  if (!any_color) mesh.vertex_colors.clear();
  if (mesh.vertex_colors.size() < mesh.vertices.size()) mesh.vertex_colors.resize(mesh.vertices.size());
  return mesh;
}

// ---------------------------------------------------------------------------
// PLY

struct PlyProperty {
  std::string name;
  std::string type;       // scalar type, or list value type
  std::string count_type; // non-empty for lists
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> props;
};

size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "int8" || t == "uchar" || t == "uint8") return 1;
  if (t == "short" || t == "int16" || t == "ushort" || t == "uint16") return 2;
  if (t == "int" || t == "int32" || t == "uint" || t == "uint32" || t == "float" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  fail(ErrorKind::parse, "unknown ply type " + t);
}

double ply_read_binary(std::ifstream& in, const std::string& t) {
  unsigned char buf[8];
  size_t n = ply_type_size(t);
  in.read(reinterpret_cast<char*>(buf), std::streamsize(n));
  if (!in) fail(ErrorKind::parse, "ply: unexpected end of binary data");
  auto le = [&](auto value) {
    std::memcpy(&value, buf, sizeof(value));
    return value;
  };
  if (t == "char" || t == "int8") return double(int8_t(buf[0]));
  if (t == "uchar" || t == "uint8") return double(buf[0]);
  if (t == "short" || t == "int16") return double(le(int16_t{}));
  if (t == "ushort" || t == "uint16") return double(le(uint16_t{}));
  if (t == "int" || t == "int32") return double(le(int32_t{}));
  if (t == "uint" || t == "uint32") return double(le(uint32_t{}));
  if (t == "float" || t == "float32") return double(le(float{}));
  return le(double{});
}

TriMesh load_ply(const std::string& path, double unit_scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);

  std::string line;
  size_t lineno = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) parse_fail(path, lineno, "unexpected end of header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++lineno;
  };

  next_line();
  if (line != "ply") parse_fail(path, lineno, "not a ply file");
  bool binary = false;
  std::vector<PlyElement> elements;
  for (;;) {
    next_line();
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "comment" || tag == "obj_info") continue;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else parse_fail(path, lineno, "unsupported ply format " + fmt);
    } else if (tag == "element") {
      PlyElement el;
      ss >> el.name >> el.count;
      elements.push_back(el);
    } else if (tag == "property") {
      if (elements.empty()) parse_fail(path, lineno, "property before element");
      PlyProperty p;
      std::string t;
      ss >> t;
      if (t == "list") {
        p.is_list = true;
        ss >> p.count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ss >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (tag == "end_header") {
      break;
    } else {
      parse_fail(path, lineno, "unknown header line '" + line + "'");
    }
  }

  TriMesh mesh;
  bool has_color = false;
  std::vector<std::string> ascii_tokens;

  auto read_scalar_ascii = [&](std::istringstream& ss) {
    double v;
    if (!(ss >> v)) parse_fail(path, lineno, "short data row");
    return v;
  };

  for (const PlyElement& el : elements) {
    bool is_vertex = el.name == "vertex";
    bool is_face = el.name == "face";
    if (is_vertex) {
      for (const auto& p : el.props)
        if (p.name == "red") has_color = true;
      mesh.vertices.reserve(el.count);
      if (has_color) mesh.vertex_colors.reserve(el.count);
    }
    for (size_t i = 0; i < el.count; ++i) {
      std::istringstream ss;
      if (!binary) {
        next_line();
        ss.str(line);
      }
      Vec3 v{};
      Rgb8 c{};
      std::vector<uint32_t> poly;
      for (const auto& p : el.props) {
        if (p.is_list) {
          size_t n = size_t(binary ? ply_read_binary(in, p.count_type) : read_scalar_ascii(ss));
          poly.resize(n);
          for (size_t k = 0; k < n; ++k) {
            double val = binary ? ply_read_binary(in, p.type) : read_scalar_ascii(ss);
            poly[k] = uint32_t(val);
          }
        } else {
          double val = binary ? ply_read_binary(in, p.type) : read_scalar_ascii(ss);
          if (is_vertex) {
            if (p.name == "x") v.x = val;
            else if (p.name == "y") v.y = val;
            else if (p.name == "z") v.z = val;
            else if (p.name == "red") c.r = uint8_t(val);
            else if (p.name == "green") c.g = uint8_t(val);
            else if (p.name == "blue") c.b = uint8_t(val);
          }
        }
      }
      if (is_vertex) {
        mesh.vertices.push_back(v * unit_scale);
        if (has_color) mesh.vertex_colors.push_back(c);
      } else if (is_face && !poly.empty()) {
        if (poly.size() < 3) parse_fail(path, lineno, "face with fewer than 3 vertices");
        for (uint32_t ix : poly)
          if (ix >= mesh.vertices.size()) parse_fail(path, lineno, "face index out of range");
        for (size_t k = 2; k < poly.size(); ++k)
          mesh.faces.push_back({poly[0], poly[k - 1], poly[k]});
      }
    }
  }
  if (mesh.vertices.empty()) fail(ErrorKind::parse, path + ": no vertices found");
  return mesh;
}

std::string lower_ext(const std::string& path) {
  size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

TriMesh load_mesh(const std::string& path, double unit_scale) {
  if (unit_scale <= 0.0) fail(ErrorKind::invalid_argument, "unit_scale must be positive");
  std::string ext = lower_ext(path);
  TriMesh mesh;
  if (ext == "obj") mesh = load_obj(path, unit_scale);
  else if (ext == "ply") mesh = load_ply(path, unit_scale);
  else fail(ErrorKind::invalid_argument, "unsupported mesh format: " + path);
  mesh.non_manifold = !mesh.faces.empty() && !is_watertight(mesh);
  return mesh;
}

void save_mesh_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  char buf[256];
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    if (mesh.has_colors()) {
      const Rgb8& c = mesh.vertex_colors[i];
      std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g %.6f %.6f %.6f\n", v.x, v.y, v.z,
                    c.r / 255.0, c.g / 255.0, c.b / 255.0);
    } else {
      std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
    }
    out << buf;
  }
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

void save_mesh_ply(const TriMesh& mesh, const std::string& path, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (mesh.has_colors())
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.faces.size() << "\n";
  out << "property list uchar uint vertex_indices\n";
  out << "end_header\n";
  if (binary) {
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      const Vec3& v = mesh.vertices[i];
      out.write(reinterpret_cast<const char*>(&v.x), 8);
      out.write(reinterpret_cast<const char*>(&v.y), 8);
      out.write(reinterpret_cast<const char*>(&v.z), 8);
      if (mesh.has_colors()) {
        const Rgb8& c = mesh.vertex_colors[i];
        out.put(char(c.r)).put(char(c.g)).put(char(c.b));
      }
    }
    for (const auto& f : mesh.faces) {
      out.put(char(3));
      out.write(reinterpret_cast<const char*>(f.data()), 12);
    }
  } else {
    char buf[256];
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      const Vec3& v = mesh.vertices[i];
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", v.x, v.y, v.z);
      out << buf;
      if (mesh.has_colors()) {
        const Rgb8& c = mesh.vertex_colors[i];
        out << ' ' << int(c.r) << ' ' << int(c.g) << ' ' << int(c.b);
      }
      out << '\n';
    }
    for (const auto& f : mesh.faces)
      out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "obj") save_mesh_obj(mesh, path);
  else if (ext == "ply") save_mesh_ply(mesh, path);
  else fail(ErrorKind::invalid_argument, "unsupported mesh format: " + path);
}

namespace {

// Winding coherence: every undirected edge of a coherently oriented surface
// is traversed once in each direction. Scanned meshes sometimes arrive with
// a subset of faces flipped; a BFS across shared edges repairs that so the
// signed tetrahedron sum sees one consistent orientation.
std::vector<std::array<uint32_t, 3>> coherently_oriented(const TriMesh& mesh) {
  std::vector<std::array<uint32_t, 3>> faces = mesh.faces;
  std::unordered_map<uint64_t, std::vector<uint32_t>> edge_faces;
  edge_faces.reserve(faces.size() * 3);
  auto edge_key = [](uint32_t a, uint32_t b) {
    return a < b ? (uint64_t(a) << 32 | b) : (uint64_t(b) << 32 | a);
  };
  for (uint32_t fi = 0; fi < faces.size(); ++fi)
    for (int e = 0; e < 3; ++e)
      edge_faces[edge_key(faces[fi][size_t(e)], faces[fi][size_t((e + 1) % 3)])].push_back(fi);

  auto traverses = [&](uint32_t fi, uint32_t a, uint32_t b) {
    const auto& f = faces[fi];
    for (int e = 0; e < 3; ++e)
      if (f[size_t(e)] == a && f[size_t((e + 1) % 3)] == b) return true;
    return false;
  };

  std::vector<uint8_t> visited(faces.size(), 0);
  std::vector<uint32_t> queue;
  for (uint32_t start = 0; start < faces.size(); ++start) {
    if (visited[start]) continue;
    visited[start] = 1;
    queue.push_back(start);
    while (!queue.empty()) {
      uint32_t fi = queue.back();
      queue.pop_back();
      for (int e = 0; e < 3; ++e) {
        uint32_t a = faces[fi][size_t(e)], b = faces[fi][size_t((e + 1) % 3)];
        for (uint32_t nb : edge_faces[edge_key(a, b)]) {
          if (nb == fi || visited[nb]) continue;
          visited[nb] = 1;
          // The neighbor must traverse the shared edge in the opposite
          // direction; flip it if it agrees with us instead.
          if (traverses(nb, a, b)) std::swap(faces[nb][1], faces[nb][2]);
          queue.push_back(nb);
        }
      }
    }
  }
  return faces;
}

}  // namespace

MeshMeasures mesh_measures(const TriMesh& mesh) {
  MeshMeasures out;
  double area = 0.0;
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    area += 0.5 * norm(cross(b - a, c - a));
  }
  out.surface_area = area;
  if (mesh.faces.empty() || !is_watertight(mesh)) return out;

  double vol6 = 0.0;          // six times signed volume
  Vec3 moment{0, 0, 0};       // integral of position over the signed tets
  for (const auto& f : coherently_oriented(mesh)) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    double sv = dot(a, cross(b, c));  // 6 * signed tet volume with apex at origin
    vol6 += sv;
    moment += (a + b + c) * (sv / 4.0);  // tet centroid = (a+b+c+0)/4
  }
  out.volume = std::fabs(vol6) / 6.0;
  if (std::fabs(vol6) > 1e-300) out.centroid = moment / vol6;
  return out;
}

TriMesh recenter(const TriMesh& mesh) {
  if (mesh.vertices.empty()) fail(ErrorKind::domain, "cannot recenter an empty mesh");
  Vec3 mean{0, 0, 0};
  for (const Vec3& v : mesh.vertices) mean += v;
  mean = mean / double(mesh.vertices.size());
  TriMesh out = mesh;
  for (Vec3& v : out.vertices) v -= mean;
  return out;
}

TriMesh transformed(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation) {
  TriMesh out = mesh;
  for (Vec3& v : out.vertices) v = rotation * v + translation;
  return out;
}

TriMesh scaled(const TriMesh& mesh, double factor) {
  TriMesh out = mesh;
  for (Vec3& v : out.vertices) v *= factor;
  return out;
}

}  // namespace rock
