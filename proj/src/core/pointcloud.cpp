#include "pointcloud.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rock {

std::vector<Vec3> LabeledPointCloud::positions() const {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const LabeledPoint& p : points) out.push_back(p.position);
  return out;
}

Vec3 LabeledPointCloud::centroid() const {
  if (points.empty()) fail(ErrorKind::domain, "centroid of an empty cloud");
  Vec3 c{0, 0, 0};
  for (const LabeledPoint& p : points) c += p.position;
  return c / double(points.size());
}

void save_cloud_ply(const LabeledPointCloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "property ushort lidar_id\nproperty int instance_id\n";
  out << "end_header\n";
  for (const LabeledPoint& p : cloud.points) {
    out.write(reinterpret_cast<const char*>(&p.position.x), 8);
    out.write(reinterpret_cast<const char*>(&p.position.y), 8);
    out.write(reinterpret_cast<const char*>(&p.position.z), 8);
    out.put(char(p.rgb.r)).put(char(p.rgb.g)).put(char(p.rgb.b));
    out.write(reinterpret_cast<const char*>(&p.lidar_id), 2);
    out.write(reinterpret_cast<const char*>(&p.instance_id), 4);
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

namespace {

size_t ply_scalar_size(const std::string& t) {
  if (t == "char" || t == "int8" || t == "uchar" || t == "uint8") return 1;
  if (t == "short" || t == "int16" || t == "ushort" || t == "uint16") return 2;
  if (t == "int" || t == "int32" || t == "uint" || t == "uint32" || t == "float" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  fail(ErrorKind::parse, "unknown ply type " + t);
}

double decode_scalar(const unsigned char* p, const std::string& t) {
  auto le = [&](auto value) {
    std::memcpy(&value, p, sizeof(value));
    return value;
  };
  if (t == "char" || t == "int8") return double(int8_t(p[0]));
  if (t == "uchar" || t == "uint8") return double(p[0]);
  if (t == "short" || t == "int16") return double(le(int16_t{}));
  if (t == "ushort" || t == "uint16") return double(le(uint16_t{}));
  if (t == "int" || t == "int32") return double(le(int32_t{}));
  if (t == "uint" || t == "uint32") return double(le(uint32_t{}));
  if (t == "float" || t == "float32") return double(le(float{}));
  return le(double{});
}

}  // namespace

LabeledPointCloud load_cloud_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || (line != "ply" && line != "ply\r"))
    fail(ErrorKind::parse, "not a ply file: " + path);

  bool binary = false;
  size_t vertex_count = 0;
  struct Prop {
    std::string name, type;
  };
  std::vector<Prop> props;
  bool in_vertex = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      binary = fmt == "binary_little_endian";
      if (!binary && fmt != "ascii") fail(ErrorKind::parse, "unsupported ply format: " + fmt);
    } else if (tag == "element") {
      std::string name;
      size_t count;
      ss >> name >> count;
      in_vertex = name == "vertex";
      if (in_vertex) vertex_count = count;
    } else if (tag == "property" && in_vertex) {
      Prop p;
      ss >> p.type >> p.name;
      if (p.type == "list") fail(ErrorKind::parse, "unexpected list property on vertices");
      props.push_back(p);
    } else if (tag == "end_header") {
      break;
    }
  }

  size_t stride = 0;
  for (const Prop& p : props) stride += ply_scalar_size(p.type);

  LabeledPointCloud cloud;
  cloud.points.resize(vertex_count);
  std::vector<unsigned char> row(stride);
  for (size_t i = 0; i < vertex_count; ++i) {
    LabeledPoint& pt = cloud.points[i];
    if (binary) {
      in.read(reinterpret_cast<char*>(row.data()), std::streamsize(stride));
      if (!in) fail(ErrorKind::parse, "truncated ply: " + path);
      size_t off = 0;
      for (const Prop& p : props) {
        double v = decode_scalar(row.data() + off, p.type);
        off += ply_scalar_size(p.type);
        if (p.name == "x") pt.position.x = v;
        else if (p.name == "y") pt.position.y = v;
        else if (p.name == "z") pt.position.z = v;
        else if (p.name == "red") pt.rgb.r = uint8_t(v);
        else if (p.name == "green") pt.rgb.g = uint8_t(v);
        else if (p.name == "blue") pt.rgb.b = uint8_t(v);
        else if (p.name == "lidar_id") pt.lidar_id = uint16_t(v);
        else if (p.name == "instance_id") pt.instance_id = int32_t(v);
      }
    } else {
      if (!std::getline(in, line)) fail(ErrorKind::parse, "truncated ply: " + path);
      std::istringstream ss(line);
      for (const Prop& p : props) {
        double v;
        if (!(ss >> v)) fail(ErrorKind::parse, "short ply row: " + path);
        if (p.name == "x") pt.position.x = v;
        else if (p.name == "y") pt.position.y = v;
        else if (p.name == "z") pt.position.z = v;
        else if (p.name == "red") pt.rgb.r = uint8_t(v);
        else if (p.name == "green") pt.rgb.g = uint8_t(v);
        else if (p.name == "blue") pt.rgb.b = uint8_t(v);
        else if (p.name == "lidar_id") pt.lidar_id = uint16_t(v);
        else if (p.name == "instance_id") pt.instance_id = int32_t(v);
      }
    }
  }
  return cloud;
}

void save_cloud_csv(const LabeledPointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << "x,y,z,r,g,b,lidar_id,instance_id\n";
  char buf[256];
  for (const LabeledPoint& p : cloud.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%u,%u,%u,%u,%d\n", p.position.x,
                  p.position.y, p.position.z, p.rgb.r, p.rgb.g, p.rgb.b, p.lidar_id,
                  p.instance_id);
    out << buf;
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

LabeledPointCloud load_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  LabeledPointCloud cloud;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("x,", 0) == 0) continue;  // header
    if (line.empty()) continue;
    LabeledPoint p;
    unsigned r, g, b, lid;
    int iid;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%u,%u,%u,%u,%d", &p.position.x, &p.position.y,
                    &p.position.z, &r, &g, &b, &lid, &iid) != 8)
      fail(ErrorKind::parse, path + ":" + std::to_string(lineno) + ": bad csv row");
    p.rgb = {uint8_t(r), uint8_t(g), uint8_t(b)};
    p.lidar_id = uint16_t(lid);
    p.instance_id = iid;
    cloud.points.push_back(p);
  }
  return cloud;
}

namespace {
std::string lower_ext(const std::string& path) {
  size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}
}  // namespace

void save_cloud(const LabeledPointCloud& cloud, const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "ply") save_cloud_ply(cloud, path);
  else if (ext == "csv") save_cloud_csv(cloud, path);
  else fail(ErrorKind::invalid_argument, "unsupported cloud format: " + path);
}

LabeledPointCloud load_cloud(const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "ply") return load_cloud_ply(path);
  if (ext == "csv") return load_cloud_csv(path);
  fail(ErrorKind::invalid_argument, "unsupported cloud format: " + path);
}

}  // namespace rock
