#ifndef ROCKMORPH_POINTCLOUD_HPP
#define ROCKMORPH_POINTCLOUD_HPP

// Labeled point cloud record type shared by the generators and the metric
// suite, with PLY (binary little-endian) and CSV readers/writers.

#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"
#include "mesh.hpp"

namespace rock {

struct LabeledPoint {
  Vec3 position;
  Rgb8 rgb;
  uint16_t lidar_id = 0;
  int32_t instance_id = -1;  // -1 = unlabeled

  bool operator==(const LabeledPoint& o) const {
    return position.x == o.position.x && position.y == o.position.y &&
           position.z == o.position.z && rgb.r == o.rgb.r && rgb.g == o.rgb.g &&
           rgb.b == o.rgb.b && lidar_id == o.lidar_id && instance_id == o.instance_id;
  }
};

struct LabeledPointCloud {
  std::vector<LabeledPoint> points;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::vector<Vec3> positions() const;
  Vec3 centroid() const;
};

// PLY vertex properties: double x/y/z, uchar red/green/blue,
// ushort lidar_id, int instance_id.
void save_cloud_ply(const LabeledPointCloud& cloud, const std::string& path);
LabeledPointCloud load_cloud_ply(const std::string& path);

void save_cloud_csv(const LabeledPointCloud& cloud, const std::string& path);
LabeledPointCloud load_cloud_csv(const std::string& path);

// Dispatch on extension (.ply / .csv).
void save_cloud(const LabeledPointCloud& cloud, const std::string& path);
LabeledPointCloud load_cloud(const std::string& path);

}  // namespace rock

#endif
