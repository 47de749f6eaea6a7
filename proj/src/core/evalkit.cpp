#include "evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "raycast.hpp"

namespace rock {

double error_stats(const std::vector<double>& estimates, const std::vector<double>& truths,
                   ErrorStatKind kind) {
  if (estimates.size() != truths.size() || estimates.empty())
    fail(ErrorKind::invalid_argument, "estimate/truth lists must be equal-length and non-empty");
  double acc = 0.0;
  for (size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] == 0.0) fail(ErrorKind::domain, "zero ground-truth value");
    double rel = (estimates[i] - truths[i]) / truths[i];
    acc += kind == ErrorStatKind::mape ? std::fabs(rel) : rel;
  }
  return acc / double(truths.size()) * 100.0;
}

Aabb Aabb::of_points(const std::vector<Vec3>& pts) {
  if (pts.empty()) fail(ErrorKind::domain, "bounding box of no points");
  Aabb box{pts[0], pts[0]};
  for (const Vec3& p : pts) {
    box.lo = min3(box.lo, p);
    box.hi = max3(box.hi, p);
  }
  return box;
}

double iou3d_aabb(const Aabb& a, const Aabb& b) {
  Vec3 lo = max3(a.lo, b.lo);
  Vec3 hi = min3(a.hi, b.hi);
  double inter = std::max(0.0, hi.x - lo.x) * std::max(0.0, hi.y - lo.y) *
                 std::max(0.0, hi.z - lo.z);
  double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) {
    // Both boxes degenerate; call them equal only when truly identical.
    bool same = a.lo.x == b.lo.x && a.lo.y == b.lo.y && a.lo.z == b.lo.z && a.hi.x == b.hi.x &&
                a.hi.y == b.hi.y && a.hi.z == b.hi.z;
    return same ? 1.0 : 0.0;
  }
  return inter / uni;
}

InstanceSet InstanceSet::from_labels(const LabeledPointCloud& cloud) {
  std::map<int32_t, std::vector<size_t>> by_id;
  for (size_t i = 0; i < cloud.points.size(); ++i)
    if (cloud.points[i].instance_id >= 0) by_id[cloud.points[i].instance_id].push_back(i);
  InstanceSet out;
  for (auto& [id, idx] : by_id) out.groups.push_back(std::move(idx));
  return out;
}

std::vector<Aabb> InstanceSet::boxes(const LabeledPointCloud& cloud) const {
  std::vector<Aabb> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    if (g.empty()) fail(ErrorKind::invalid_argument, "empty instance group");
    Aabb box{cloud.points[g[0]].position, cloud.points[g[0]].position};
    for (size_t i : g) {
      box.lo = min3(box.lo, cloud.points[i].position);
      box.hi = max3(box.hi, cloud.points[i].position);
    }
    out.push_back(box);
  }
  return out;
}

MatchScores match_and_score_boxes(const std::vector<Aabb>& predicted,
                                  const std::vector<Aabb>& truth, double iou_threshold) {
  if (truth.empty()) fail(ErrorKind::invalid_argument, "empty ground-truth set");
  struct Cand {
    double iou;
    size_t pred, truth;
  };
  std::vector<Cand> cands;
  for (size_t p = 0; p < predicted.size(); ++p)
    for (size_t t = 0; t < truth.size(); ++t) {
      double iou = iou3d_aabb(predicted[p], truth[t]);
      if (iou > 0.0) cands.push_back({iou, p, t});
    }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.truth < b.truth;
  });
  std::vector<bool> pred_used(predicted.size(), false), truth_used(truth.size(), false);
  MatchScores out;
  double iou_sum = 0.0;
  for (const Cand& c : cands) {
    if (pred_used[c.pred] || truth_used[c.truth]) continue;
    if (c.iou <= iou_threshold) break;  // sorted, nothing better follows
    pred_used[c.pred] = true;
    truth_used[c.truth] = true;
    out.matches.push_back({c.pred, c.truth});
    out.match_ious.push_back(c.iou);
    iou_sum += c.iou;
  }
  out.completeness = 100.0 * double(out.matches.size()) / double(truth.size());
  out.iou_ap = out.matches.empty() ? 0.0 : 100.0 * iou_sum / double(out.matches.size());
  return out;
}

std::string MatchScores::csv() const {
  std::ostringstream out;
  out << "predicted,truth,iou\n";
  char buf[96];
  for (size_t i = 0; i < matches.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.6f\n", matches[i].first, matches[i].second,
                  match_ious[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "summary,completeness=%.4f,iou_ap=%.4f\n", completeness,
                iou_ap);
  out << buf;
  return out.str();
}

MatchScores match_and_score(const InstanceSet& predicted, const InstanceSet& truth,
                            const LabeledPointCloud& cloud, double iou_threshold) {
  return match_and_score_boxes(predicted.boxes(cloud), truth.boxes(cloud), iou_threshold);
}

// ---------------------------------------------------------------------------
// Chamfer distance via a uniform grid hash; exact nearest neighbors.

namespace {

struct GridHash {
  double cell;
  Vec3 origin;
  std::unordered_map<uint64_t, std::vector<uint32_t>> cells;
  const std::vector<Vec3>* pts;

  static uint64_t key(int x, int y, int z) {
    return (uint64_t(uint32_t(x)) << 42) ^ (uint64_t(uint32_t(y)) << 21) ^ uint64_t(uint32_t(z));
  }

  GridHash(const std::vector<Vec3>& points, double cell_size) : cell(cell_size), pts(&points) {
    origin = points[0];
    for (const Vec3& p : points) origin = min3(origin, p);
    cells.reserve(points.size());
    for (uint32_t i = 0; i < points.size(); ++i) {
      const Vec3& p = points[i];
      cells[key(int((p.x - origin.x) / cell), int((p.y - origin.y) / cell),
                int((p.z - origin.z) / cell))]
          .push_back(i);
    }
  }

  double nearest_distance(const Vec3& q) const {
    int qx = int(std::floor((q.x - origin.x) / cell));
    int qy = int(std::floor((q.y - origin.y) / cell));
    int qz = int(std::floor((q.z - origin.z) / cell));
    double best2 = 1e300;
    // Expand shells until the found distance is provably closer than any
    // unvisited cell could hold.
    for (int ring = 0;; ++ring) {
      double nearest_possible = ring == 0 ? 0.0 : (ring - 1) * cell;
      if (best2 < nearest_possible * nearest_possible) break;
      bool any_cell = false;
      for (int dz = -ring; dz <= ring; ++dz)
        for (int dy = -ring; dy <= ring; ++dy)
          for (int dx = -ring; dx <= ring; ++dx) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
            auto it = cells.find(key(qx + dx, qy + dy, qz + dz));
            if (it == cells.end()) continue;
            any_cell = true;
            for (uint32_t i : it->second) {
              double d2 = norm2((*pts)[i] - q);
              best2 = std::min(best2, d2);
            }
          }
      if (ring > 2 && !any_cell && best2 < 1e300) {
        // Past the found neighbor and the shell was empty; the bound above
        // will terminate within one more ring.
      }
      if (ring * cell > 1e6 * cell && best2 == 1e300) break;  // scattered degenerate input
    }
    return std::sqrt(best2);
  }
};

double directed_mean_nn(const std::vector<Vec3>& from, const GridHash& to_hash) {
  std::vector<double> partial(from.size());
  parallel_for(from.size(), [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) partial[i] = to_hash.nearest_distance(from[i]);
  });
  double acc = 0.0;
  for (double d : partial) acc += d;
  return acc / double(from.size());
}

}  // namespace

double chamfer_l1(const std::vector<Vec3>& s1, const std::vector<Vec3>& s2) {
  if (s1.empty() || s2.empty()) fail(ErrorKind::invalid_argument, "chamfer on an empty set");
  // Cell size from the bounding box of both sets; aims at O(1) points/cell.
  Vec3 lo = s1[0], hi = s1[0];
  for (const Vec3& p : s1) {
    lo = min3(lo, p);
    hi = max3(hi, p);
  }
  for (const Vec3& p : s2) {
    lo = min3(lo, p);
    hi = max3(hi, p);
  }
  double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  double denom = std::cbrt(double(s1.size() + s2.size()));
  double cell = extent > 0 ? std::max(1e-12, extent / std::max(1.0, denom)) : 1.0;
  GridHash h1(s1, cell), h2(s2, cell);
  return directed_mean_nn(s1, h2) + directed_mean_nn(s2, h1);
}

double shape_percentage(const std::vector<Vec3>& cloud, int n_rays, double angular_tol_deg) {
  if (cloud.empty()) fail(ErrorKind::invalid_argument, "shape percentage of an empty cloud");
  Vec3 centroid{0, 0, 0};
  for (const Vec3& p : cloud) centroid += p;
  centroid = centroid / double(cloud.size());
  return shape_percentage_at(cloud, centroid, n_rays, angular_tol_deg);
}

double shape_percentage_at(const std::vector<Vec3>& cloud, const Vec3& centroid, int n_rays,
                           double angular_tol_deg) {
  if (cloud.size() < 10) fail(ErrorKind::invalid_argument, "shape percentage needs >= 10 points");
  if (n_rays < 1) fail(ErrorKind::invalid_argument, "need at least one ray");

  std::vector<Vec3> unit;
  unit.reserve(cloud.size());
  for (const Vec3& p : cloud) {
    Vec3 d = p - centroid;
    double n = norm(d);
    if (n > 1e-12) unit.push_back(d / n);
  }
  if (unit.empty()) fail(ErrorKind::domain, "all points coincide with the centroid");

  std::vector<Vec3> dirs = sphere_directions(n_rays, 0);
  double cos_tol = std::cos(deg2rad(angular_tol_deg));
  std::vector<uint8_t> hit(size_t(n_rays), 0);
  parallel_for(size_t(n_rays), [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) {
      const Vec3& d = dirs[i];
      for (const Vec3& u : unit)
        if (dot(d, u) >= cos_tol) {
          hit[i] = 1;
          break;
        }
    }
  });
  size_t hits = 0;
  for (uint8_t h : hit) hits += h;
  return 100.0 * double(hits) / double(n_rays);
}

std::vector<SPRecord> sp_filter(const LabeledPointCloud& cloud, double threshold, int n_rays,
                                double angular_tol_deg) {
  InstanceSet inst = InstanceSet::from_labels(cloud);
  std::vector<SPRecord> out;
  for (const auto& g : inst.groups) {
    SPRecord rec;
    rec.instance_id = cloud.points[g[0]].instance_id;
    std::vector<Vec3> pts;
    pts.reserve(g.size());
    for (size_t i : g) pts.push_back(cloud.points[i].position);
    rec.sp = pts.size() >= 10 ? shape_percentage(pts, n_rays, angular_tol_deg) : 0.0;
    rec.pass = rec.sp >= threshold;
    out.push_back(rec);
  }
  return out;
}

InstanceSet cluster_baseline(const LabeledPointCloud& cloud, double radius, size_t min_size) {
  if (radius <= 0.0) fail(ErrorKind::invalid_argument, "cluster radius must be positive");
  InstanceSet out;
  if (cloud.empty()) return out;

  std::vector<Vec3> pts = cloud.positions();
  Vec3 origin = pts[0];
  for (const Vec3& p : pts) origin = min3(origin, p);
  double cell = radius;
  std::unordered_map<uint64_t, std::vector<uint32_t>> grid;
  auto key = [&](const Vec3& p) {
    int x = int((p.x - origin.x) / cell);
    int y = int((p.y - origin.y) / cell);
    int z = int((p.z - origin.z) / cell);
    return GridHash::key(x, y, z);
  };
  for (uint32_t i = 0; i < pts.size(); ++i) grid[key(pts[i])].push_back(i);

  std::vector<int> label(pts.size(), -1);
  int next_label = 0;
  std::vector<uint32_t> stack;
  double r2 = radius * radius;
  for (uint32_t s = 0; s < pts.size(); ++s) {
    if (label[s] != -1) continue;
    int lab = next_label++;
    label[s] = lab;
    stack.push_back(s);
    while (!stack.empty()) {
      uint32_t i = stack.back();
      stack.pop_back();
      const Vec3& p = pts[i];
      int cx = int((p.x - origin.x) / cell);
      int cy = int((p.y - origin.y) / cell);
      int cz = int((p.z - origin.z) / cell);
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            auto it = grid.find(GridHash::key(cx + dx, cy + dy, cz + dz));
            if (it == grid.end()) continue;
            for (uint32_t j : it->second) {
              if (label[j] != -1) continue;
              if (norm2(pts[j] - p) <= r2) {
                label[j] = lab;
                stack.push_back(j);
              }
            }
          }
    }
  }
  std::vector<std::vector<size_t>> groups;
  groups.resize(size_t(next_label));
  for (size_t i = 0; i < pts.size(); ++i) groups[size_t(label[i])].push_back(i);
  for (auto& g : groups)
    if (g.size() >= min_size) out.groups.push_back(std::move(g));
  return out;
}

double weight_from_volume(double volume, double specific_gravity, double water_density) {
  if (volume < 0.0 || specific_gravity <= 0.0 || water_density <= 0.0)
    fail(ErrorKind::invalid_argument, "volume must be >= 0 and densities positive");
  return volume * specific_gravity * water_density;
}

}  // namespace rock
