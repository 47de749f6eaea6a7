#ifndef ROCKMORPH_EVALKIT_HPP
#define ROCKMORPH_EVALKIT_HPP

// Metrics and post-analysis: percentage-error statistics, 3D box IoU,
// instance matching scores, L1 Chamfer distance, shape-percentage
// visibility, weight conversion, and a clustering baseline segmenter.

#include <string>
#include <vector>

#include "common.hpp"
#include "pointcloud.hpp"

namespace rock {

enum class ErrorStatKind { mape, mpe };

// MAPE = mean |E - M| / M * 100; MPE = mean (E - M) / M * 100 (signed).
double error_stats(const std::vector<double>& estimates, const std::vector<double>& truths,
                   ErrorStatKind kind);

struct Aabb {
  Vec3 lo, hi;
  double volume() const {
    Vec3 e = hi - lo;
    return std::max(0.0, e.x) * std::max(0.0, e.y) * std::max(0.0, e.z);
  }
  static Aabb of_points(const std::vector<Vec3>& pts);
};

// Intersection-over-union of two axis-aligned boxes; identical degenerate
// boxes score 1.
double iou3d_aabb(const Aabb& a, const Aabb& b);

// Point-index groups over one cloud.
struct InstanceSet {
  std::vector<std::vector<size_t>> groups;

  static InstanceSet from_labels(const LabeledPointCloud& cloud);  // instance_id >= 0
  std::vector<Aabb> boxes(const LabeledPointCloud& cloud) const;
};

struct MatchScores {
  double completeness = 0.0;  // percent of truth instances matched above threshold
  double iou_ap = 0.0;        // mean IoU over matched pairs, percent
  std::vector<std::pair<size_t, size_t>> matches;  // (predicted, truth), IoU > threshold
  std::vector<double> match_ious;                  // parallel to matches

  std::string csv() const;  // pred,truth,iou table plus a summary row
};

// Greedy matching in descending box IoU; each side matched at most once.
MatchScores match_and_score(const InstanceSet& predicted, const InstanceSet& truth,
                            const LabeledPointCloud& cloud, double iou_threshold = 0.5);
MatchScores match_and_score_boxes(const std::vector<Aabb>& predicted,
                                  const std::vector<Aabb>& truth, double iou_threshold = 0.5);

// Symmetric L1 Chamfer distance; grid-hash accelerated, exact.
double chamfer_l1(const std::vector<Vec3>& s1, const std::vector<Vec3>& s2);

// Fraction (percent) of uniformly distributed directions from the cloud
// centroid that pass within angular_tol_deg of some point.
double shape_percentage(const std::vector<Vec3>& cloud, int n_rays = 1000,
                        double angular_tol_deg = 3.0);

// Same score from a caller-supplied center. SP is monotone under cloud
// growth only when the center is held fixed; the recomputed-centroid form
// above is what the reporting pipeline uses.
double shape_percentage_at(const std::vector<Vec3>& cloud, const Vec3& center, int n_rays = 1000,
                           double angular_tol_deg = 3.0);

struct SPRecord {
  int32_t instance_id = -1;
  double sp = 0.0;  // percent
  bool pass = false;
};

// Per-instance shape percentage with a pass flag at the threshold.
std::vector<SPRecord> sp_filter(const LabeledPointCloud& cloud, double threshold = 75.0,
                                int n_rays = 1000, double angular_tol_deg = 3.0);

// Connected components of the radius-neighborhood graph; components smaller
// than min_size are dropped. The non-neural stand-in segmenter.
InstanceSet cluster_baseline(const LabeledPointCloud& cloud, double radius, size_t min_size = 1);

// mass = volume * specific_gravity * water_density (SI: m^3 -> kg).
double weight_from_volume(double volume, double specific_gravity, double water_density = 1000.0);

}  // namespace rock

#endif
