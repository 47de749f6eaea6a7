#include "morph3d.hpp"

#include <algorithm>
#include <cmath>

#include "morph2d.hpp"
#include "raycast.hpp"

namespace rock {

namespace {

struct Extents {
  double ex, ey, ez;
  double volume() const { return ex * ey * ez; }
};

Extents extents_under_rotation(const std::vector<Vec3>& pts, const Mat3& rot) {
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  Vec3 r0 = rot.row(0), r1 = rot.row(1), r2 = rot.row(2);
  for (const Vec3& p : pts) {
    Vec3 q{dot(r0, p), dot(r1, p), dot(r2, p)};
    lo = min3(lo, q);
    hi = max3(hi, q);
  }
  return {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
}

// Nelder-Mead on the three Euler angles.
Mat3 refine_rotation(const std::vector<Vec3>& pts, const Vec3& start, double step) {
  auto cost = [&](const Vec3& e) {
    return extents_under_rotation(pts, Mat3::euler_xyz(e.x, e.y, e.z)).volume();
  };
  std::vector<std::pair<double, Vec3>> simplex;
  simplex.push_back({cost(start), start});
  for (int i = 0; i < 3; ++i) {
    Vec3 p = start;
    p[i] += step;
    simplex.push_back({cost(p), p});
  }
  for (int it = 0; it < 120; ++it) {
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (simplex.back().first - simplex.front().first < 1e-12) break;
    Vec3 centroid{0, 0, 0};
    for (int i = 0; i < 3; ++i) centroid += simplex[size_t(i)].second;
    centroid = centroid / 3.0;
    Vec3 worst = simplex[3].second;
    Vec3 reflect = centroid + (centroid - worst);
    double fr = cost(reflect);
    if (fr < simplex[0].first) {
      Vec3 expand = centroid + (centroid - worst) * 2.0;
      double fe = cost(expand);
      simplex[3] = fe < fr ? std::make_pair(fe, expand) : std::make_pair(fr, reflect);
    } else if (fr < simplex[2].first) {
      simplex[3] = {fr, reflect};
    } else {
      Vec3 contract = centroid + (worst - centroid) * 0.5;
      double fc = cost(contract);
      if (fc < simplex[3].first) {
        simplex[3] = {fc, contract};
      } else {
        for (int i = 1; i < 4; ++i) {
          simplex[size_t(i)].second =
              simplex[0].second + (simplex[size_t(i)].second - simplex[0].second) * 0.5;
          simplex[size_t(i)].first = cost(simplex[size_t(i)].second);
        }
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const Vec3& e = simplex[0].second;
  return Mat3::euler_xyz(e.x, e.y, e.z);
}

}  // namespace

BoundingBox3D min_bounding_box(const std::vector<Vec3>& points) {
  if (points.size() < 2) fail(ErrorKind::domain, "bounding box needs at least two points");

  // Euler grid over [0, pi)^3 at 6-degree steps (box symmetry quotients the
  // rest of SO(3) away), then Nelder-Mead from the best few cells.
  const double step = deg2rad(6.0);
  struct Candidate {
    double vol;
    Vec3 euler;
  };
  std::vector<Candidate> best(3, {1e300, {0, 0, 0}});
  for (double ax = 0.0; ax < kPi; ax += step)
    for (double ay = 0.0; ay < kPi; ay += step)
      for (double az = 0.0; az < kPi; az += step) {
        double vol = extents_under_rotation(points, Mat3::euler_xyz(ax, ay, az)).volume();
        if (vol < best.back().vol) {
          best.back() = {vol, {ax, ay, az}};
          std::sort(best.begin(), best.end(),
                    [](const Candidate& a, const Candidate& b) { return a.vol < b.vol; });
        }
      }

  Mat3 rot = Mat3::identity();
  double rot_vol = 1e300;
  for (const Candidate& c : best) {
    if (c.vol >= 1e300) continue;
    Mat3 candidate = refine_rotation(points, c.euler, step / 2.0);
    double vol = extents_under_rotation(points, candidate).volume();
    if (vol < rot_vol) {
      rot_vol = vol;
      rot = candidate;
    }
  }
  Extents e = extents_under_rotation(points, rot);
  // Order the box axes so extents come out ascending.
  struct AxisExtent {
    double extent;
    int axis;
  };
  AxisExtent ax[3] = {{e.ex, 0}, {e.ey, 1}, {e.ez, 2}};
  std::sort(ax, ax + 3, [](const AxisExtent& a, const AxisExtent& b) { return a.extent < b.extent; });

  BoundingBox3D box;
  box.a = ax[0].extent;
  box.b = ax[1].extent;
  box.c = ax[2].extent;
  for (int i = 0; i < 3; ++i) {
    Vec3 row = rot.row(ax[i].axis);
    box.rotation(i, 0) = row.x;
    box.rotation(i, 1) = row.y;
    box.rotation(i, 2) = row.z;
  }
  box.volume = e.volume();
  double span = std::max({box.a, box.b, box.c, 1e-30});
  box.degenerate = box.a < 1e-9 * span || points.size() < 4;
  return box;
}

BoundingBox3D min_bounding_box(const TriMesh& mesh) { return min_bounding_box(mesh.vertices); }

double sphericity(const TriMesh& mesh) {
  MeshMeasures mm = mesh_measures(mesh);
  if (!mm.volume) fail(ErrorKind::domain, "sphericity requires a watertight mesh");
  if (mm.surface_area <= 0.0) fail(ErrorKind::domain, "zero surface area");
  return std::cbrt(36.0 * kPi * (*mm.volume) * (*mm.volume)) / mm.surface_area;
}

BinaryMask project_silhouette(const TriMesh& mesh, const Vec3& direction, double px_per_unit) {
  if (norm(direction) < 1e-12) fail(ErrorKind::invalid_argument, "zero projection direction");
  if (px_per_unit <= 0.0) fail(ErrorKind::invalid_argument, "px_per_unit must be positive");
  if (mesh.faces.empty()) fail(ErrorKind::domain, "cannot project an empty mesh");
  Vec3 w = normalized(direction);
  Vec3 u, v;
  plane_basis(w, u, v);

  // Project vertices onto (u, v).
  std::vector<Vec2> proj(mesh.vertices.size());
  double ulo = 1e300, uhi = -1e300, vlo = 1e300, vhi = -1e300;
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    proj[i] = {dot(mesh.vertices[i], u), dot(mesh.vertices[i], v)};
    ulo = std::min(ulo, proj[i].x);
    uhi = std::max(uhi, proj[i].x);
    vlo = std::min(vlo, proj[i].y);
    vhi = std::max(vhi, proj[i].y);
  }
  // Raster grid centered on the projected bounding box; the symmetric
  // centering makes opposite-direction projections exact mirrors.
  double cu = (ulo + uhi) / 2.0, cv = (vlo + vhi) / 2.0;
  int w_px = std::max(1, int(std::ceil((uhi - ulo) * px_per_unit)) + 2);
  int h_px = std::max(1, int(std::ceil((vhi - vlo) * px_per_unit)) + 2);

  BinaryMask mask(w_px, h_px);
  double inv = 1.0 / px_per_unit;
  for (const auto& f : mesh.faces) {
    Vec2 a = proj[f[0]], b = proj[f[1]], c = proj[f[2]];
    double xlo = std::min({a.x, b.x, c.x}), xhi = std::max({a.x, b.x, c.x});
    double ylo = std::min({a.y, b.y, c.y}), yhi = std::max({a.y, b.y, c.y});
    auto to_px = [&](double coord, double center, int size) {
      return (coord - center) * px_per_unit + size / 2.0 - 0.5;
    };
    int px0 = std::max(0, int(std::floor(to_px(xlo, cu, w_px))));
    int px1 = std::min(w_px - 1, int(std::ceil(to_px(xhi, cu, w_px))));
    int py0 = std::max(0, int(std::floor(to_px(ylo, cv, h_px))));
    int py1 = std::min(h_px - 1, int(std::ceil(to_px(yhi, cv, h_px))));
    for (int py = py0; py <= py1; ++py) {
      double sy = cv + (py + 0.5 - h_px / 2.0) * inv;
      for (int px = px0; px <= px1; ++px) {
        if (mask.at(px, py)) continue;
        double sx = cu + (px + 0.5 - w_px / 2.0) * inv;
        Vec2 p{sx, sy};
        double d1 = cross(b - a, p - a);
        double d2 = cross(c - b, p - b);
        double d3 = cross(a - c, p - c);
        bool neg = d1 < 0 || d2 < 0 || d3 < 0;
        bool pos = d1 > 0 || d2 > 0 || d3 > 0;
        if (!(neg && pos)) mask.set(px, py, true);  // boundary-inclusive
      }
    }
  }
  return mask;
}

MultiViewStats multiview_2d_stats(const TriMesh& mesh, int n_views, uint64_t seed,
                                  double px_per_unit) {
  if (n_views < 2) fail(ErrorKind::invalid_argument, "need at least two views");
  if (px_per_unit <= 0.0) {
    Vec3 extent = mesh.bbox_max() - mesh.bbox_min();
    double span = std::max({extent.x, extent.y, extent.z, 1e-12});
    px_per_unit = 256.0 / span;
  }
  std::vector<Vec3> dirs = sphere_directions(n_views, seed);
  MultiViewStats stats;
  stats.fer2d.resize(size_t(n_views));
  stats.circularity.resize(size_t(n_views));
  double ppu = px_per_unit;
  parallel_for(size_t(n_views), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      BinaryMask mask = project_silhouette(mesh, dirs[i], ppu);
      stats.fer2d[i] = feret(mask).fer2d;
      stats.circularity[i] = circularity(largest_component(mask));
    }
  });

  auto aggregate = [](const std::vector<double>& xs, double& mean, double& mn, double& mx,
                      double& sd, double& cov) {
    mean = 0;
    mn = xs[0];
    mx = xs[0];
    for (double x : xs) {
      mean += x;
      mn = std::min(mn, x);
      mx = std::max(mx, x);
    }
    mean /= double(xs.size());
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    sd = std::sqrt(var / double(xs.size()));
    cov = mean != 0.0 ? sd / mean : 0.0;
  };
  aggregate(stats.fer2d, stats.fer_mean, stats.fer_min, stats.fer_max, stats.fer_std,
            stats.fer_cov);
  aggregate(stats.circularity, stats.circ_mean, stats.circ_min, stats.circ_max, stats.circ_std,
            stats.circ_cov);
  return stats;
}

MorphReport3D morph_report_3d(const TriMesh& mesh) {
  MorphReport3D rep;
  BoundingBox3D box = min_bounding_box(mesh);
  rep.a = box.a;
  rep.b = box.b;
  rep.c = box.c;
  rep.fer3d = box.a > 0 ? box.c / box.a : 1.0;
  rep.box_rotation = box.rotation;
  MeshMeasures mm = mesh_measures(mesh);
  rep.surface_area = mm.surface_area;
  if (mm.volume) {
    rep.volume = *mm.volume;
    rep.sphericity = sphericity(mesh);
  }
  return rep;
}

}  // namespace rock
