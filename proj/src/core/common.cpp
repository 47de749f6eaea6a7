#include "common.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace rock {

Mat3 Mat3::axis_angle(const Vec3& axis, double angle) {
  Vec3 a = normalized(axis);
  double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Mat3 r;
  r(0, 0) = t * a.x * a.x + c;
  r(0, 1) = t * a.x * a.y - s * a.z;
  r(0, 2) = t * a.x * a.z + s * a.y;
  r(1, 0) = t * a.x * a.y + s * a.z;
  r(1, 1) = t * a.y * a.y + c;
  r(1, 2) = t * a.y * a.z - s * a.x;
  r(2, 0) = t * a.x * a.z - s * a.y;
  r(2, 1) = t * a.y * a.z + s * a.x;
  r(2, 2) = t * a.z * a.z + c;
  return r;
}

Mat3 Mat3::euler_xyz(double ax, double ay, double az) {
  return axis_angle({0, 0, 1}, az) * axis_angle({0, 1, 0}, ay) * axis_angle({1, 0, 0}, ax);
}

Mat3 Mat3::align(const Vec3& from, const Vec3& to) {
  double c = std::clamp(dot(from, to), -1.0, 1.0);
  Vec3 axis = cross(from, to);
  double s = norm(axis);
  if (s < 1e-12) {
    if (c > 0) return Mat3::identity();
    // Antipodal: rotate pi about any axis perpendicular to `from`.
    Vec3 u, v;
    plane_basis(from, u, v);
    return axis_angle(u, kPi);
  }
  return axis_angle(axis / s, std::atan2(s, c));
}

void plane_basis(const Vec3& n, Vec3& u, Vec3& v) {
  double ax = std::fabs(n.x), ay = std::fabs(n.y), az = std::fabs(n.z);
  Vec3 anchor = (ax <= ay && ax <= az) ? Vec3{1, 0, 0}
              : (ay <= az)             ? Vec3{0, 1, 0}
                                       : Vec3{0, 0, 1};
  u = normalized(cross(anchor, n));
  v = cross(n, u);  // already unit: n and u are orthonormal
}

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

uint64_t stream_key(uint64_t seed, const std::string& name) {
  // FNV-1a over the stream name, mixed with the seed through splitmix64.
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  uint64_t state = seed ^ h;
  return splitmix64(state);
}

}  // namespace

RngStream::RngStream(uint64_t seed, const std::string& name)
    : engine_(stream_key(seed, name)) {}

double RngStream::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(engine_);
}

int RngStream::uniform_int(int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(engine_);
}

Vec3 RngStream::unit_vector() {
  // Marsaglia rejection; deterministic for a given engine state.
  for (;;) {
    double a = uniform(-1.0, 1.0), b = uniform(-1.0, 1.0);
    double s = a * a + b * b;
    if (s >= 1.0 || s == 0.0) continue;
    double r = 2.0 * std::sqrt(1.0 - s);
    return {a * r, b * r, 1.0 - 2.0 * s};
  }
}

Mat3 seeded_rotation(uint64_t seed, const std::string& name) {
  RngStream rng(seed, name);
  // Uniform quaternion (Shoemake).
  double u1 = rng.uniform(0.0, 1.0), u2 = rng.uniform(0.0, 1.0), u3 = rng.uniform(0.0, 1.0);
  double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  double qx = a * std::sin(2 * kPi * u2);
  double qy = a * std::cos(2 * kPi * u2);
  double qz = b * std::sin(2 * kPi * u3);
  double qw = b * std::cos(2 * kPi * u3);
  Mat3 r;
  r(0, 0) = 1 - 2 * (qy * qy + qz * qz);
  r(0, 1) = 2 * (qx * qy - qz * qw);
  r(0, 2) = 2 * (qx * qz + qy * qw);
  r(1, 0) = 2 * (qx * qy + qz * qw);
  r(1, 1) = 1 - 2 * (qx * qx + qz * qz);
  r(1, 2) = 2 * (qy * qz - qx * qw);
  r(2, 0) = 2 * (qx * qz - qy * qw);
  r(2, 1) = 2 * (qy * qz + qx * qw);
  r(2, 2) = 1 - 2 * (qx * qx + qy * qy);
  return r;
}

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() {
  int n = g_max_threads.load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn) {
  if (n == 0) return;
  int workers = std::min<size_t>(size_t(max_threads()), n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  size_t chunk = (n + size_t(workers) - 1) / size_t(workers);
  std::vector<std::thread> threads;
  threads.reserve(size_t(workers));
  for (int w = 0; w < workers; ++w) {
    size_t begin = size_t(w) * chunk;
    size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace rock
