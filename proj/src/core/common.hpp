#ifndef ROCKMORPH_COMMON_HPP
#define ROCKMORPH_COMMON_HPP

// Shared primitives: small vector/matrix types, seeded RNG streams,
// a chunked parallel-for, and the library error type.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rock {

// ---------------------------------------------------------------------------
// Errors

enum class ErrorKind {
  invalid_argument,  // caller violated a precondition
  parse,             // file could not be parsed
  io,                // filesystem failure
  domain,            // input data outside the operation's domain
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

// ---------------------------------------------------------------------------
// Geometry

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline Vec3 normalized(const Vec3& v) {
  double n = norm(v);
  if (n == 0.0) fail(ErrorKind::invalid_argument, "cannot normalize zero vector");
  return v / n;
}
inline Vec3 min3(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max3(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

struct Vec2 {
  double x = 0.0, y = 0.0;
  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

// Row-major 3x3 matrix; used for rotations and the bounding-box search.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }

  double operator()(int r, int c) const { return m[size_t(r) * 3 + size_t(c)]; }
  double& operator()(int r, int c) { return m[size_t(r) * 3 + size_t(c)]; }

  Vec3 row(int r) const { return {m[size_t(r) * 3], m[size_t(r) * 3 + 1], m[size_t(r) * 3 + 2]}; }
  Vec3 col(int c) const { return {m[size_t(c)], m[size_t(c) + 3], m[size_t(c) + 6]}; }

  Vec3 operator*(const Vec3& v) const {
    return {dot(row(0), v), dot(row(1), v), dot(row(2), v)};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }
  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }

  static Mat3 axis_angle(const Vec3& axis, double angle);
  static Mat3 euler_xyz(double ax, double ay, double az);
  // Minimal rotation taking unit vector `from` onto unit vector `to`.
  static Mat3 align(const Vec3& from, const Vec3& to);
};

// Orthonormal basis (u, v) spanning the plane with unit normal n.
// Anchors on the canonical axis least parallel to n, then Gram-Schmidt,
// so that basis(-n) = (-u, v) holds exactly.
void plane_basis(const Vec3& n, Vec3& u, Vec3& v);

constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// ---------------------------------------------------------------------------
// Seeded RNG streams
//
// All randomness flows from one 64-bit seed; independent modules draw from
// named streams so adding a consumer does not shift another module's values.

uint64_t splitmix64(uint64_t& state);

class RngStream {
public:
  RngStream(uint64_t seed, const std::string& name);
  std::mt19937_64& engine() { return engine_; }

  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive bounds
  Vec3 unit_vector();

private:
  std::mt19937_64 engine_;
};

// Deterministic rotation matrix derived from a seed (uniform over SO(3)).
Mat3 seeded_rotation(uint64_t seed, const std::string& name);

// ---------------------------------------------------------------------------
// Parallelism

// Process-wide worker cap; 0 means hardware concurrency.
void set_max_threads(int n);
int max_threads();

// Runs fn(begin, end) over [0, n) in contiguous chunks. Chunk boundaries are
// deterministic for a given n and thread cap; callers needing bit-stable
// output must make per-index work independent of chunking (all ours is).
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

}  // namespace rock

#endif
