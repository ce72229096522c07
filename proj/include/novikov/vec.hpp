#ifndef NOVIKOV_VEC_HPP
#define NOVIKOV_VEC_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ostream>

namespace novikov {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }
inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

// Integer 3-vector; used for lattice data (windings, Miller indices, lifts).
struct IVec3 {
  std::int64_t x = 0, y = 0, z = 0;

  std::int64_t& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  std::int64_t operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  IVec3 operator+(const IVec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  IVec3 operator-(const IVec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  IVec3 operator-() const { return {-x, -y, -z}; }
  IVec3 operator*(std::int64_t s) const { return {x * s, y * s, z * s}; }
  bool operator==(const IVec3& o) const { return x == o.x && y == o.y && z == o.z; }
  bool operator!=(const IVec3& o) const { return !(*this == o); }
  bool operator<(const IVec3& o) const {
    if (x != o.x) return x < o.x;
    if (y != o.y) return y < o.y;
    return z < o.z;
  }
  bool is_zero() const { return x == 0 && y == 0 && z == 0; }
};

inline std::int64_t dot(const IVec3& a, const IVec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline IVec3 cross(const IVec3& a, const IVec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3 to_vec3(const IVec3& v) {
  return {static_cast<double>(v.x), static_cast<double>(v.y), static_cast<double>(v.z)};
}
inline double dot(const Vec3& a, const IVec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline std::ostream& operator<<(std::ostream& os, const IVec3& v) {
  return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

// Symmetric storage is not enforced; constructors below fill full 3x3.
struct Mat3 {
  // Row-major.
  std::array<double, 9> m{};

  double& operator()(int r, int c) { return m[r * 3 + c]; }
  double operator()(int r, int c) const { return m[r * 3 + c]; }

  static Mat3 zero() { return {}; }
  static Mat3 diag(double a, double b, double c) {
    Mat3 r;
    r(0, 0) = a; r(1, 1) = b; r(2, 2) = c;
    return r;
  }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
    return r;
  }
  Mat3& operator+=(const Mat3& o) {
    for (int i = 0; i < 9; ++i) m[i] += o.m[i];
    return *this;
  }
  Mat3 operator*(double s) const {
    Mat3 r;
    for (int i = 0; i < 9; ++i) r.m[i] = m[i] * s;
    return r;
  }
};

inline Vec3 mul(const Mat3& a, const Vec3& v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

// Solves a 3x3 linear system by Gaussian elimination with partial pivoting.
// Returns false when the pivot falls below `min_pivot`.
bool solve3(const Mat3& a, const Vec3& b, Vec3& out, double min_pivot = 1e-14);

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  a = std::llabs(a);
  b = std::llabs(b);
  while (b != 0) {
    std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline std::int64_t content(const IVec3& v) { return gcd64(gcd64(v.x, v.y), v.z); }

}  // namespace novikov

#endif
