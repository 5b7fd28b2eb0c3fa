#pragma once

#include <array>
#include <cmath>

namespace cantorsurf {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr Vec3 &operator+=(const Vec3 &o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3 &operator-=(const Vec3 &o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3 &operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3 &b) { return a -= b; }
constexpr Vec3 operator-(const Vec3 &a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3 &a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3 &a) { return std::sqrt(dot(a, a)); }
constexpr double norm2(const Vec3 &a) { return dot(a, a); }
inline Vec3 normalized(const Vec3 &a) { return a / norm(a); }
inline double dist(const Vec3 &a, const Vec3 &b) { return norm(a - b); }

// any unit vector orthogonal to n (n unit)
inline Vec3 any_orthogonal(const Vec3 &n) {
  Vec3 t = std::fabs(n.x) < 0.6 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  return normalized(t - dot(t, n) * n);
}

struct Vec2 {
  double x = 0, y = 0;
  friend constexpr bool operator==(const Vec2 &, const Vec2 &) = default;
};
constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

// distance from p to segment [a,b]
inline double point_segment_dist(const Vec3 &p, const Vec3 &a, const Vec3 &b) {
  Vec3 ab = b - a;
  double l2 = norm2(ab);
  double t = l2 > 0 ? dot(p - a, ab) / l2 : 0.0;
  t = t < 0 ? 0 : (t > 1 ? 1 : t);
  return norm(p - (a + t * ab));
}

double segment_segment_dist(const Vec3 &p0, const Vec3 &p1, const Vec3 &q0, const Vec3 &q1);

} // namespace cantorsurf
