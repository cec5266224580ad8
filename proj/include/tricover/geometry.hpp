#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace tricover {

/// Tolerance for on-edge decisions, metres.
inline constexpr double kGeomEps = 1e-9;

inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }
inline double angle_of(Vec2 a) { return std::atan2(a.y, a.x); }

/// Rotates `p` by `a` radians counter-clockwise about the origin.
inline Vec2 rotate(Vec2 p, double a) {
  const double c = std::cos(a), s = std::sin(a);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

/// Wraps an angle into [0, pi), the range of lattice and consensus headings.
inline double wrap_half_turn(double a) {
  a = std::fmod(a, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

using Polygon = std::vector<Vec2>;

/// Twice the signed area; positive for counter-clockwise vertex order.
inline double signed_area2(std::span<const Vec2> poly) {
  double s = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    s += cross(poly[i], poly[(i + 1) % n]);
  }
  return s;
}

inline double area(std::span<const Vec2> poly) { return 0.5 * std::abs(signed_area2(poly)); }

/// Returns `poly` in counter-clockwise order.
inline Polygon normalized_ccw(Polygon poly) {
  if (signed_area2(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

/// Winding number of `poly` around `p`; non-zero means inside. Points on an
/// edge count as inside.
inline int winding_number(std::span<const Vec2> poly, Vec2 p) {
  int wn = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const double side = cross(b - a, p - a);
    if (std::abs(side) <= kGeomEps * std::max(1.0, norm(b - a)) &&
        dot(p - a, p - b) <= kGeomEps) {
      return 1;  // on the edge
    }
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0.0) ++wn;
    } else {
      if (b.y <= p.y && side < 0.0) --wn;
    }
  }
  return wn;
}

inline bool point_in_polygon(std::span<const Vec2> poly, Vec2 p) {
  return winding_number(poly, p) != 0;
}

/// Closest point to `p` on segment [a, b].
inline Vec2 closest_on_segment(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

inline double segment_distance(Vec2 a, Vec2 b, Vec2 p) {
  return distance(p, closest_on_segment(a, b, p));
}

/// Parameter `t >= 0` at which the ray `origin + t*dir` (unit `dir`) meets
/// segment [a, b], if it does.
inline std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double denom = cross(dir, e);
  const Vec2 ao = a - origin;
  if (std::abs(denom) < 1e-15) return std::nullopt;  // parallel; grazing hits ignored
  const double t = cross(ao, e) / denom;
  const double u = cross(ao, dir) / denom;
  if (t < 0.0 || u < -kGeomEps || u > 1.0 + kGeomEps) return std::nullopt;
  return t;
}

/// Intersection parameters of segment [a, b] with the circle |x - c| = r,
/// restricted to [0, 1].
inline std::vector<double> segment_circle_params(Vec2 a, Vec2 b, Vec2 c, double r) {
  const Vec2 d = b - a;
  const Vec2 f = a - c;
  const double qa = dot(d, d);
  const double qb = 2.0 * dot(f, d);
  const double qc = dot(f, f) - r * r;
  std::vector<double> out;
  if (qa <= 0.0) return out;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return out;
  const double sq = std::sqrt(disc);
  for (double t : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
    if (t >= 0.0 && t <= 1.0) out.push_back(t);
  }
  return out;
}

}  // namespace tricover
