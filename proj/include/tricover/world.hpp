#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tricover/geometry.hpp"

namespace tricover {

struct Segment {
  Vec2 a;
  Vec2 b;
};

/// Sensing ray: origin, heading angle and maximum range.
struct Ray {
  Vec2 origin;
  double direction{0.0};
  double max_range{1.0};
};

/// Polygonal region with static polygonal obstacles. Immutable once built.
///
/// Polygons are stored counter-clockwise regardless of input orientation.
/// The keep-out `margin` is not applied here; the map layer rejects lattice
/// vertices whose clearance falls below it.
class Workspace {
 public:
  Workspace() = default;

  Workspace(Polygon boundary, std::vector<Polygon> obstacles, double margin)
      : boundary_(normalized_ccw(std::move(boundary))), margin_(margin) {
    obstacles_.reserve(obstacles.size());
    for (auto& o : obstacles) obstacles_.push_back(normalized_ccw(std::move(o)));
    validate();
    build_edges();
  }

  const Polygon& boundary() const { return boundary_; }
  const std::vector<Polygon>& obstacles() const { return obstacles_; }
  double margin() const { return margin_; }

  /// Every boundary and obstacle edge.
  const std::vector<Segment>& edges() const { return edges_; }
  /// Obstacle edges only (excludes the outer boundary).
  const std::vector<Segment>& obstacle_edges() const { return obstacle_edges_; }

  /// Axis-aligned bounds of the boundary polygon: {min, max}.
  std::pair<Vec2, Vec2> bounds() const {
    Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Vec2 hi{-lo.x, -lo.y};
    for (auto p : boundary_) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    return {lo, hi};
  }

  /// Free area: boundary area minus obstacle areas.
  double free_area() const {
    double a = area(boundary_);
    for (const auto& o : obstacles_) a -= area(o);
    return a;
  }

 private:
  static bool segments_cross(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const double d1 = cross(p2 - p1, q1 - p1);
    const double d2 = cross(p2 - p1, q2 - p1);
    const double d3 = cross(q2 - q1, p1 - q1);
    const double d4 = cross(q2 - q1, p2 - q1);
    return ((d1 > kGeomEps && d2 < -kGeomEps) || (d1 < -kGeomEps && d2 > kGeomEps)) &&
           ((d3 > kGeomEps && d4 < -kGeomEps) || (d3 < -kGeomEps && d4 > kGeomEps));
  }

  static bool self_intersecting(const Polygon& poly) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // adjacent edges
        if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return true;
      }
    }
    return false;
  }

  static bool polygons_cross(const Polygon& a, const Polygon& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (segments_cross(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) return true;
      }
    }
    return false;
  }

  void validate() const {
    if (boundary_.size() < 3) throw std::invalid_argument("workspace boundary needs at least 3 vertices");
    if (margin_ < 0.0) throw std::invalid_argument("workspace margin must be >= 0");
    if (self_intersecting(boundary_)) throw std::invalid_argument("workspace boundary is self-intersecting");
    for (std::size_t k = 0; k < obstacles_.size(); ++k) {
      const auto& o = obstacles_[k];
      const std::string tag = "obstacle " + std::to_string(k);
      if (o.size() < 3) throw std::invalid_argument(tag + " needs at least 3 vertices");
      if (self_intersecting(o)) throw std::invalid_argument(tag + " is self-intersecting");
      for (auto p : o) {
        if (!point_in_polygon(boundary_, p)) throw std::invalid_argument(tag + " is not inside the boundary");
      }
      if (polygons_cross(o, boundary_)) throw std::invalid_argument(tag + " crosses the boundary");
      for (std::size_t m = 0; m < k; ++m) {
        const auto& other = obstacles_[m];
        if (polygons_cross(o, other) || point_in_polygon(other, o[0]) || point_in_polygon(o, other[0])) {
          throw std::invalid_argument(tag + " overlaps obstacle " + std::to_string(m));
        }
      }
    }
  }

  void build_edges() {
    auto add = [](std::vector<Segment>& out, const Polygon& p) {
      for (std::size_t i = 0; i < p.size(); ++i) out.push_back({p[i], p[(i + 1) % p.size()]});
    };
    add(edges_, boundary_);
    for (const auto& o : obstacles_) {
      add(edges_, o);
      add(obstacle_edges_, o);
    }
  }

  Polygon boundary_;
  std::vector<Polygon> obstacles_;
  double margin_{0.0};
  std::vector<Segment> edges_;
  std::vector<Segment> obstacle_edges_;
};

/// True iff `p` is inside the boundary and outside every obstacle.
inline bool contains_free(const Workspace& w, Vec2 p) {
  if (!point_in_polygon(w.boundary(), p)) return false;
  for (const auto& o : w.obstacles()) {
    if (point_in_polygon(o, p)) return false;
  }
  return true;
}

/// Distance from `p` to the nearest edge, without the free-space check.
inline double edge_distance(const Workspace& w, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : w.edges()) best = std::min(best, segment_distance(e.a, e.b, p));
  return best;
}

/// Distance from a free point to the nearest boundary or obstacle edge.
inline double clearance(const Workspace& w, Vec2 p) {
  if (!contains_free(w, p)) throw std::invalid_argument("clearance: point is not in free space");
  return edge_distance(w, p);
}

/// Distance along `r` to the first edge hit, or nullopt when nothing lies
/// within `r.max_range`.
inline std::optional<double> raycast(const Workspace& w, const Ray& r) {
  if (!(r.max_range > 0.0)) throw std::invalid_argument("raycast: max_range must be > 0");
  const Vec2 dir = unit_from_angle(r.direction);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : w.edges()) {
    if (auto t = ray_segment_hit(r.origin, dir, e.a, e.b); t && *t > kGeomEps && *t < best) best = *t;
  }
  if (best <= r.max_range) return best;
  return std::nullopt;
}

/// True when the straight segment from `a` to `b` crosses no edge.
inline bool line_of_sight(const Workspace& w, Vec2 a, Vec2 b) {
  const double len = distance(a, b);
  if (len <= kGeomEps) return true;
  auto hit = raycast(w, Ray{a, angle_of(b - a), len});
  return !hit || *hit >= len - kGeomEps;
}

}  // namespace tricover
