#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "tricover/geometry.hpp"

namespace tricover {

/// Equilateral triangular lattice fixed by an anchor vertex `q`, an
/// orientation `theta` in [0, pi) and the triangle side length.
struct GridFrame {
  Vec2 q;
  double theta{0.0};
  double side{1.0};

  /// First basis vector, `side` along `theta`.
  Vec2 u() const { return unit_from_angle(theta) * side; }
  /// Second basis vector, `side` along `theta + 60 deg`.
  Vec2 w() const { return unit_from_angle(theta + kPi / 3.0) * side; }
};

inline void validate(const GridFrame& f) {
  if (!(f.side > 0.0)) throw std::invalid_argument("GridFrame: side must be > 0");
  if (!(f.theta >= 0.0 && f.theta < kPi)) throw std::invalid_argument("GridFrame: theta must lie in [0, pi)");
}

/// Axial integer coordinates of a lattice vertex.
struct LatticeCoord {
  std::int32_t a{0};
  std::int32_t b{0};

  friend constexpr auto operator<=>(const LatticeCoord&, const LatticeCoord&) = default;
};

struct LatticeCoordHash {
  std::size_t operator()(const LatticeCoord& c) const noexcept {
    const auto ua = static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.a));
    const auto ub = static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.b));
    std::uint64_t h = (ua << 32) | ub;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

inline Vec2 vertex_point(const GridFrame& f, LatticeCoord c) {
  return f.q + f.u() * static_cast<double>(c.a) + f.w() * static_cast<double>(c.b);
}

/// Real-valued axial coordinates of `p` in frame `f`.
inline std::array<double, 2> lattice_coords(const GridFrame& f, Vec2 p) {
  const Vec2 u = f.u(), w = f.w();
  const Vec2 d = p - f.q;
  const double det = cross(u, w);
  return {cross(d, w) / det, cross(u, d) / det};
}

/// Closest lattice vertex to `p`. Equidistant candidates (within the
/// geometric tolerance) resolve to the lexicographically smallest (a, b).
inline LatticeCoord nearest_vertex(const GridFrame& f, Vec2 p) {
  const auto [fa, fb] = lattice_coords(f, p);
  const auto ra = static_cast<std::int32_t>(std::lround(fa));
  const auto rb = static_cast<std::int32_t>(std::lround(fb));
  LatticeCoord best{ra, rb};
  double best_d = distance(vertex_point(f, best), p);
  for (std::int32_t da = -1; da <= 1; ++da) {
    for (std::int32_t db = -1; db <= 1; ++db) {
      const LatticeCoord c{ra + da, rb + db};
      const double d = distance(vertex_point(f, c), p);
      if (d < best_d - kGeomEps || (std::abs(d - best_d) <= kGeomEps && c < best)) {
        best = c;
        best_d = std::min(best_d, d);
      }
    }
  }
  return best;
}

inline constexpr std::array<LatticeCoord, 6> kNeighborOffsets{{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1},
}};

/// The six lattice neighbours of `c`, each exactly one side length away.
inline std::array<LatticeCoord, 6> six_neighbors(LatticeCoord c) {
  std::array<LatticeCoord, 6> out{};
  for (std::size_t i = 0; i < 6; ++i) out[i] = {c.a + kNeighborOffsets[i].a, c.b + kNeighborOffsets[i].b};
  return out;
}

inline bool are_neighbors(LatticeCoord x, LatticeCoord y) {
  const std::int32_t da = y.a - x.a, db = y.b - x.b;
  for (auto o : kNeighborOffsets) {
    if (o.a == da && o.b == db) return true;
  }
  return false;
}

}  // namespace tricover
