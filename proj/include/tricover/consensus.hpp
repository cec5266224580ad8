#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "tricover/geometry.hpp"
#include "tricover/trigrid.hpp"

namespace tricover {

/// Per-robot grid consensus variables: lattice angle and anchor point.
struct LocatingState {
  double theta{0.0};
  Vec2 q;
};

/// Default stage-one convergence tolerances.
inline constexpr double kDefaultTolTheta = 1e-4;
inline constexpr double kDefaultTolQ = 1e-3;

/// One averaging round over the robot itself and its current neighbours.
/// Angles are averaged as raw values with no wrap-around.
inline LocatingState locating_update(const LocatingState& self, std::span<const LocatingState> neighbors) {
  double theta = self.theta;
  Vec2 q = self.q;
  for (const auto& n : neighbors) {
    theta += n.theta;
    q += n.q;
  }
  const double count = 1.0 + static_cast<double>(neighbors.size());
  return {theta / count, q / count};
}

/// Synchronous round for the whole team; `adjacency[i]` lists robot i's
/// neighbours. All robots read the pre-round values.
inline std::vector<LocatingState> locating_round(std::span<const LocatingState> states,
                                                 const std::vector<std::vector<int>>& adjacency) {
  std::vector<LocatingState> next(states.size());
  std::vector<LocatingState> buf;
  for (std::size_t i = 0; i < states.size(); ++i) {
    buf.clear();
    for (int j : adjacency[i]) buf.push_back(states[static_cast<std::size_t>(j)]);
    next[i] = locating_update(states[i], buf);
  }
  return next;
}

inline GridFrame frame_of(const LocatingState& s, double side) { return GridFrame{s.q, s.theta, side}; }

/// Nearest vertex of the robot's own grid to `p`: the robot's next stage-one waypoint.
inline Vec2 snap_waypoint(const LocatingState& s, double side, Vec2 p) {
  if (!(side > 0.0)) throw std::invalid_argument("snap_waypoint: side must be > 0");
  const GridFrame f = frame_of(s, side);
  return vertex_point(f, nearest_vertex(f, p));
}

inline double theta_spread(std::span<const LocatingState> states) {
  if (states.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(states.begin(), states.end(),
                                      [](const auto& a, const auto& b) { return a.theta < b.theta; });
  return hi->theta - lo->theta;
}

/// Largest pairwise anchor distance.
inline double q_spread(std::span<const LocatingState> states) {
  double best = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) best = std::max(best, distance(states[i].q, states[j].q));
  }
  return best;
}

inline bool consensus_converged(std::span<const LocatingState> states, double tol_theta, double tol_q) {
  if (!(tol_theta > 0.0) || !(tol_q > 0.0)) throw std::invalid_argument("consensus_converged: tolerances must be > 0");
  return theta_spread(states) <= tol_theta && q_spread(states) <= tol_q;
}

/// Distance from `offset` to the nearest lattice translation of `f`, i.e. how
/// far the offset is from an integer combination of the basis vectors.
inline double lattice_residual(const GridFrame& f, Vec2 offset) {
  const GridFrame origin_frame{Vec2{}, f.theta, f.side};
  return distance(vertex_point(origin_frame, nearest_vertex(origin_frame, offset)), offset);
}

}  // namespace tricover
