#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tricover/geometry.hpp"
#include "tricover/motion.hpp"
#include "tricover/rng.hpp"
#include "tricover/world.hpp"

namespace tricover {

/// Per-robot formation consensus variables. `x_t`, `y_t` are world-frame
/// offsets such that pos + (x_t, y_t) is the shared formation origin.
struct FormationConsensus {
  double theta_t{0.0};  // [0, pi)
  double x_t{0.0};
  double y_t{0.0};
  double v_t{0.0};

  Vec2 offset() const { return {x_t, y_t}; }
};

/// Desired shape as slot offsets in the formation frame (x along travel).
struct Configuration {
  std::vector<Vec2> offsets;
  double c{2.0};  // pursuit look-ahead, m
};

inline void validate(const Configuration& cfg, const Limits& lim) {
  if (cfg.offsets.empty()) throw std::invalid_argument("configuration needs at least one slot");
  if (!(cfg.c > 2.0 * lim.v_max / lim.omega_max)) {
    throw std::invalid_argument("configuration: c must exceed 2 * v_max / omega_max");
  }
}

/// '>' edge: apex leading, arms trailing at 45 degrees.
inline Configuration edge_preset(int n, double spacing = 2.0) {
  if (n < 1) throw std::invalid_argument("edge_preset: n must be >= 1");
  Configuration cfg;
  cfg.offsets.push_back({0.0, 0.0});
  const double step = spacing / std::sqrt(2.0);
  for (int k = 1; static_cast<int>(cfg.offsets.size()) < n; ++k) {
    cfg.offsets.push_back({-step * k, step * k});
    if (static_cast<int>(cfg.offsets.size()) < n) cfg.offsets.push_back({-step * k, -step * k});
  }
  return cfg;
}

/// '|' line abreast, perpendicular to travel.
inline Configuration line_preset(int n, double spacing = 2.0) {
  if (n < 1) throw std::invalid_argument("line_preset: n must be >= 1");
  Configuration cfg;
  for (int i = 0; i < n; ++i) cfg.offsets.push_back({0.0, spacing * (i - (n - 1) / 2.0)});
  return cfg;
}

/// '(' arc with its middle trailing; neighbouring slots `spacing` apart along the arc.
inline Configuration arc_preset(int n, double spacing = 2.0, double radius = 5.0) {
  if (n < 1) throw std::invalid_argument("arc_preset: n must be >= 1");
  Configuration cfg;
  const double dphi = spacing / radius;
  for (int i = 0; i < n; ++i) {
    const double a = dphi * (i - (n - 1) / 2.0);
    cfg.offsets.push_back({radius * (1.0 - std::cos(a)), radius * std::sin(a)});
  }
  return cfg;
}

inline Configuration preset(std::string_view name, int n) {
  if (name == "edge") return edge_preset(n);
  if (name == "line") return line_preset(n);
  if (name == "arc") return arc_preset(n);
  throw std::invalid_argument("unknown formation preset '" + std::string(name) + "'");
}

struct FormationPeer {
  Vec2 pos;  // position at step k
  FormationConsensus fc;
};

/// Consensus step. Heading and speed are plain averages; the origin estimate
/// averages pos + offset over the neighbourhood, then subtracts the robot's
/// position at step k+1.
inline FormationConsensus formation_consensus_update(const FormationConsensus& self, Vec2 pos_k, Vec2 pos_next,
                                                     std::span<const FormationPeer> neighbors) {
  double th = self.theta_t, v = self.v_t;
  Vec2 sum = pos_k + self.offset();
  for (const auto& nb : neighbors) {
    th += nb.fc.theta_t;
    v += nb.fc.v_t;
    sum += nb.pos + nb.fc.offset();
  }
  const double n = 1.0 + static_cast<double>(neighbors.size());
  const Vec2 origin = sum / n - pos_next;
  return {th / n, origin.x, origin.y, v / n};
}

/// Moving pursuit point for one slot, plus the along-track quantities the
/// speed law needs. Frame coordinates are in the robot's theta_t frame.
struct FictitiousTarget {
  Vec2 g;            // world frame
  double x{0.0};     // robot along-track coordinate
  double h{0.0};     // slot along-track coordinate
  bool behind{true}; // x <= h
};

inline FictitiousTarget fictitious_target(const RobotState& s, const FormationConsensus& fc,
                                          const Configuration& cfg, std::size_t slot, double t) {
  if (slot >= cfg.offsets.size()) throw std::invalid_argument("fictitious_target: slot out of range");
  const Vec2 p = rotate(s.pos, -fc.theta_t);
  const Vec2 origin = rotate(s.pos + fc.offset(), -fc.theta_t);
  const Vec2 off = cfg.offsets[slot];
  const double h = origin.x + off.x + t * fc.v_t;
  const bool behind = p.x <= h;
  const Vec2 g_local{behind ? h + cfg.c : p.x + cfg.c, origin.y + off.y};
  return {rotate(g_local, fc.theta_t), p.x, h, behind};
}

/// How the discontinuous pursuit law is realized at a fixed step.
struct PursuitOptions {
  double dt{0.1};
  double deadband{0.02};  // |psi| below this counts as zero
  bool ideal{false};      // pure sign law and two-level speed
};

/// Pursuit law toward `target`. Ideal mode is the bang-bang law; otherwise
/// the turn is capped at what closes psi within one step and the speed
/// tracks h between v_min and v_max.
inline Command formation_control(const RobotState& s, const FictitiousTarget& target, const FormationConsensus& fc,
                                 const Limits& lim, const PursuitOptions& opt = {}) {
  const double psi = wrap_angle(angle_of(target.g - s.pos) - s.theta);
  Command c;
  if (opt.ideal) {
    c.v = target.behind ? lim.v_max : lim.v_min;
    c.omega = psi > 0.0 ? lim.omega_max : (psi < 0.0 ? -lim.omega_max : 0.0);
    return c;
  }
  c.v = std::clamp((target.h + fc.v_t * opt.dt - target.x) / opt.dt, lim.v_min, lim.v_max);
  if (std::abs(psi) < opt.deadband) {
    c.omega = 0.0;
  } else {
    c.omega = std::copysign(std::min(lim.omega_max, std::abs(psi) / opt.dt), psi);
  }
  return c;
}

// ---- anonymous slot assignment ----

struct AnonymousState {
  int r_idx{0};  // claimed slot, 0-based
  int period_N{20};
  double R{8.0};
  double eps{0.5};
};

inline void validate(const AnonymousState& a, std::size_t n_slots) {
  if (!(a.eps > 0.0 && a.eps < a.R / 2.0)) throw std::invalid_argument("anonymous: need 0 < eps < R/2");
  if (a.period_N < 1) throw std::invalid_argument("anonymous: period_N must be >= 1");
  if (a.r_idx < 0 || static_cast<std::size_t>(a.r_idx) >= n_slots) throw std::invalid_argument("anonymous: slot out of range");
}

/// Slot adjacency: slots within R - 2 eps of each other.
inline std::vector<std::vector<int>> slot_graph(const Configuration& cfg, double R, double eps) {
  const std::size_t n = cfg.offsets.size();
  std::vector<std::vector<int>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && distance(cfg.offsets[i], cfg.offsets[j]) <= R - 2.0 * eps) adj[i].push_back(static_cast<int>(j));
    }
  }
  return adj;
}

inline bool slot_graph_connected(const std::vector<std::vector<int>>& adj) {
  if (adj.empty()) return true;
  std::vector<char> seen(adj.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        stack.push_back(u);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

/// World position of slot `j` as robot `self_pos` currently estimates it.
inline Vec2 slot_point(Vec2 self_pos, const FormationConsensus& fc, const Configuration& cfg, std::size_t j, double t) {
  const Vec2 origin = rotate(self_pos + fc.offset(), -fc.theta_t);
  const Vec2 local{origin.x + cfg.offsets[j].x + t * fc.v_t, origin.y + cfg.offsets[j].y};
  return rotate(local, fc.theta_t);
}

/// Randomized reassignment at a period boundary. `poses` holds every robot's
/// position; only those within R of robot `self` are sensed.
inline AnonymousState anonymous_reassign(AnonymousState st, std::size_t self, std::span<const Vec2> poses,
                                         const FormationConsensus& fc, const Configuration& cfg, double t, Rng& rng) {
  const Vec2 me = poses[self];
  std::vector<Vec2> sensed;
  std::vector<std::size_t> ids;
  for (std::size_t j = 0; j < poses.size(); ++j) {
    if (distance(poses[j], me) <= st.R) {
      sensed.push_back(poses[j]);
      ids.push_back(j);
    }
  }
  auto occupied = [&](Vec2 pt, bool exclude_self) {
    for (std::size_t k = 0; k < sensed.size(); ++k) {
      if (exclude_self && ids[k] == self) continue;
      if (distance(sensed[k], pt) < st.eps) return true;
    }
    return false;
  };
  const auto r = static_cast<std::size_t>(st.r_idx);
  if (!occupied(slot_point(me, fc, cfg, r, t), true)) return st;
  std::vector<int> S{st.r_idx};
  const auto graph = slot_graph(cfg, st.R, st.eps);
  for (int j : graph[r]) {
    if (!occupied(slot_point(me, fc, cfg, static_cast<std::size_t>(j), t), false)) S.push_back(j);
  }
  if (S.size() > 1) st.r_idx = S[rng.below(S.size())];
  return st;
}

// ---- obstacle boundary following ----

struct AvoidParams {
  double d0{1.0};
  double phi0{kPi / 6.0};
  double r_s{2.0};
};

/// Checks d0 = r_s sin(phi0) and that the tightest turn keeps clear of d0.
inline void validate(const AvoidParams& p, const Limits& lim) {
  if (!(p.r_s > 0.0) || !(p.phi0 > 0.0 && p.phi0 < kPi / 2.0)) throw std::invalid_argument("avoid params: bad r_s or phi0");
  if (std::abs(p.d0 - p.r_s * std::sin(p.phi0)) > 1e-6) throw std::invalid_argument("avoid params: d0 must equal r_s*sin(phi0)");
  if (!(p.r_s - lim.v_max / lim.omega_max > p.d0)) throw std::invalid_argument("avoid params: need r_s - v_max/omega_max > d0");
}

inline AvoidParams avoid_params(double r_s, double phi0) { return {r_s * std::sin(phi0), phi0, r_s}; }

/// Obstacle point seen by the range sensor, relative to the heading (left positive).
struct Reading {
  double angle{0.0};
  double range{0.0};
};

/// Detectable obstacle points that can be the farthest within range: edge
/// crossings of the sensing circle and obstacle corners, restricted to the
/// forward half-plane and to unobstructed lines of sight.
inline std::vector<Reading> obstacle_readings(const Workspace& w, const RobotState& s, double r_s) {
  std::vector<Vec2> pts;
  for (const auto& e : w.obstacle_edges()) {
    for (double t : segment_circle_params(e.a, e.b, s.pos, r_s)) pts.push_back(e.a + (e.b - e.a) * t);
    if (distance(e.a, s.pos) <= r_s) pts.push_back(e.a);
  }
  std::vector<Reading> out;
  for (auto p : pts) {
    const double range = distance(p, s.pos);
    if (range <= kGeomEps) continue;
    const double a = wrap_angle(angle_of(p - s.pos) - s.theta);
    if (std::abs(a) > kPi / 2.0) continue;
    // visible if nothing is hit meaningfully before the point itself
    double first = range;
    const Vec2 dir = (p - s.pos) / range;
    for (const auto& e : w.obstacle_edges()) {
      if (auto t = ray_segment_hit(s.pos, dir, e.a, e.b); t && *t > kGeomEps) first = std::min(first, *t);
    }
    if (first < range - 1e-6) continue;
    out.push_back({a, range});
  }
  return out;
}

enum class Side { Right = -1, Left = 1 };

/// Which side an obstacle lies on: the side of the nearest reading (right on ties).
inline Side obstacle_side(std::span<const Reading> readings) {
  const Reading* best = nullptr;
  for (const auto& r : readings) {
    if (!best || r.range < best->range) best = &r;
  }
  return best && best->angle > 0.0 ? Side::Left : Side::Right;
}

/// Avoiding angle to the farthest reading, measured toward `side` from the
/// heading. Among equally far points the one nearest the free side wins.
inline std::optional<double> avoiding_angle(std::span<const Reading> readings, Side side) {
  std::optional<double> phi;
  double far = -1.0;
  for (const auto& r : readings) {
    const double p = side == Side::Right ? -r.angle : r.angle;
    if (r.range > far + 1e-6) {
      far = r.range;
      phi = p;
    } else if (r.range > far - 1e-6 && p < *phi) {
      phi = p;
    }
  }
  return phi;
}

/// Boundary-following law with the obstacle on `side`. Ideal mode turns at
/// full rate; otherwise the turn is capped at |phi - phi0| per step. With no
/// reading the robot turns toward the obstacle side to reacquire it.
inline Command boundary_follow(std::span<const Reading> readings, const AvoidParams& p, const Limits& lim,
                               Side side = Side::Right, const PursuitOptions& opt = {}) {
  const double toward = side == Side::Right ? -1.0 : 1.0;  // turn sign toward the obstacle
  const auto phi = avoiding_angle(readings, side);
  Command c{lim.v_max, 0.0};
  if (!phi) {
    c.omega = toward * lim.omega_max;
    return c;
  }
  const double diff = *phi - p.phi0;  // > 0: too far from the surface
  const double tol = opt.ideal ? 0.0 : 1e-3;
  if (std::abs(diff) <= tol) return c;
  const double mag = opt.ideal ? lim.omega_max : std::min(lim.omega_max, std::abs(diff) / opt.dt);
  c.omega = (diff > 0.0 ? toward : -toward) * mag;
  return c;
}

enum class Mode { FormationPursuit, BoundaryFollow };

inline std::string_view to_string(Mode m) { return m == Mode::BoundaryFollow ? "boundary" : "pursuit"; }

struct ArbiterState {
  Mode mode{Mode::FormationPursuit};
  int clear_steps{0};
  Side side{Side::Right};
};

/// Engages on any threat; reverts after `hysteresis` consecutive clear steps.
inline ArbiterState mode_arbiter(ArbiterState st, bool threat, int hysteresis = 5) {
  if (threat) {
    st.mode = Mode::BoundaryFollow;
    st.clear_steps = 0;
  } else if (st.mode == Mode::BoundaryFollow && ++st.clear_steps >= hysteresis) {
    st.mode = Mode::FormationPursuit;
    st.clear_steps = 0;
  }
  return st;
}

/// True when an obstacle lies within `range` inside the cone of half-angle
/// `half` around `direction`.
inline bool cone_blocked(const Workspace& w, Vec2 pos, double direction, double range, double half, int rays = 7) {
  for (int k = 0; k < rays; ++k) {
    const double a = direction + (rays == 1 ? 0.0 : -half + 2.0 * half * k / (rays - 1));
    const Vec2 dir = unit_from_angle(a);
    for (const auto& e : w.obstacle_edges()) {
      if (auto t = ray_segment_hit(pos, dir, e.a, e.b); t && *t > kGeomEps && *t <= range) return true;
    }
  }
  return false;
}

}  // namespace tricover
