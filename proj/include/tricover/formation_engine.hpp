#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "tricover/engine.hpp"
#include "tricover/formation.hpp"
#include "tricover/netsim.hpp"
#include "tricover/rng.hpp"
#include "tricover/scenario.hpp"

namespace tricover {

/// Tolerances for "in formation".
struct FormationTolerance {
  double position{0.1};  // m, pairwise offset error
  double heading{0.05};  // rad, heading spread
};

struct FormationMetrics {
  double duration{0.0};
  double max_abs_omega{0.0};
  double min_v{std::numeric_limits<double>::infinity()};
  double max_v{0.0};
  std::size_t penetrations{0};  // robot-ticks with the body overlapping an obstacle
  double min_obstacle_distance{std::numeric_limits<double>::infinity()};
  std::size_t boundary_episodes{0};
  std::size_t standoff_samples{0};
  double standoff_min{std::numeric_limits<double>::infinity()};
  double standoff_max{0.0};
  double last_boundary_exit{-1.0};       // s, -1 if never engaged
  std::optional<double> formed_time;     // start of the final in-formation stretch
  double final_offset_error{0.0};
  double final_heading_spread{0.0};
  std::vector<int> final_slots;
  bool permutation{true};
  double last_slot_change{0.0};

  bool constraints_ok(const Limits& lim) const {
    return max_abs_omega <= lim.omega_max + 1e-12 && min_v >= lim.v_min - 1e-12 && max_v <= lim.v_max + 1e-12;
  }
  bool formed() const { return formed_time.has_value(); }
};

struct FormationEpisode {
  FormationMetrics metrics;
  Trajectory trajectory;
};

/// Largest pairwise error between relative positions and the assigned slot
/// offsets, measured in the mean formation frame.
inline double formation_offset_error(std::span<const RobotState> robots, std::span<const int> slots,
                                     const Configuration& cfg, double theta_frame) {
  double worst = 0.0;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    for (std::size_t j = i + 1; j < robots.size(); ++j) {
      const Vec2 rel = rotate(robots[i].pos - robots[j].pos, -theta_frame);
      const Vec2 want = cfg.offsets[static_cast<std::size_t>(slots[i])] - cfg.offsets[static_cast<std::size_t>(slots[j])];
      worst = std::max(worst, distance(rel, want));
    }
  }
  return worst;
}

/// Max minus min heading, measured around the first robot's heading.
inline double heading_spread(std::span<const RobotState> robots) {
  if (robots.empty()) return 0.0;
  double lo = 0.0, hi = 0.0;
  for (const auto& r : robots) {
    const double d = wrap_angle(r.theta - robots[0].theta);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return hi - lo;
}

inline double obstacle_distance(const Workspace& w, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : w.obstacle_edges()) best = std::min(best, segment_distance(e.a, e.b, p));
  return best;
}

inline bool inside_obstacle(const Workspace& w, Vec2 p) {
  for (const auto& o : w.obstacles()) {
    if (point_in_polygon(o, p)) return true;
  }
  return false;
}

/// Formation building with obstacle avoidance (and anonymous slots when
/// enabled) for `sc.formation`.
inline FormationEpisode run_formation(const Scenario& sc, std::uint64_t seed, bool record_trajectory = true,
                                      FormationTolerance tol = {}) {
  if (!sc.formation) throw std::invalid_argument("run_formation: scenario has no formation section");
  const FormationSpec& fs = *sc.formation;
  const Workspace& w = sc.workspace;
  const Limits& lim = fs.limits;
  const double dt = fs.pursuit.dt;
  const std::size_t n = static_cast<std::size_t>(fs.robots);
  const double body = 0.25;

  Rng init(derive_seed(seed, Stream::Formation));
  std::vector<RobotState> robots;
  std::vector<FormationConsensus> fc;
  int attempts = 0;
  while (robots.size() < n) {
    if (++attempts > 100000) throw std::runtime_error("run_formation: cannot place robots");
    const double r = fs.spawn_radius * std::sqrt(init.uniform01());
    const double a = init.uniform(-kPi, kPi);
    const Vec2 p = fs.spawn_center + unit_from_angle(a) * r;
    const double heading = init.uniform(-kPi, kPi);
    const double v0 = init.uniform(lim.v_min, lim.v_max);
    const double th0 = init.uniform(0.0, kPi);
    if (!contains_free(w, p) || obstacle_distance(w, p) < fs.avoid.r_s) continue;
    bool ok = v0 > lim.v_min;
    for (const auto& o : robots) ok = ok && distance(o.pos, p) >= 1.0;
    if (!ok) continue;
    robots.push_back({p, wrap_angle(heading), v0, 0.0});
    fc.push_back({fs.theta_t0.value_or(th0), 0.0, 0.0, v0});
  }

  Rng anon_rng(derive_seed(seed, Stream::Anonymous));
  std::vector<AnonymousState> slots(n);
  for (std::size_t i = 0; i < n; ++i) {
    slots[i] = fs.anon;
    slots[i].r_idx = fs.anonymous ? static_cast<int>(anon_rng.below(n)) : static_cast<int>(i);
  }
  std::vector<Rng> robot_rng;
  for (std::size_t i = 0; i < n; ++i) robot_rng.emplace_back(derive_seed(seed, Stream::RobotBase, i));

  std::vector<ArbiterState> arb(n);
  std::vector<double> engaged_at(n, 0.0);
  // boundary transient is over once phi has held near phi0 for a second
  std::vector<int> near_phi0(n, 0);
  const int settle_steps = std::max(1, static_cast<int>(std::lround(1.0 / dt)));
  FormationEpisode ep;
  FormationMetrics& m = ep.metrics;
  const long steps = std::lround(fs.duration / dt);
  std::vector<int> last_slots(n);
  for (std::size_t i = 0; i < n; ++i) last_slots[i] = slots[i].r_idx;

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;

    // formation quality at the current state
    std::vector<int> sl(n);
    double th_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sl[i] = slots[i].r_idx;
      th_mean += fc[i].theta_t;
    }
    th_mean /= static_cast<double>(n);
    const std::set<int> distinct(sl.begin(), sl.end());
    const bool perm = distinct.size() == n;
    const double err = perm ? formation_offset_error(robots, sl, fs.cfg, th_mean) : std::numeric_limits<double>::infinity();
    const double spread = heading_spread(robots);
    const bool any_boundary = std::any_of(arb.begin(), arb.end(), [](const auto& a) { return a.mode == Mode::BoundaryFollow; });
    if (err <= tol.position && spread < tol.heading && !any_boundary) {
      if (!m.formed_time) m.formed_time = t;
    } else {
      m.formed_time.reset();
    }
    m.final_offset_error = err;
    m.final_heading_spread = spread;
    if (sl != last_slots) {
      m.last_slot_change = t;
      last_slots = sl;
    }
    if (record_trajectory && k % sc.trajectory_stride == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        ep.trajectory.push_back({t, static_cast<int>(i), robots[i].pos.x, robots[i].pos.y, robots[i].theta,
                                 to_string(arb[i].mode)});
      }
    }
    if (k == steps) break;

    // anonymous reassignment at period boundaries, all from the same snapshot
    if (fs.anonymous && k > 0 && k % fs.anon.period_N == 0) {
      std::vector<Vec2> pos;
      for (const auto& r : robots) pos.push_back(r.pos);
      std::vector<AnonymousState> next(n);
      for (std::size_t i = 0; i < n; ++i) next[i] = anonymous_reassign(slots[i], i, pos, fc[i], fs.cfg, t, robot_rng[i]);
      slots = next;
    }

    std::vector<RobotState> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      const RobotState& s = robots[i];
      const auto ft = fictitious_target(s, fc[i], fs.cfg, static_cast<std::size_t>(slots[i].r_idx), t);
      const double pursuit_dir = angle_of(ft.g - s.pos);
      const bool threat = cone_blocked(w, s.pos, s.theta, fs.avoid.r_s, fs.cone_half_angle) ||
                          cone_blocked(w, s.pos, pursuit_dir, fs.avoid.r_s, fs.cone_half_angle);
      const auto readings = arb[i].mode == Mode::BoundaryFollow || threat ? obstacle_readings(w, s, fs.avoid.r_s)
                                                                          : std::vector<Reading>{};
      if (threat && arb[i].mode == Mode::FormationPursuit) {
        arb[i].side = obstacle_side(readings);
        engaged_at[i] = t;
        near_phi0[i] = 0;
        ++m.boundary_episodes;
      }
      const Mode before = arb[i].mode;
      arb[i] = mode_arbiter(arb[i], threat, fs.hysteresis);
      if (before == Mode::BoundaryFollow && arb[i].mode == Mode::FormationPursuit) m.last_boundary_exit = t;

      Command cmd;
      if (arb[i].mode == Mode::BoundaryFollow) {
        cmd = boundary_follow(readings, fs.avoid, lim, arb[i].side, fs.pursuit);
        const auto phi = avoiding_angle(readings, arb[i].side);
        if (near_phi0[i] < settle_steps) near_phi0[i] = phi && std::abs(*phi - fs.avoid.phi0) < 0.035 ? near_phi0[i] + 1 : 0;
        if (near_phi0[i] >= settle_steps) {
          const double d = obstacle_distance(w, s.pos);
          ++m.standoff_samples;
          m.standoff_min = std::min(m.standoff_min, d);
          m.standoff_max = std::max(m.standoff_max, d);
        }
      } else {
        cmd = formation_control(s, ft, fc[i], lim, fs.pursuit);
      }
      next[i] = integrate(s, cmd.v, cmd.omega, dt, lim);
      m.max_abs_omega = std::max(m.max_abs_omega, std::abs(next[i].omega));
      m.min_v = std::min(m.min_v, next[i].v);
      m.max_v = std::max(m.max_v, next[i].v);
    }

    std::vector<Vec2> pos;
    for (const auto& r : robots) pos.push_back(r.pos);
    const CommGraph g = build_graph(pos, fs.r_c);
    std::vector<FormationConsensus> next_fc(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<FormationPeer> peers;
      for (int j : g.adjacency[i]) peers.push_back({robots[static_cast<std::size_t>(j)].pos, fc[static_cast<std::size_t>(j)]});
      next_fc[i] = formation_consensus_update(fc[i], robots[i].pos, next[i].pos, peers);
    }
    robots = next;
    fc = next_fc;

    for (const auto& r : robots) {
      const double d = obstacle_distance(w, r.pos);
      m.min_obstacle_distance = std::min(m.min_obstacle_distance, d);
      if (d < body || inside_obstacle(w, r.pos)) ++m.penetrations;
    }
  }

  m.duration = fs.duration;
  m.final_slots = last_slots;
  m.permutation = std::set<int>(last_slots.begin(), last_slots.end()).size() == n;
  return ep;
}

}  // namespace tricover
