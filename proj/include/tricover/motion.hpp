#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "tricover/geometry.hpp"
#include "tricover/topomap.hpp"
#include "tricover/world.hpp"

namespace tricover {

/// Unicycle state. `omega` is the last applied turn rate, kept for the
/// angular acceleration cap.
struct RobotState {
  Vec2 pos;
  double theta{0.0};  // (-pi, pi]
  double v{0.0};
  double omega{0.0};
};

struct Limits {
  double v_max{0.4};
  double v_min{0.0};
  double omega_max{1.74};
  double accel_v{std::numeric_limits<double>::infinity()};
  double accel_omega{std::numeric_limits<double>::infinity()};
};

inline void validate(const Limits& l) {
  if (!(l.v_min >= 0.0 && l.v_min < l.v_max)) throw std::invalid_argument("limits: need 0 <= v_min < v_max");
  if (!(l.omega_max > 0.0)) throw std::invalid_argument("limits: omega_max must be > 0");
  if (!(l.accel_v > 0.0) || !(l.accel_omega > 0.0)) throw std::invalid_argument("limits: accel caps must be > 0");
}

/// Search-mode caps (robots may stop).
inline Limits search_limits() { return {0.4, 0.0, 1.74, 0.3, 1.74}; }

/// Formation-mode caps; speed never drops below v_min.
inline Limits formation_limits() {
  return {1.5, 0.2, 2.0, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
}

struct WaypointNav {
  double arrival_tol{0.15};
  double et_factor{3.0};
  double k_heading{2.0};  // 1/s
};

inline void validate(const WaypointNav& n) {
  if (!(n.arrival_tol > 0.0)) throw std::invalid_argument("waypoint nav: arrival_tol must be > 0");
  if (!(n.et_factor > 1.0)) throw std::invalid_argument("waypoint nav: et_factor must be > 1");
  if (!(n.k_heading > 0.0)) throw std::invalid_argument("waypoint nav: k_heading must be > 0");
}

struct Command {
  double v{0.0};
  double omega{0.0};
};

inline Command clamp_command(Command c, const Limits& lim) {
  return {std::clamp(c.v, lim.v_min, lim.v_max), std::clamp(c.omega, -lim.omega_max, lim.omega_max)};
}

/// Clamps and rate-limits the command, then takes one explicit Euler step.
inline RobotState integrate(const RobotState& s, double v_cmd, double omega_cmd, double dt, const Limits& lim) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
  Command c = clamp_command({v_cmd, omega_cmd}, lim);
  const double dv = lim.accel_v * dt, dw = lim.accel_omega * dt;
  c.v = std::clamp(c.v, s.v - dv, s.v + dv);
  c.omega = std::clamp(c.omega, s.omega - dw, s.omega + dw);
  RobotState n = s;
  n.pos.x += c.v * std::cos(s.theta) * dt;
  n.pos.y += c.v * std::sin(s.theta) * dt;
  n.theta = wrap_angle(s.theta + c.omega * dt);
  n.v = c.v;
  n.omega = c.omega;
  return n;
}

/// Proportional heading controller toward `wp`; stops inside arrival_tol.
inline Command track_waypoint(const RobotState& s, Vec2 wp, const Limits& lim, const WaypointNav& nav = {}) {
  const Vec2 d = wp - s.pos;
  if (norm(d) <= nav.arrival_tol) return {0.0, 0.0};
  const double err = wrap_angle(angle_of(d) - s.theta);
  const double omega = std::clamp(nav.k_heading * err, -lim.omega_max, lim.omega_max);
  const double v = lim.v_max * std::max(std::cos(err), 0.0);
  return {std::max(v, lim.v_min), omega};
}

/// Reactive field around the raw command.
struct AvoidField {
  double r_obstacle{0.6};  // wall/obstacle influence radius, m
  double r_robot{0.8};     // robot influence radius, m
  double k_turn{0.6};      // rad/s per unit field
  double k_slow{0.5};      // speed reduction per unit of head-on field
  double bias{0.3};        // sidestep to the right for near head-on robot encounters
};

/// Summed inverse-distance repulsion in the robot frame (x ahead, y left),
/// from forward sensor rays and from other robots in front.
inline Vec2 repulsion(const RobotState& s, const Workspace& w, std::span<const Vec2> others,
                      const SensorModel& sensor, const AvoidField& f) {
  Vec2 field;
  const int n = std::max(sensor.n_rays, 4);
  const bool near_wall = edge_distance(w, s.pos) < f.r_obstacle;
  for (int k = 0; near_wall && k < n; ++k) {
    const double a = wrap_angle(2.0 * kPi * k / n);
    if (std::abs(a) > kPi / 2.0 + kGeomEps) continue;
    auto hit = raycast(w, Ray{s.pos, s.theta + a, f.r_obstacle});
    if (!hit) continue;
    const double d = std::max(*hit, 1e-3);
    field -= unit_from_angle(a) * (1.0 / d - 1.0 / f.r_obstacle);
  }
  for (auto o : others) {
    const Vec2 rel = rotate(o - s.pos, -s.theta);
    const double d = norm(rel);
    if (d >= f.r_robot || d <= kGeomEps || rel.x <= 0.0) continue;
    const double m = 1.0 / d - 1.0 / f.r_robot;
    field -= rel / d * m;
    // break head-on symmetry: both robots veer right
    if (std::abs(rel.y) < 0.25 * d) field.y -= f.bias * m;
  }
  return field;
}

/// Blends the reactive field into `raw`: lateral field turns the robot,
/// head-on field slows it. Output respects `lim`.
inline Command avoid_blend(const RobotState& s, const Workspace& w, std::span<const Vec2> others, Command raw,
                           const SensorModel& sensor, const Limits& lim, const AvoidField& f = {}) {
  const Vec2 field = repulsion(s, w, others, sensor, f);
  if (field.x == 0.0 && field.y == 0.0) return clamp_command(raw, lim);
  Command c = raw;
  c.omega += f.k_turn * field.y;
  if (field.x < 0.0) c.v *= 1.0 / (1.0 - f.k_slow * field.x);
  return clamp_command(c, lim);
}

/// True when travel has exceeded et_factor times the nominal duration.
inline bool et_timeout(double start_time, double now, double dist, double v_ref, const WaypointNav& nav) {
  if (!(v_ref > 0.0)) throw std::invalid_argument("et_timeout: v_ref must be > 0");
  return (now - start_time) > nav.et_factor * dist / v_ref;
}

}  // namespace tricover
