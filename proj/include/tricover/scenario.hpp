#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tricover/formation.hpp"
#include "tricover/geometry.hpp"
#include "tricover/motion.hpp"
#include "tricover/search.hpp"
#include "tricover/topomap.hpp"
#include "tricover/world.hpp"

namespace tricover {

inline constexpr int kSchemaVersion = 1;

struct StageOneParams {
  double tol_theta{1e-4};
  double tol_q{1e-3};
  int max_rounds{400};
};

/// Formation-mode settings; the scenario workspace supplies the obstacles.
struct FormationSpec {
  Configuration cfg;
  int robots{5};
  double duration{120.0};  // s
  double r_c{30.0};
  Vec2 spawn_center;
  double spawn_radius{6.0};
  std::optional<double> theta_t0;  // common initial heading estimate; random in [0, pi) if unset
  bool anonymous{false};
  AnonymousState anon;
  AvoidParams avoid;
  int hysteresis{5};
  double cone_half_angle{0.4363323129985824};  // 25 deg
  Limits limits{formation_limits()};
  PursuitOptions pursuit;
};

struct Scenario {
  std::string name;
  Workspace workspace;
  int robots{3};
  std::vector<std::array<double, 3>> poses;  // x, y, theta; empty means seeded random placement
  double robot_radius{0.25};
  Policy policy{Policy::Modified};
  Mission mission{FullCoverage{}};
  Limits limits{search_limits()};
  SensorModel sensor;
  WaypointNav nav;
  AvoidField avoid;
  double r_c{10.0};
  double side{2.0};
  double dt{0.1};
  StageOneParams stage_one;
  std::optional<double> step_cap_factor;  // decisions per ground-truth vertex; policy default if unset
  double max_time{2.0e5};                 // s of stage two
  std::uint64_t seed{1};
  int runs{20};
  std::vector<int> team_sizes;
  int trajectory_stride{10};
  std::optional<FormationSpec> formation;
};

inline double default_step_cap_factor(Policy p) {
  switch (p) {
    case Policy::Random: return 200.0;
    case Policy::SemiRandom: return 100.0;
    case Policy::Modified: return 10.0;
  }
  return 50.0;
}

namespace detail {

using nlohmann::json;

inline Vec2 read_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Polygon read_polygon(const json& j, const std::string& where) {
  if (!j.is_array()) throw std::invalid_argument(where + ": expected a list of points");
  Polygon p;
  for (std::size_t i = 0; i < j.size(); ++i) p.push_back(read_point(j[i], where + "[" + std::to_string(i) + "]"));
  return p;
}

template <class T>
void get_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline std::vector<Polygon> read_obstacles(const json& j) {
  std::vector<Polygon> out;
  if (!j.contains("obstacles")) return out;
  const auto& arr = j.at("obstacles");
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(read_polygon(arr[i], "obstacles[" + std::to_string(i) + "]"));
  return out;
}

inline void check_schema(const json& j) {
  if (!j.contains("schema_version")) throw std::invalid_argument("scenario: missing schema_version");
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::invalid_argument("scenario: unsupported schema_version " + j.at("schema_version").dump());
  }
}

inline Polygon square(Vec2 c, double half) {
  return {{c.x - half, c.y - half}, {c.x + half, c.y - half}, {c.x + half, c.y + half}, {c.x - half, c.y + half}};
}

inline FormationSpec read_formation(const json& f) {
  FormationSpec spec;
  get_opt(f, "robots", spec.robots);
  if (spec.robots < 1) throw std::invalid_argument("formation.robots must be >= 1");
  if (f.contains("offsets")) {
    spec.cfg.offsets = read_polygon(f.at("offsets"), "formation.offsets");
  } else {
    spec.cfg = preset(f.value("preset", std::string{"edge"}), spec.robots);
  }
  get_opt(f, "c", spec.cfg.c);
  if (static_cast<int>(spec.cfg.offsets.size()) != spec.robots) {
    throw std::invalid_argument("formation: offsets count must equal robots");
  }
  get_opt(f, "duration", spec.duration);
  get_opt(f, "r_c", spec.r_c);
  if (f.contains("spawn_center")) spec.spawn_center = read_point(f.at("spawn_center"), "formation.spawn_center");
  get_opt(f, "spawn_radius", spec.spawn_radius);
  if (f.contains("theta_t0") && !f.at("theta_t0").is_null()) spec.theta_t0 = f.at("theta_t0").get<double>();
  if (f.contains("limits")) {
    const auto& l = f.at("limits");
    get_opt(l, "v_max", spec.limits.v_max);
    get_opt(l, "v_min", spec.limits.v_min);
    get_opt(l, "omega_max", spec.limits.omega_max);
  }
  if (f.contains("anonymous")) {
    const auto& a = f.at("anonymous");
    get_opt(a, "enabled", spec.anonymous);
    get_opt(a, "period_N", spec.anon.period_N);
    get_opt(a, "R", spec.anon.R);
    get_opt(a, "eps", spec.anon.eps);
  }
  double r_s = 2.0, phi0 = kPi / 6.0;
  if (f.contains("avoid")) {
    const auto& a = f.at("avoid");
    get_opt(a, "r_s", r_s);
    get_opt(a, "phi0", phi0);
    get_opt(a, "hysteresis", spec.hysteresis);
    get_opt(a, "cone_half_angle", spec.cone_half_angle);
  }
  spec.avoid = avoid_params(r_s, phi0);
  if (f.contains("pursuit")) {
    const auto& p = f.at("pursuit");
    get_opt(p, "dt", spec.pursuit.dt);
    get_opt(p, "deadband", spec.pursuit.deadband);
    get_opt(p, "ideal", spec.pursuit.ideal);
  }
  validate(spec.limits);
  validate(spec.cfg, spec.limits);
  validate(spec.avoid, spec.limits);
  if (spec.anonymous) {
    validate(spec.anon, spec.cfg.offsets.size());
    if (!slot_graph_connected(slot_graph(spec.cfg, spec.anon.R, spec.anon.eps))) {
      throw std::invalid_argument("formation: slot graph is not connected for R and eps");
    }
  }
  if (!(spec.duration > 0.0) || !(spec.r_c > 0.0) || !(spec.spawn_radius > 0.0) || !(spec.pursuit.dt > 0.0)) {
    throw std::invalid_argument("formation: duration, r_c, spawn_radius and dt must be > 0");
  }
  if (spec.theta_t0 && !(*spec.theta_t0 >= 0.0 && *spec.theta_t0 < kPi)) {
    throw std::invalid_argument("formation: theta_t0 must lie in [0, pi)");
  }
  return spec;
}

}  // namespace detail

/// Parses and validates a scenario document.
inline Scenario parse_scenario(const nlohmann::json& j) {
  using detail::get_opt;
  detail::check_schema(j);
  Scenario s;
  s.name = j.value("name", std::string{"unnamed"});
  get_opt(j, "dt", s.dt);

  if (j.contains("formation")) {
    s.formation = detail::read_formation(j.at("formation"));
    s.dt = s.formation->pursuit.dt;
    s.robots = s.formation->robots;
    Polygon boundary;
    if (j.contains("workspace") && j.at("workspace").contains("boundary")) {
      boundary = detail::read_polygon(j.at("workspace").at("boundary"), "workspace.boundary");
    } else {
      boundary = detail::square(s.formation->spawn_center, 1000.0);
    }
    const auto obstacles = detail::read_obstacles(j.contains("workspace") ? j.at("workspace") : j);
    s.workspace = Workspace(std::move(boundary), obstacles, 0.0);
    get_opt(j, "seed", s.seed);
    get_opt(j, "runs", s.runs);
    return s;
  }

  if (!j.contains("workspace")) throw std::invalid_argument("scenario: missing workspace");
  const auto& wj = j.at("workspace");
  if (!wj.contains("boundary")) throw std::invalid_argument("scenario: missing workspace.boundary");
  double margin = -1.0;
  if (j.contains("robots")) get_opt(j.at("robots"), "radius", s.robot_radius);
  get_opt(wj, "margin", margin);
  if (margin < 0.0) margin = s.robot_radius + 0.1;
  s.workspace = Workspace(detail::read_polygon(wj.at("boundary"), "workspace.boundary"), detail::read_obstacles(wj), margin);

  if (j.contains("robots")) {
    const auto& r = j.at("robots");
    get_opt(r, "count", s.robots);
    if (r.contains("poses")) {
      for (const auto& p : r.at("poses")) {
        if (!p.is_array() || p.size() != 3) throw std::invalid_argument("robots.poses: expected [x, y, theta]");
        s.poses.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
      }
      s.robots = static_cast<int>(s.poses.size());
    }
  }
  if (s.robots < 1) throw std::invalid_argument("scenario: robots.count must be >= 1");

  if (j.contains("policy")) s.policy = parse_policy(j.at("policy").get<std::string>());
  if (j.contains("mission")) {
    const auto& m = j.at("mission");
    const auto type = m.value("type", std::string{"coverage"});
    if (type == "coverage") {
      s.mission = FullCoverage{};
    } else if (type == "targets") {
      Targets t;
      if (m.contains("targets")) t.positions = detail::read_polygon(m.at("targets"), "mission.targets");
      s.mission = t;
    } else if (type == "patrol") {
      s.mission = Patrol{m.value("reset_period", 0)};
    } else {
      throw std::invalid_argument("mission.type: unknown '" + type + "'");
    }
  }
  validate(s.mission);

  if (j.contains("limits")) {
    const auto& l = j.at("limits");
    get_opt(l, "v_max", s.limits.v_max);
    get_opt(l, "v_min", s.limits.v_min);
    get_opt(l, "omega_max", s.limits.omega_max);
    get_opt(l, "accel_v", s.limits.accel_v);
    get_opt(l, "accel_omega", s.limits.accel_omega);
  }
  validate(s.limits);
  if (j.contains("sensor")) {
    const auto& q = j.at("sensor");
    get_opt(q, "r_s", s.sensor.r_s);
    get_opt(q, "n_rays", s.sensor.n_rays);
    get_opt(q, "max_range", s.sensor.max_range);
  }
  if (!(s.sensor.r_s > 0.0) || s.sensor.n_rays < 1 || !(s.sensor.max_range > 0.0)) {
    throw std::invalid_argument("sensor: r_s, n_rays and max_range must be > 0");
  }
  if (j.contains("nav")) {
    const auto& n = j.at("nav");
    get_opt(n, "arrival_tol", s.nav.arrival_tol);
    get_opt(n, "et_factor", s.nav.et_factor);
    get_opt(n, "k_heading", s.nav.k_heading);
  }
  validate(s.nav);

  s.side = std::sqrt(3.0) * s.sensor.r_s;
  get_opt(j, "side", s.side);
  get_opt(j, "r_c", s.r_c);
  if (!(s.side > 0.0) || !(s.r_c > 0.0) || !(s.dt > 0.0)) throw std::invalid_argument("scenario: side, r_c, dt must be > 0");
  if (j.contains("stage_one")) {
    const auto& st = j.at("stage_one");
    get_opt(st, "tol_theta", s.stage_one.tol_theta);
    get_opt(st, "tol_q", s.stage_one.tol_q);
    get_opt(st, "max_rounds", s.stage_one.max_rounds);
  }
  if (!(s.stage_one.tol_theta > 0.0) || !(s.stage_one.tol_q > 0.0) || s.stage_one.max_rounds < 1) {
    throw std::invalid_argument("stage_one: tolerances and max_rounds must be > 0");
  }
  if (j.contains("step_cap_factor")) s.step_cap_factor = j.at("step_cap_factor").get<double>();
  get_opt(j, "max_time", s.max_time);
  get_opt(j, "seed", s.seed);
  get_opt(j, "runs", s.runs);
  get_opt(j, "team_sizes", s.team_sizes);
  get_opt(j, "trajectory_stride", s.trajectory_stride);
  if (s.trajectory_stride < 1) throw std::invalid_argument("trajectory_stride must be >= 1");

  for (std::size_t i = 0; i < s.poses.size(); ++i) {
    const Vec2 p{s.poses[i][0], s.poses[i][1]};
    if (!contains_free(s.workspace, p)) throw std::invalid_argument("robots.poses[" + std::to_string(i) + "] is not in free space");
  }
  return s;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("'" + path + "': " + e.what());
  }
}

inline Scenario load_scenario(const std::string& path) {
  try {
    return parse_scenario(read_json_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("'" + path + "': " + e.what());
  }
}

/// Obstacle list from a standalone course file (`schema_version`, `obstacles`).
inline std::vector<Polygon> load_obstacles(const std::string& path) {
  const auto j = read_json_file(path);
  detail::check_schema(j);
  return detail::read_obstacles(j);
}

/// Formation scenario for a preset over an obstacle list (empty for open field).
inline Scenario formation_scenario(const std::string& preset_name, const std::vector<Polygon>& obstacles, int robots,
                                   double duration, bool anonymous = false) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = "formation-" + preset_name;
  j["formation"] = {{"preset", preset_name}, {"robots", robots}, {"duration", duration}, {"theta_t0", 0.0},
                    {"anonymous", {{"enabled", anonymous}}}};
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& poly : obstacles) {
    nlohmann::json pj = nlohmann::json::array();
    for (auto q : poly) pj.push_back({q.x, q.y});
    obs.push_back(pj);
  }
  j["workspace"] = {{"obstacles", obs}};
  return parse_scenario(j);
}

}  // namespace tricover
