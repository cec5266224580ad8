#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "tricover/consensus.hpp"
#include "tricover/geometry.hpp"
#include "tricover/motion.hpp"
#include "tricover/netsim.hpp"
#include "tricover/rng.hpp"
#include "tricover/scenario.hpp"
#include "tricover/search.hpp"
#include "tricover/topomap.hpp"
#include "tricover/trigrid.hpp"
#include "tricover/world.hpp"

namespace tricover {

struct TrajectorySample {
  double t{0.0};
  int robot{0};
  double x{0.0};
  double y{0.0};
  double theta{0.0};
  std::string_view mode;
};

using Trajectory = std::vector<TrajectorySample>;

struct StageOneResult {
  bool converged{false};
  int rounds{0};
  double time{0.0};
  std::vector<LocatingState> states;
  std::vector<LatticeCoord> vertices;  // final vertex of each robot in its own frame
  std::vector<Vec2> vertex_points;
  std::vector<double> theta_spread;    // per round, before the update
  std::vector<double> q_spread;
  std::size_t connectivity_violations{0};
};

struct RunMetrics {
  int stage1_rounds{0};
  double stage1_time{0.0};
  bool stage1_converged{false};
  bool terminated{false};
  int decisions{0};              // largest per-robot decision count in stage two
  double completion_time{0.0};   // simulated seconds of stage two
  std::vector<double> path_length;
  std::size_t ground_truth_vertices{0};
  std::size_t visited_vertices{0};
  std::size_t revisits{0};
  std::size_t occupancy_conflicts{0};
  std::size_t deleted_vertices{0};
  std::size_t connectivity_violations{0};
  std::vector<std::optional<double>> target_times;

  double coverage() const {
    return ground_truth_vertices == 0 ? 0.0
                                      : static_cast<double>(visited_vertices) / static_cast<double>(ground_truth_vertices);
  }
};

struct Episode {
  RunMetrics metrics;
  Trajectory trajectory;
  StageOneResult stage_one;
  std::vector<TopoMap> maps;
  std::set<LatticeCoord> ground_truth;
  GridFrame frame;  // robot 0's frame; ground-truth coordinates refer to it
};

/// Link distance for random placement: r_c less two lattice sides, so the
/// short stage-one moves cannot break the initial links.
inline double placement_link(const Scenario& sc) { return std::max(sc.r_c - 2.0 * sc.side, 0.5 * sc.r_c); }

/// Seeded placement: free, clear of walls by the margin, apart from earlier
/// robots by `min_sep`, and each new robot within `link` of an earlier one so
/// the initial communication graph is connected with slack.
inline std::vector<RobotState> place_robots(const Workspace& w, int n, double min_sep, double link, Rng& rng) {
  const auto [lo, hi] = w.bounds();
  std::vector<RobotState> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++attempts > 200000) throw std::runtime_error("place_robots: no admissible placement found");
    const Vec2 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
    const double heading = rng.uniform(-kPi, kPi);
    if (!contains_free(w, p) || edge_distance(w, p) < w.margin()) continue;
    bool ok = true, linked = out.empty();
    for (const auto& o : out) {
      const double d = distance(o.pos, p);
      if (d < min_sep) ok = false;
      if (d <= link) linked = true;
    }
    if (!ok || !linked) continue;
    out.push_back({p, wrap_angle(heading), 0.0, 0.0});
  }
  return out;
}

/// Nearest vertex of `f` to `p` that is admissible, visible from `p` and not
/// within half a side of a point in `taken`; falls back to outward rings.
inline std::optional<LatticeCoord> admissible_snap(const Workspace& w, const GridFrame& f, Vec2 p,
                                                   std::span<const Vec2> taken = {}) {
  const LatticeCoord c0 = nearest_vertex(f, p);
  std::vector<std::pair<double, LatticeCoord>> cand;
  for (std::int32_t da = -3; da <= 3; ++da) {
    for (std::int32_t db = -3; db <= 3; ++db) {
      const LatticeCoord c{c0.a + da, c0.b + db};
      cand.emplace_back(distance(vertex_point(f, c), p), c);
    }
  }
  std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
    if (std::abs(x.first - y.first) > kGeomEps) return x.first < y.first;
    return x.second < y.second;
  });
  for (const auto& [d, c] : cand) {
    const Vec2 v = vertex_point(f, c);
    const bool free = std::none_of(taken.begin(), taken.end(), [&](Vec2 t) { return distance(t, v) < 0.5 * f.side; });
    if (free && admissible(w, v) && line_of_sight(w, p, v)) return c;
  }
  return std::nullopt;
}

/// Vertices reachable from `starts` through admissible six-neighbours joined
/// by unobstructed straight edges.
inline std::set<LatticeCoord> reachable_vertices(const Workspace& w, const GridFrame& f,
                                                 const std::vector<LatticeCoord>& starts) {
  std::set<LatticeCoord> seen;
  std::deque<LatticeCoord> queue;
  for (auto s : starts) {
    if (admissible(w, vertex_point(f, s)) && seen.insert(s).second) queue.push_back(s);
  }
  while (!queue.empty()) {
    const LatticeCoord c = queue.front();
    queue.pop_front();
    const Vec2 pc = vertex_point(f, c);
    for (auto n : six_neighbors(c)) {
      if (seen.contains(n)) continue;
      const Vec2 pn = vertex_point(f, n);
      if (!admissible(w, pn) || !line_of_sight(w, pc, pn)) continue;
      seen.insert(n);
      queue.push_back(n);
    }
  }
  return seen;
}

namespace detail {

/// One physics tick toward `wp`; returns distance travelled.
inline double drive(RobotState& s, Vec2 wp, std::span<const Vec2> others, const Scenario& sc) {
  Command cmd = track_waypoint(s, wp, sc.limits, sc.nav);
  // turning on the spot cannot hit anything; the field only shapes forward motion
  if (cmd.v > 0.0) cmd = avoid_blend(s, sc.workspace, others, cmd, sc.sensor, sc.limits, sc.avoid);
  RobotState n = integrate(s, cmd.v, cmd.omega, sc.dt, sc.limits);
  if (!contains_free(sc.workspace, n.pos)) {
    // never step into an obstacle; keep the turn
    n.pos = s.pos;
    n.v = 0.0;
  }
  const double moved = distance(n.pos, s.pos);
  s = n;
  return moved;
}

inline std::vector<Vec2> others_of(const std::vector<RobotState>& robots, std::size_t self) {
  std::vector<Vec2> out;
  out.reserve(robots.size());
  for (std::size_t j = 0; j < robots.size(); ++j) {
    if (j != self) out.push_back(robots[j].pos);
  }
  return out;
}

inline std::vector<Vec2> positions_of(const std::vector<RobotState>& robots) {
  std::vector<Vec2> out;
  out.reserve(robots.size());
  for (const auto& r : robots) out.push_back(r.pos);
  return out;
}

}  // namespace detail

/// Consensus grid locating: every round each robot drives to the nearest
/// admissible vertex of its own grid, then averages (theta, q) with its
/// current neighbours. Rounds end when every robot arrives or times out.
inline StageOneResult run_stage_one(const Scenario& sc, std::vector<RobotState>& robots, Trajectory* traj,
                                    double& clock, long& tick) {
  StageOneResult res;
  const std::size_t n = robots.size();
  for (const auto& r : robots) res.states.push_back({wrap_half_turn(r.theta), r.pos});
  ConnectivityMonitor monitor(10);
  std::vector<LatticeCoord> wp(n);
  std::vector<Vec2> wp_pt(n);
  // snap from the starting position: moves stay within the placement slack,
  // so the initial range graph survives every round
  const auto home = detail::positions_of(robots);

  for (int round = 0; round <= sc.stage_one.max_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const GridFrame f = frame_of(res.states[i], sc.side);
      // earlier robots' waypoints are taken, so no two robots chase one vertex
      auto c = admissible_snap(sc.workspace, f, home[i], std::span<const Vec2>(wp_pt.data(), i));
      wp[i] = c ? *c : nearest_vertex(f, home[i]);
      wp_pt[i] = c ? vertex_point(f, *c) : robots[i].pos;
    }
    const auto pos = detail::positions_of(robots);
    const CommGraph g = build_graph(pos, sc.r_c);
    monitor.push(g);
    const bool converged = consensus_converged(res.states, sc.stage_one.tol_theta, sc.stage_one.tol_q);
    bool settled = round > 0;
    for (std::size_t i = 0; i < n && settled; ++i) settled = distance(robots[i].pos, wp_pt[i]) <= sc.nav.arrival_tol;
    if (converged && settled) {
      res.converged = true;
      break;
    }
    if (round == sc.stage_one.max_rounds) break;
    res.theta_spread.push_back(theta_spread(res.states));
    res.q_spread.push_back(q_spread(res.states));
    const auto next = locating_round(res.states, g.adjacency);

    double longest = 0.0;
    for (std::size_t i = 0; i < n; ++i) longest = std::max(longest, distance(robots[i].pos, wp_pt[i]));
    const double budget = sc.nav.et_factor * longest / sc.limits.v_max + 5.0;
    const double start = clock;
    for (;;) {
      bool all_in = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (distance(robots[i].pos, wp_pt[i]) > sc.nav.arrival_tol) all_in = false;
      }
      if (all_in || clock - start > budget) break;
      for (std::size_t i = 0; i < n; ++i) {
        const auto others = detail::others_of(robots, i);
        detail::drive(robots[i], wp_pt[i], others, sc);
      }
      clock = static_cast<double>(++tick) * sc.dt;  // no drift from repeated sums
      if (traj && tick % sc.trajectory_stride == 0) {
        for (std::size_t i = 0; i < n; ++i) {
          traj->push_back({clock, static_cast<int>(i), robots[i].pos.x, robots[i].pos.y, robots[i].theta, "locate"});
        }
      }
    }
    res.states = next;
    ++res.rounds;
  }
  res.vertices = wp;
  res.vertex_points = wp_pt;
  res.time = clock;
  res.connectivity_violations = monitor.violations();
  return res;
}

namespace detail {

struct Searcher {
  RobotState s;
  Rng rng;
  TopoMap map;
  LatticeCoord current;
  std::vector<LatticeCoord> route;  // remaining legs; back() is the chosen target
  double leg_start{0.0};
  double leg_dist{0.0};
  int decisions{0};
  double path{0.0};
  bool send_full{true};

  bool busy() const { return !route.empty(); }
  LatticeCoord leg() const { return route.front(); }
};

/// Hop path over the robot's map from `from` to `to` (both in the map),
/// using only straight edges with line of sight. Empty if none.
/// Straight leg from `a` to `b` that a disk of radius `body` can drive: line
/// of sight and every wall at least `body` from the segment.
inline bool corridor_clear(const Workspace& w, Vec2 a, Vec2 b, double body) {
  if (!line_of_sight(w, a, b)) return false;
  for (const auto& e : w.edges()) {
    const double d = std::min({segment_distance(a, b, e.a), segment_distance(a, b, e.b), segment_distance(e.a, e.b, a),
                               segment_distance(e.a, e.b, b)});
    if (d < body) return false;
  }
  return true;
}

inline std::vector<LatticeCoord> map_route(const Workspace& w, const TopoMap& map, LatticeCoord from, LatticeCoord to,
                                           std::map<std::pair<LatticeCoord, LatticeCoord>, bool>& los_cache,
                                           double body) {
  auto clear = [&](LatticeCoord a, LatticeCoord b) {
    const auto key = a < b ? std::pair{a, b} : std::pair{b, a};
    if (auto it = los_cache.find(key); it != los_cache.end()) return it->second;
    const bool ok = corridor_clear(w, map.point(a), map.point(b), body);
    los_cache.emplace(key, ok);
    return ok;
  };
  std::map<LatticeCoord, LatticeCoord> parent;
  std::deque<LatticeCoord> queue{from};
  parent.emplace(from, from);
  while (!queue.empty()) {
    const LatticeCoord c = queue.front();
    queue.pop_front();
    if (c == to) break;
    for (auto nb : six_neighbors(c)) {
      if (!map.contains(nb) || parent.contains(nb) || !clear(c, nb)) continue;
      parent.emplace(nb, c);
      queue.push_back(nb);
    }
  }
  if (!parent.contains(to)) return {};
  std::vector<LatticeCoord> path;
  for (LatticeCoord c = to; !(c == from); c = parent.at(c)) path.push_back(c);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace detail

/// One full episode: stage one to a common lattice, then the scenario's
/// policy and mission until termination or a cap.
inline Episode run_episode(const Scenario& sc, std::uint64_t seed, bool record_trajectory = true) {
  Episode ep;
  RunMetrics& m = ep.metrics;
  const int n = sc.robots;
  Rng placement(derive_seed(seed, Stream::Placement));
  std::vector<RobotState> robots;
  if (!sc.poses.empty()) {
    for (const auto& p : sc.poses) robots.push_back({{p[0], p[1]}, wrap_angle(p[2]), 0.0, 0.0});
  } else {
    robots = place_robots(sc.workspace, n, 1.2 * sc.side, placement_link(sc), placement);
  }
  Trajectory* traj = record_trajectory ? &ep.trajectory : nullptr;
  double clock = 0.0;
  long tick = 0;
  if (traj) {
    for (int i = 0; i < n; ++i) traj->push_back({0.0, i, robots[i].pos.x, robots[i].pos.y, robots[i].theta, "locate"});
  }

  ep.stage_one = run_stage_one(sc, robots, traj, clock, tick);
  m.stage1_rounds = ep.stage_one.rounds;
  m.stage1_time = ep.stage_one.time;
  m.stage1_converged = ep.stage_one.converged;
  m.connectivity_violations = ep.stage_one.connectivity_violations;
  // without a common lattice the maps cannot be merged; the run does not terminate
  if (!ep.stage_one.converged) return ep;

  std::vector<detail::Searcher> team;
  for (int i = 0; i < n; ++i) {
    detail::Searcher a{robots[i], Rng(derive_seed(seed, Stream::RobotBase, static_cast<std::uint64_t>(i))),
                       TopoMap(frame_of(ep.stage_one.states[i], sc.side)), {}, {}, 0.0, 0.0, 0, 0.0, true};
    a.current = nearest_vertex(a.map.frame(), a.s.pos);
    team.push_back(std::move(a));
  }
  ep.frame = team[0].map.frame();
  {
    std::vector<LatticeCoord> starts;
    for (const auto& a : team) starts.push_back(a.current);
    ep.ground_truth = reachable_vertices(sc.workspace, ep.frame, starts);
  }
  m.ground_truth_vertices = ep.ground_truth.size();
  std::set<LatticeCoord> visited_truth;
  auto arrive = [&](detail::Searcher& a, LatticeCoord c) {
    a.current = c;
    if (!visited_truth.insert(c).second) ++m.revisits;
    a.map.set_visited(c);
    a.map = detect_vertices(std::move(a.map), a.s.pos, sc.workspace, sc.sensor);
  };
  for (auto& a : team) arrive(a, a.current);
  m.revisits = 0;

  const auto* targets = std::get_if<Targets>(&sc.mission);
  const auto* patrol = std::get_if<Patrol>(&sc.mission);
  TargetLedger ledger(targets ? targets->positions.size() : 0);
  const bool keep_walking_random = targets || patrol;
  const bool keep_walking_semi = patrol != nullptr;
  const double cap_factor = sc.step_cap_factor.value_or(default_step_cap_factor(sc.policy));
  const double decision_cap = cap_factor * static_cast<double>(std::max<std::size_t>(m.ground_truth_vertices, 1));
  int next_reset = patrol && patrol->reset_period > 0 ? patrol->reset_period : std::numeric_limits<int>::max();
  std::map<std::pair<LatticeCoord, LatticeCoord>, bool> los_cache;
  std::vector<std::pair<int, int>> prev_edges;
  ConnectivityMonitor monitor(10);
  const long tick0 = tick;

  auto start_leg = [&](detail::Searcher& a) {
    a.leg_start = clock;
    a.leg_dist = distance(a.s.pos, a.map.point(a.leg()));
  };
  auto occupied_by_other = [&](std::size_t self, Vec2 p) {
    for (std::size_t j = 0; j < team.size(); ++j) {
      if (j != self && distance(team[j].s.pos, p) < 2.0 * sc.robot_radius) return true;
    }
    return false;
  };
  // a teammate inside the repulsion radius explains the overrun; no deletion
  auto crowded = [&](std::size_t self) {
    for (std::size_t j = 0; j < team.size(); ++j) {
      if (j != self && distance(team[j].s.pos, team[self].s.pos) < sc.avoid.r_robot) return true;
    }
    return false;
  };
  auto decide = [&](std::size_t i) {
    auto& a = team[i];
    std::optional<LatticeCoord> next;
    switch (sc.policy) {
      case Policy::Random: next = next_waypoint_random(a.map, a.current, a.rng, keep_walking_random); break;
      case Policy::SemiRandom: next = next_waypoint_semirandom(a.map, a.current, a.rng, keep_walking_semi); break;
      case Policy::Modified: next = next_waypoint_modified(a.map, a.s.pos); break;
    }
    if (!next) return;
    ++a.decisions;
    for (std::size_t j = 0; j < team.size(); ++j) {
      if (j != i && team[j].busy() && team[j].route.back() == *next) ++m.occupancy_conflicts;
    }
    if (sc.policy == Policy::Modified) {
      a.route = detail::map_route(sc.workspace, a.map, a.current, *next, los_cache, sc.robot_radius);
      if (a.route.empty()) a.route = {*next};
    } else {
      a.route = {*next};
    }
    start_leg(a);
  };
  auto all_done = [&]() {
    if (targets) return ledger.all_detected();
    if (patrol) return false;
    for (const auto& a : team) {
      if (a.busy() || a.map.unvisited_count() > 0) return false;
    }
    return true;
  };

  for (;;) {
    const double now = static_cast<double>(tick - tick0) * sc.dt;
    if (targets) {
      const auto pos = [&] {
        std::vector<Vec2> p;
        for (const auto& a : team) p.push_back(a.s.pos);
        return p;
      }();
      detect_targets(ledger, targets->positions, pos, sc.sensor.r_s, now);
    }
    if (all_done()) {
      m.terminated = true;
      break;
    }
    int max_dec = 0;
    for (const auto& a : team) max_dec = std::max(max_dec, a.decisions);
    if (max_dec > decision_cap || now > sc.max_time) break;
    if (max_dec >= next_reset) {
      for (auto& a : team) {
        a.map.reset_all_visited();
        a.map.clear_journal();
      }
      next_reset += patrol->reset_period;
    }

    for (std::size_t i = 0; i < team.size(); ++i) {
      if (!team[i].busy()) decide(i);
    }

    std::vector<RobotState> snapshot;
    for (const auto& a : team) snapshot.push_back(a.s);
    for (std::size_t i = 0; i < team.size(); ++i) {
      auto& a = team[i];
      if (!a.busy()) continue;
      const auto others = detail::others_of(snapshot, i);
      a.path += detail::drive(a.s, a.map.point(a.leg()), others, sc);
    }
    clock = static_cast<double>(++tick) * sc.dt;

    for (std::size_t i = 0; i < team.size(); ++i) {
      auto& a = team[i];
      if (!a.busy()) continue;
      const LatticeCoord leg = a.leg();
      const Vec2 lp = a.map.point(leg);
      if (distance(a.s.pos, lp) <= sc.nav.arrival_tol) {
        arrive(a, leg);
        a.route.erase(a.route.begin());
        if (a.busy()) {
          // continue toward a target that is still worth reaching, else re-plan
          if (a.map.state(a.route.back()) == VertexState::Detected) {
            start_leg(a);
          } else {
            a.route.clear();
          }
        }
      } else if (et_timeout(a.leg_start, clock, a.leg_dist, sc.limits.v_max, sc.nav)) {
        if (a.map.state(leg) == VertexState::Detected && !occupied_by_other(i, lp) && !crowded(i)) {
          a.map.erase(leg);
          ++m.deleted_vertices;
        } else {
          ++m.occupancy_conflicts;
        }
        a.route.clear();
      }
    }

    // map exchange over the current range graph
    std::vector<Vec2> pos;
    for (const auto& a : team) pos.push_back(a.s.pos);
    const CommGraph g = build_graph(pos, sc.r_c);
    if (tick % 10 == 0) monitor.push(g);
    for (auto e : g.edges) {
      if (!std::binary_search(prev_edges.begin(), prev_edges.end(), e)) {
        team[static_cast<std::size_t>(e.first)].send_full = true;
        team[static_cast<std::size_t>(e.second)].send_full = true;
      }
    }
    prev_edges = g.edges;
    std::vector<std::vector<MapPacket>> out(team.size());
    bool any = false;
    for (std::size_t i = 0; i < team.size(); ++i) {
      auto& a = team[i];
      if (a.send_full) {
        a.map.clear_journal();
        if (!g.adjacency[i].empty()) {
          out[i].push_back(a.map.full_packet(static_cast<int>(i)));
          any = true;
        }
        a.send_full = false;
      } else if (a.map.has_pending_changes()) {
        out[i].push_back(a.map.take_delta(static_cast<int>(i)));
        any = any || !g.adjacency[i].empty();
      }
    }
    if (any) {
      const auto inbox = flood_exchange(g, out);
      for (std::size_t i = 0; i < team.size(); ++i) {
        for (const auto& pkt : inbox[i]) team[i].map.absorb(pkt);
      }
    }

    if (traj && tick % sc.trajectory_stride == 0) {
      for (std::size_t i = 0; i < team.size(); ++i) {
        const auto& s = team[i].s;
        traj->push_back({clock, static_cast<int>(i), s.pos.x, s.pos.y, s.theta, team[i].busy() ? "search" : "idle"});
      }
    }
  }

  m.completion_time = static_cast<double>(tick - tick0) * sc.dt;
  for (const auto& a : team) {
    m.decisions = std::max(m.decisions, a.decisions);
    m.path_length.push_back(a.path);
    ep.maps.push_back(a.map);
  }
  std::size_t covered = 0;
  for (auto c : visited_truth) covered += ep.ground_truth.contains(c);
  m.visited_vertices = covered;
  m.connectivity_violations += monitor.violations();
  for (std::size_t j = 0; j < ledger.detected.size(); ++j) {
    m.target_times.push_back(ledger.detected[j] ? std::optional<double>(ledger.detect_time[j]) : std::nullopt);
  }
  return ep;
}

/// Decision-level walk of one robot placed exactly on lattice vertices: the
/// policy and map rules without continuous motion. Returns the number of
/// moves until the policy stops, or -1 past `cap`.
inline int discrete_cover_steps(const Workspace& w, const GridFrame& f, LatticeCoord start, Policy policy,
                                const SensorModel& sensor, Rng& rng, int cap = 1000000) {
  TopoMap map(f);
  LatticeCoord cur = start;
  auto visit = [&](LatticeCoord c) {
    cur = c;
    map.set_visited(c);
    map = detect_vertices(std::move(map), vertex_point(f, c), w, sensor);
  };
  visit(start);
  for (int steps = 0; steps <= cap; ++steps) {
    std::optional<LatticeCoord> next;
    switch (policy) {
      case Policy::Random: next = next_waypoint_random(map, cur, rng); break;
      case Policy::SemiRandom: next = next_waypoint_semirandom(map, cur, rng); break;
      case Policy::Modified: next = next_waypoint_modified(map, vertex_point(f, cur)); break;
    }
    if (!next) return steps;
    visit(*next);
  }
  return -1;
}

}  // namespace tricover
