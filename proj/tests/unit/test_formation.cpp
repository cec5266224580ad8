#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tricover/formation.hpp"
#include "tricover/stats.hpp"

using namespace tricover;

namespace {

// long straight wall along y = 0, obstacle below
Workspace wall_world() {
  return Workspace({{-500, -500}, {500, -500}, {500, 500}, {-500, 500}}, {{{-100, -20}, {400, -20}, {400, 0}, {-100, 0}}},
                   0.0);
}

Polygon disk(Vec2 c, double r, int n) {
  Polygon p;
  for (int k = 0; k < n; ++k) p.push_back(c + unit_from_angle(2.0 * kPi * k / n) * r);
  return p;
}

Workspace disk_world(double R) { return Workspace({{-500, -500}, {500, -500}, {500, 500}, {-500, 500}}, {disk({0, 0}, R, 256)}, 0.0); }

double nearest_obstacle(const Workspace& w, Vec2 p) {
  double best = 1e300;
  for (const auto& e : w.obstacle_edges()) best = std::min(best, segment_distance(e.a, e.b, p));
  return best;
}

// runs boundary following and returns (min, max) obstacle distance after `settle` seconds
std::pair<double, double> follow(const Workspace& w, RobotState s, Side side, double seconds, double settle) {
  const AvoidParams p;
  const Limits lim = formation_limits();
  const PursuitOptions opt;
  double lo = 1e300, hi = 0.0;
  const int steps = static_cast<int>(seconds / opt.dt);
  for (int k = 0; k < steps; ++k) {
    const auto r = obstacle_readings(w, s, p.r_s);
    const Command c = boundary_follow(r, p, lim, side, opt);
    s = integrate(s, c.v, c.omega, opt.dt, lim);
    if (k * opt.dt >= settle) {
      const double d = nearest_obstacle(w, s.pos);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  return {lo, hi};
}

}  // namespace

TEST(Formation, EdgePresetShape) {
  const Configuration cfg = edge_preset(5);
  ASSERT_EQ(cfg.offsets.size(), 5u);
  EXPECT_EQ(cfg.offsets[0], (Vec2{0, 0}));
  for (std::size_t i = 1; i < 5; ++i) {
    const Vec2 o = cfg.offsets[i];
    EXPECT_LT(o.x, 0.0);                                  // arms trail the apex
    EXPECT_NEAR(std::abs(o.y), -o.x, 1e-12);              // 45 degrees
  }
  EXPECT_NEAR(distance(cfg.offsets[1], cfg.offsets[0]), 2.0, 1e-12);
  EXPECT_NEAR(distance(cfg.offsets[3], cfg.offsets[1]), 2.0, 1e-12);
}

TEST(Formation, LineAndArcPresets) {
  const Configuration line = line_preset(5);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_NEAR(distance(line.offsets[i], line.offsets[i - 1]), 2.0, 1e-12);
  const Configuration arc = arc_preset(5);
  for (const auto& o : arc.offsets) EXPECT_NEAR(distance(o, {5.0, 0.0}), 5.0, 1e-12);
  EXPECT_NEAR(arc.offsets[2].x, 0.0, 1e-12);  // middle trails, ends lead
  EXPECT_GT(arc.offsets[0].x, 0.0);
  EXPECT_THROW(preset("star", 5), std::invalid_argument);
  EXPECT_THROW(edge_preset(0), std::invalid_argument);
}

TEST(Formation, LookAheadMustExceedTurnDiameter) {
  Configuration cfg = edge_preset(3);
  EXPECT_NO_THROW(validate(cfg, formation_limits()));
  cfg.c = 1.5;
  EXPECT_THROW(validate(cfg, formation_limits()), std::invalid_argument);
}

TEST(Formation, ConsensusSpreadsDecayGeometrically) {
  Rng rng(31);
  const int n = 5;
  std::vector<Vec2> pos;
  std::vector<FormationConsensus> fc;
  for (int i = 0; i < n; ++i) {
    pos.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
    fc.push_back({rng.uniform(0, kPi), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.2, 1.5)});
  }
  // path graph; robots drift so positions change every step
  std::vector<double> k, log_th, log_x;
  for (int step = 0; step < 60; ++step) {
    double th_lo = 1e9, th_hi = -1e9, x_lo = 1e9, x_hi = -1e9;
    for (int i = 0; i < n; ++i) {
      th_lo = std::min(th_lo, fc[i].theta_t);
      th_hi = std::max(th_hi, fc[i].theta_t);
      x_lo = std::min(x_lo, pos[i].x + fc[i].x_t);
      x_hi = std::max(x_hi, pos[i].x + fc[i].x_t);
    }
    k.push_back(step);
    log_th.push_back(std::log(th_hi - th_lo));
    log_x.push_back(std::log(x_hi - x_lo));
    std::vector<Vec2> next_pos(pos);
    for (auto& p : next_pos) p += Vec2{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)};
    std::vector<FormationConsensus> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<FormationPeer> peers;
      if (i > 0) peers.push_back({pos[i - 1], fc[i - 1]});
      if (i + 1 < n) peers.push_back({pos[i + 1], fc[i + 1]});
      next[i] = formation_consensus_update(fc[i], pos[i], next_pos[i], peers);
    }
    pos = next_pos;
    fc = next;
  }
  for (const auto& y : {log_th, log_x}) {
    const LinearFit fit = linear_fit(k, y);
    EXPECT_LT(fit.slope, 0.0);
    EXPECT_GT(fit.r2, 0.9);
  }
}

TEST(Formation, OriginEstimateFollowsOwnMotion) {
  // alone, the shared origin stays put in the world while the robot moves
  const FormationConsensus fc{0.0, 3.0, -1.0, 1.0};
  const auto out = formation_consensus_update(fc, {1, 1}, {1.5, 1.2}, {});
  EXPECT_NEAR(1.5 + out.x_t, 4.0, 1e-12);
  EXPECT_NEAR(1.2 + out.y_t, 0.0, 1e-12);
}

TEST(Formation, FictitiousTargetLeadsTheSlot) {
  const Configuration cfg = edge_preset(3);
  const FormationConsensus fc{0.0, 0.0, 0.0, 1.0};
  const RobotState behind{{-5, 0}, 0.0, 1.0, 0.0};
  auto ft = fictitious_target(behind, fc, cfg, 0, 0.0);
  EXPECT_TRUE(ft.behind);
  EXPECT_NEAR(ft.g.x, -5.0 + 0.0 + cfg.c, 1e-12);  // h + c, with origin at the robot itself
  const RobotState ahead{{2, 0}, 0.0, 1.0, 0.0};
  const FormationConsensus fc2{0.0, -4.0, 0.0, 1.0};
  ft = fictitious_target(ahead, fc2, cfg, 0, 0.0);
  EXPECT_FALSE(ft.behind);
  EXPECT_NEAR(ft.g.x, 2.0 + cfg.c, 1e-12);
  EXPECT_THROW(fictitious_target(ahead, fc, cfg, 7, 0.0), std::invalid_argument);
}

TEST(Formation, ControlRespectsLimits) {
  const Limits lim = formation_limits();
  Rng rng(2);
  for (int k = 0; k < 500; ++k) {
    const RobotState s{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(-kPi, kPi), 1.0, 0.0};
    const FictitiousTarget t{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(-5, 5), rng.uniform(-5, 5), true};
    const FormationConsensus fc{0.0, 0.0, 0.0, rng.uniform(0.2, 1.5)};
    for (bool ideal : {false, true}) {
      const Command c = formation_control(s, t, fc, lim, PursuitOptions{0.1, 0.02, ideal});
      EXPECT_LE(std::abs(c.omega), lim.omega_max);
      EXPECT_GE(c.v, lim.v_min);
      EXPECT_LE(c.v, lim.v_max);
      if (ideal) {
        EXPECT_TRUE(c.v == lim.v_min || c.v == lim.v_max);
      }
    }
  }
}

TEST(Formation, DeadbandZeroesSmallHeadingError) {
  const RobotState s{{0, 0}, 0.0, 1.0, 0.0};
  const FictitiousTarget t{{10, 0.1}, 0.0, 0.0, true};
  EXPECT_EQ(formation_control(s, t, {}, formation_limits()).omega, 0.0);
  EXPECT_GT(formation_control(s, t, {}, formation_limits(), PursuitOptions{0.1, 0.02, true}).omega, 0.0);
}

TEST(Formation, SingleRobotSettlesOnItsSlot) {
  const Configuration cfg = edge_preset(1);
  const Limits lim = formation_limits();
  FormationConsensus fc{0.3, 4.0, -2.0, 0.8};
  RobotState s{{0, 0}, 2.5, 0.5, 0.0};
  const Vec2 origin0 = s.pos + fc.offset();
  const double dt = 0.1;
  for (int k = 0; k < 1200; ++k) {
    const double t = k * dt;
    const auto ft = fictitious_target(s, fc, cfg, 0, t);
    const Command c = formation_control(s, ft, fc, lim);
    const RobotState n = integrate(s, c.v, c.omega, dt, lim);
    fc = formation_consensus_update(fc, s.pos, n.pos, {});
    s = n;
  }
  const Vec2 want = origin0 + unit_from_angle(0.3) * (0.8 * 120.0);
  EXPECT_LT(distance(s.pos, want), 0.1);
  EXPECT_LT(std::abs(wrap_angle(s.theta - 0.3)), 0.05);
}

TEST(Formation, SlotGraphOfPresetsIsConnected) {
  for (const char* name : {"edge", "line", "arc"}) {
    EXPECT_TRUE(slot_graph_connected(slot_graph(preset(name, 5), 8.0, 0.5))) << name;
  }
  EXPECT_FALSE(slot_graph_connected(slot_graph(line_preset(5, 10.0), 8.0, 0.5)));
}

TEST(Formation, ReassignKeepsAFreeSlot) {
  const Configuration cfg = line_preset(3);
  const FormationConsensus fc{0.0, 0.0, 2.0, 0.0};  // origin = pos + (0, 2)
  // robot 0 sits on slot 0 at (0, 0); slot 0 offset is (0, -2)
  const std::vector<Vec2> poses{{0, 0}, {0, 4}};
  Rng rng(1);
  const AnonymousState st{0, 20, 8.0, 0.5};
  EXPECT_EQ(anonymous_reassign(st, 0, poses, fc, cfg, 0.0, rng).r_idx, 0);
}

TEST(Formation, ReassignMovesOffAContestedSlot) {
  const Configuration cfg = line_preset(3);
  // both robots at the middle slot's world point (0, 0); slot offsets (0,-2), (0,0), (0,2)
  const FormationConsensus fc{0.0, 0.0, 0.0, 0.0};
  const std::vector<Vec2> poses{{0, 0}, {0.1, 0}};
  Rng rng(3);
  int moved = 0;
  for (int k = 0; k < 300; ++k) {
    const auto out = anonymous_reassign(AnonymousState{1, 20, 8.0, 0.5}, 0, poses, fc, cfg, 0.0, rng);
    EXPECT_TRUE(out.r_idx >= 0 && out.r_idx <= 2);
    moved += out.r_idx != 1;
  }
  EXPECT_NEAR(moved / 300.0, 2.0 / 3.0, 0.1);  // uniform over the own slot and two vacant neighbours
}

TEST(Formation, AnonymousValidation) {
  EXPECT_THROW(validate(AnonymousState{0, 20, 8.0, 4.0}, 5), std::invalid_argument);
  EXPECT_THROW(validate(AnonymousState{0, 0, 8.0, 0.5}, 5), std::invalid_argument);
  EXPECT_THROW(validate(AnonymousState{5, 20, 8.0, 0.5}, 5), std::invalid_argument);
  EXPECT_NO_THROW(validate(AnonymousState{4, 20, 8.0, 0.5}, 5));
}

TEST(Formation, AvoidParamsValidation) {
  const Limits lim = formation_limits();
  EXPECT_NO_THROW(validate(AvoidParams{}, lim));
  EXPECT_THROW(validate(AvoidParams{1.2, kPi / 6.0, 2.0}, lim), std::invalid_argument);
  EXPECT_THROW(validate(avoid_params(1.4, kPi / 6.0), lim), std::invalid_argument);  // 1.4 - 0.75 < 0.7
  EXPECT_NEAR(avoid_params(2.0, kPi / 6.0).d0, 1.0, 1e-12);
}

TEST(Formation, ReadingsOfAWall) {
  const Workspace w = wall_world();
  const RobotState s{{0, 1}, 0.0, 1.0, 0.0};
  const auto r = obstacle_readings(w, s, 2.0);
  ASSERT_FALSE(r.empty());
  EXPECT_EQ(obstacle_side(r), Side::Right);
  // the forward circle crossing at (sqrt(3), 0) is 30 degrees right of the heading
  const auto phi = avoiding_angle(r, Side::Right);
  ASSERT_TRUE(phi);
  EXPECT_NEAR(*phi, kPi / 6.0, 1e-9);
  EXPECT_TRUE(obstacle_readings(w, RobotState{{0, 5}, 0.0, 1.0, 0.0}, 2.0).empty());
}

TEST(Formation, WallStandoffSettlesAtD0) {
  const auto [lo, hi] = follow(wall_world(), RobotState{{0, 1.6}, 0.0, 1.5, 0.0}, Side::Right, 60.0, 15.0);
  EXPECT_NEAR(lo, 1.0, 0.02);
  EXPECT_NEAR(hi, 1.0, 0.02);
}

TEST(Formation, CircleStandoffMatchesClosedForm) {
  // steady state on a disk of radius R: the sensed point at range r_s sits phi
  // off the heading, so the distance to the centre is
  //   D = r_s sin(phi) + sqrt(R^2 - r_s^2 cos^2(phi)).
  // Explicit Euler moves along the heading chosen one step earlier, and the
  // chord leads the tangent by half a step, so the geometric phi exceeds phi0
  // by 1.5 step angles (v dt / D each).
  const double rs = 2.0, phi0 = kPi / 6.0, step = 1.5 * 0.1;
  for (double R : {6.0, 10.0, 20.0}) {
    const Workspace w = disk_world(R);
    double D = R + 1.0;
    for (int it = 0; it < 50; ++it) {
      const double phi = phi0 + 1.5 * step / D;
      D = rs * std::sin(phi) + std::sqrt(R * R - rs * rs * std::cos(phi) * std::cos(phi));
    }
    const double expect = D - R * std::cos(kPi / 256.0);  // distance to the inscribed polygon
    const auto [lo, hi] = follow(w, RobotState{{R + 1.2, 0}, kPi / 2.0, 1.5, 0.0}, Side::Left, 60.0, 20.0);
    EXPECT_NEAR(lo, expect, 0.01) << "R=" << R;
    EXPECT_NEAR(hi, expect, 0.01) << "R=" << R;
  }
}

TEST(Formation, ArbiterHysteresis) {
  ArbiterState st;
  st = mode_arbiter(st, false, 5);
  EXPECT_EQ(st.mode, Mode::FormationPursuit);
  st = mode_arbiter(st, true, 5);
  EXPECT_EQ(st.mode, Mode::BoundaryFollow);
  for (int k = 0; k < 4; ++k) {
    st = mode_arbiter(st, false, 5);
    EXPECT_EQ(st.mode, Mode::BoundaryFollow);
  }
  st = mode_arbiter(st, true, 5);  // a threat resets the count
  for (int k = 0; k < 4; ++k) st = mode_arbiter(st, false, 5);
  EXPECT_EQ(st.mode, Mode::BoundaryFollow);
  st = mode_arbiter(st, false, 5);
  EXPECT_EQ(st.mode, Mode::FormationPursuit);
  EXPECT_EQ(to_string(Mode::BoundaryFollow), "boundary");
}

TEST(Formation, ConeBlocked) {
  const Workspace w = wall_world();
  EXPECT_TRUE(cone_blocked(w, {0, 1}, -kPi / 2.0, 2.0, 0.4));
  EXPECT_FALSE(cone_blocked(w, {0, 1}, kPi / 2.0, 2.0, 0.4));
  EXPECT_FALSE(cone_blocked(w, {0, 3}, -kPi / 2.0, 2.0, 0.4));
  EXPECT_FALSE(cone_blocked(w, {0, 1}, 0.0, 2.0, 0.4));  // parallel to the wall
}
