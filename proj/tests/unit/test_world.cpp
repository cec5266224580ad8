#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tricover/rng.hpp"
#include "tricover/world.hpp"

using namespace tricover;

namespace {

Workspace l_arena() {
  return Workspace({{0, 0}, {30, 0}, {30, 12}, {22, 12}, {22, 22}, {0, 22}},
                   {{{6, 7}, {12, 7}, {12, 11}, {6, 11}}, {{15, 4}, {21, 4}, {18, 9}}}, 0.35);
}

// random star-shaped polygon around the origin
Polygon star(Rng& rng, int n) {
  Polygon p;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * kPi * (k + 0.5 * rng.uniform01()) / n;
    p.push_back(unit_from_angle(a) * rng.uniform(1.0, 4.0));
  }
  return p;
}

}  // namespace

TEST(Geometry, WrapAngleRange) {
  for (double a : {-10.0, -kPi, -1.0, 0.0, kPi, 3.5, 100.0}) {
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::cos(w), std::cos(a), 1e-12);
    EXPECT_NEAR(std::sin(w), std::sin(a), 1e-12);
    const double h = wrap_half_turn(a);
    EXPECT_GE(h, 0.0);
    EXPECT_LT(h, kPi);
  }
}

TEST(Geometry, WindingMatchesCrossingOnRandomStars) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Polygon poly = star(rng, 5 + static_cast<int>(rng.below(10)));
    for (int k = 0; k < 50; ++k) {
      const Vec2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
      EXPECT_EQ(point_in_polygon(poly, p), oracle::crossing_inside(poly, p));
    }
  }
}

TEST(Geometry, OnEdgeCountsInside) {
  const Polygon sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_TRUE(point_in_polygon(sq, {0.5, 0.0}));
  EXPECT_TRUE(point_in_polygon(sq, {1.0, 1.0}));
  EXPECT_FALSE(point_in_polygon(sq, {1.0 + 1e-6, 0.5}));
}

TEST(Geometry, OrientationDoesNotMatter) {
  Polygon cw{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  EXPECT_LT(signed_area2(cw), 0.0);
  EXPECT_GT(signed_area2(normalized_ccw(cw)), 0.0);
  EXPECT_TRUE(point_in_polygon(cw, {0.5, 0.5}));
  EXPECT_DOUBLE_EQ(area(cw), 1.0);
}

TEST(Workspace, FreeAreaOfLArena) {
  const Workspace w = l_arena();
  EXPECT_DOUBLE_EQ(w.free_area(), 580.0 - 24.0 - 15.0);
}

TEST(Workspace, ContainsFree) {
  const Workspace w = l_arena();
  EXPECT_TRUE(contains_free(w, {2, 2}));
  EXPECT_FALSE(contains_free(w, {9, 9}));     // inside the rectangle
  EXPECT_FALSE(contains_free(w, {26, 18}));   // the notch of the L
  EXPECT_FALSE(contains_free(w, {-1, 5}));
}

TEST(Workspace, RejectsBadGeometry) {
  EXPECT_THROW(Workspace({{0, 0}, {1, 0}}, {}, 0.0), std::invalid_argument);
  EXPECT_THROW(Workspace({{0, 0}, {2, 2}, {2, 0}, {0, 2}}, {}, 0.0), std::invalid_argument);  // bow tie
  EXPECT_THROW(Workspace({{0, 0}, {4, 0}, {4, 4}, {0, 4}}, {{{3, 3}, {5, 3}, {5, 5}}}, 0.0), std::invalid_argument);
  EXPECT_THROW(Workspace({{0, 0}, {4, 0}, {4, 4}, {0, 4}}, {}, -0.1), std::invalid_argument);
  EXPECT_THROW(Workspace({{0, 0}, {9, 0}, {9, 9}, {0, 9}},
                         {{{1, 1}, {4, 1}, {4, 4}, {1, 4}}, {{3, 3}, {6, 3}, {6, 6}, {3, 6}}}, 0.0),
               std::invalid_argument);
}

TEST(Workspace, ClearanceRequiresFreePoint) {
  const Workspace w = l_arena();
  EXPECT_DOUBLE_EQ(clearance(w, {2, 3}), 2.0);
  EXPECT_NEAR(clearance(w, {9, 5}), 2.0, 1e-12);
  EXPECT_THROW(clearance(w, {9, 9}), std::invalid_argument);
}

TEST(Workspace, RaycastHitsNearestEdge) {
  const Workspace w = l_arena();
  auto hit = raycast(w, Ray{{2, 9}, 0.0, 10.0});
  ASSERT_TRUE(hit);
  EXPECT_NEAR(*hit, 4.0, 1e-12);
  EXPECT_FALSE(raycast(w, Ray{{2, 9}, 0.0, 3.9}));
  EXPECT_THROW(raycast(w, Ray{{2, 9}, 0.0, 0.0}), std::invalid_argument);
  // straight down to the floor
  hit = raycast(w, Ray{{3, 3}, -kPi / 2.0, 5.0});
  ASSERT_TRUE(hit);
  EXPECT_NEAR(*hit, 3.0, 1e-12);
}

TEST(Workspace, LineOfSight) {
  const Workspace w = l_arena();
  EXPECT_TRUE(line_of_sight(w, {2, 2}, {5, 5}));
  EXPECT_FALSE(line_of_sight(w, {2, 9}, {14, 9}));
  EXPECT_FALSE(line_of_sight(w, {20, 15}, {28, 15}));  // across the notch
  EXPECT_TRUE(line_of_sight(w, {3, 3}, {3, 3}));
}

TEST(Workspace, RaycastAgreesWithBruteMarch) {
  const Workspace w = l_arena();
  Rng rng(5);
  for (int k = 0; k < 300; ++k) {
    const Vec2 o{rng.uniform(0.5, 21.5), rng.uniform(0.5, 21.5)};
    if (!contains_free(w, o)) continue;
    const double dir = rng.uniform(-kPi, kPi);
    const auto hit = raycast(w, Ray{o, dir, 40.0});
    ASSERT_TRUE(hit);
    // march until leaving free space
    double t = 0.0;
    while (contains_free(w, o + unit_from_angle(dir) * (t + 1e-3))) t += 1e-3;
    EXPECT_NEAR(*hit, t, 2e-3);
  }
}
