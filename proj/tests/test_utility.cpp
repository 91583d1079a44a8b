#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "trafficgame/utility.hpp"

using namespace trafficgame;

namespace {

const AgentUtilitySpec kSpec{};
const oracle::Params kOracle{};

PeriodContext lone(double x, double y, double v) {
  PeriodContext c;
  c.own_state = VehicleState{x, y, 0.0, v};
  return c;
}

}  // namespace

TEST(Phi1, PeakAndZeros) {
  EXPECT_EQ(phi1_forward(kSpec, 31.0), 1.0);
  EXPECT_EQ(phi1_forward(kSpec, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(phi1_forward(kSpec, 15.5), 0.75);
}

TEST(Phi2Phi3, SquaredDifferences) {
  EXPECT_EQ(phi2_accel_smooth(2, 0), 4.0);
  EXPECT_EQ(phi2_accel_smooth(0.7, 0.7), 0.0);
  EXPECT_EQ(phi2_accel_smooth(-1, 2), 9.0);
  EXPECT_EQ(phi3_steer_smooth(-1, 2), 9.0);
  EXPECT_EQ(phi3_steer_smooth(3, 3), 0.0);
}

TEST(Phi4, KneeInteriorAndLinearRegime) {
  EXPECT_NEAR(phi4_hard_accel(kSpec, 4.0), std::log(2.0), 1e-15);
  EXPECT_LT(phi4_hard_accel(kSpec, 0.0), 1e-25);
  EXPECT_NEAR(phi4_hard_accel(kSpec, 5.0), 15.000000305902274, 1e-12);
}

TEST(Phi4, FiniteForHugeArguments) {
  EXPECT_TRUE(std::isfinite(phi4_hard_accel(kSpec, 1e6)));
  EXPECT_TRUE(std::isfinite(phi4_hard_accel(kSpec, -1e6)));
}

TEST(Phi5, LaneCentresMidlineAndCap) {
  EXPECT_NEAR(phi5_lane_departure(kSpec, 1.85), 0.0, 1e-15);
  EXPECT_NEAR(phi5_lane_departure(kSpec, -1.85), 0.0, 1e-15);
  EXPECT_NEAR(phi5_lane_departure(kSpec, 0.0), 1.0 / 12.0, 1e-15);
  EXPECT_EQ(phi5_lane_departure(kSpec, 5.0), 1.0);
}

TEST(Phi6, EdgeCentreAndSaturation) {
  EXPECT_DOUBLE_EQ(phi6_out_of_road(kSpec, 4.7), 0.5);
  EXPECT_DOUBLE_EQ(phi6_out_of_road(kSpec, -4.7), 0.5);
  EXPECT_NEAR(phi6_out_of_road(kSpec, 0.0), 7.523977331136466e-07, 1e-18);
  EXPECT_NEAR(phi6_out_of_road(kSpec, 1e4), 1.0, 1e-15);
}

TEST(Phi7, Examples) {
  EXPECT_NEAR(phi7_crash(kSpec, -5.0, 1.0), 0.25, 1e-15);
  EXPECT_NEAR(phi7_crash(kSpec, 0.0, 0.0), 0.9999546000702375, 1e-14);
  EXPECT_LT(phi7_crash(kSpec, -100.0, -1.85), 1e-12);
}

TEST(Phi7, FollowsBarrierPosition) {
  AgentUtilitySpec moved = kSpec;
  moved.params.barrier_x = 40.0;
  EXPECT_NEAR(phi7_crash(moved, 35.0, 1.0), 0.25, 1e-15);
}

TEST(Phi8, Examples) {
  EXPECT_NEAR(phi8_collision(kSpec, 0.0, 0.0), 0.9866142680991995, 1e-12);
  EXPECT_LT(phi8_collision(kSpec, 100.0, 0.0), 1e-15);
}

TEST(PeriodUtility, LoneVehicleAtSpeedLimit) {
  // 1 - 24 S(-8.55) with the remaining tails below 1e-25
  EXPECT_NEAR(period_utility(kSpec, lone(-500, 1.85, 31)), 0.9953558164695695, 1e-13);
}

TEST(PeriodUtility, OnlyForwardWeight) {
  AgentUtilitySpec s = kSpec;
  s.weights.w = {1, 0, 0, 0, 0, 0, 0, 0};
  PeriodContext c = lone(-3, 0.4, 22);
  c.own_action = {2.0, 0.05};
  EXPECT_EQ(period_utility(s, c), phi1_forward(s, 22));
}

TEST(PeriodUtility, CoincidentVehiclesCarryCollisionTerm) {
  PeriodContext with = lone(-500, 1.85, 31);
  with.others.push_back(with.own_state);
  const double without = period_utility(kSpec, lone(-500, 1.85, 31));
  EXPECT_NEAR(period_utility(kSpec, with) - without, -14.0 * 0.9866142680991995, 1e-10);
}

TEST(PeriodUtility, MatchesScalarOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-60, 20), y(-5, 5), v(0, 40), a(-7, 6),
      d(-0.2, 0.2);
  for (int i = 0; i < 300; ++i) {
    PeriodContext c;
    c.own_state = VehicleState{x(rng), y(rng), d(rng), v(rng)};
    c.own_action = {a(rng), d(rng)};
    c.prev_action = {a(rng), d(rng)};
    c.others = {VehicleState{x(rng), y(rng), 0, v(rng)}, VehicleState{x(rng), y(rng), 0, v(rng)}};
    oracle::Period p{{c.own_state.x, c.own_state.y, c.own_state.heading_psi, c.own_state.speed_v},
                     c.own_action.accel_alpha, c.own_action.steer_delta,
                     c.prev_action.accel_alpha, c.prev_action.steer_delta, {}};
    for (const auto& o : c.others) p.others.push_back({o.x, o.y, o.heading_psi, o.speed_v});
    const auto f = period_features(kSpec, c);
    const auto g = oracle::features(kOracle, p);
    for (int k = 0; k < 8; ++k) ASSERT_NEAR(f[k], g[k], 1e-9 * std::max(1.0, std::abs(g[k]))) << k;
    ASSERT_NEAR(period_utility(kSpec, c), oracle::utility(kOracle, p), 1e-9);
  }
}

TEST(FeatureProperty, RangesAndSymmetry) {
  std::mt19937_64 rng(17);
  // x stays where the crash sigmoids are not rounded to exactly 1
  std::uniform_real_distribution<double> y(-8, 8), x(-40, 8), v(0, 60), a(-9, 9);
  for (int i = 0; i < 2000; ++i) {
    const double yy = y(rng), xx = x(rng), vv = v(rng), aa = a(rng);
    const double dx = x(rng), dy = y(rng);
    EXPECT_LE(phi1_forward(kSpec, vv), 1.0);
    EXPECT_GE(phi2_accel_smooth(aa, a(rng)), 0.0);
    EXPECT_GT(phi4_hard_accel(kSpec, aa), 0.0);
    const double p5 = phi5_lane_departure(kSpec, yy);
    EXPECT_GE(p5, 0.0);
    EXPECT_LE(p5, 1.0);
    const double p6 = phi6_out_of_road(kSpec, yy);
    EXPECT_GT(p6, 0.0);
    EXPECT_LT(p6, 1.0);
    const double p7 = phi7_crash(kSpec, xx, yy);
    EXPECT_GT(p7, 0.0);
    EXPECT_LT(p7, 1.0);
    const double p8 = phi8_collision(kSpec, dx, dy);
    EXPECT_GE(p8, 0.0);
    EXPECT_LT(p8, 1.0);
    EXPECT_EQ(p5, phi5_lane_departure(kSpec, -yy));
    EXPECT_EQ(p6, phi6_out_of_road(kSpec, -yy));
    EXPECT_DOUBLE_EQ(p8, phi8_collision(kSpec, -dx, -dy));
  }
  EXPECT_LT(phi1_forward(kSpec, 30.999), 1.0);
}

TEST(FeatureProperty, CollisionDecreasesWithDistance) {
  for (double dy : {0.0, 1.0, 3.0, 6.0}) {
    double prev = phi8_collision(kSpec, 0.0, dy);
    for (double dx = 0.5; dx <= 50.0; dx += 0.5) {
      const double cur = phi8_collision(kSpec, dx, dy);
      if (prev < 1e-300) break;
      EXPECT_LE(cur, prev) << dx << " " << dy;
      prev = cur;
    }
  }
  for (double dx : {0.0, 4.0, 12.0}) {
    double prev = phi8_collision(kSpec, dx, 0.0);
    for (double dy = 0.25; dy <= 10.0; dy += 0.25) {
      const double cur = phi8_collision(kSpec, dx, dy);
      if (prev < 1e-300) break;
      EXPECT_LE(cur, prev) << dx << " " << dy;
      prev = cur;
    }
  }
}

namespace {

struct Case {
  VehicleState s0{-60, -1.85, 0, 30};
  std::vector<ActionPair> actions;
  std::vector<Trajectory> others;
};

Case merge_case(int T) {
  Case c;
  for (int t = 0; t < T; ++t) {
    c.actions.push_back({1.0 - 0.1 * t, deg_to_rad(0.4 * std::sin(0.3 * t))});
  }
  std::vector<ActionPair> theirs(T, ActionPair{-0.5, 0.0});
  c.others.push_back(rollout(VehicleGeometry{}, {-62, 1.85, 0, 31}, theirs, 0.2));
  return c;
}

}  // namespace

TEST(CumulativeUtility, SingleStepEqualsPeriodUtility) {
  Case c = merge_case(1);
  PeriodContext ctx;
  ctx.own_state = c.s0;
  ctx.own_action = c.actions[0];
  ctx.others = {c.others[0].states[0]};
  EXPECT_DOUBLE_EQ(cumulative_utility(kSpec, c.s0, c.actions, c.others, 0.2),
                   period_utility(kSpec, ctx));
}

TEST(CumulativeUtility, LinearInWeights) {
  Case c = merge_case(12);
  AgentUtilitySpec doubled = kSpec;
  for (double& w : doubled.weights.w) w *= 2;
  EXPECT_NEAR(cumulative_utility(doubled, c.s0, c.actions, c.others, 0.2),
              2 * cumulative_utility(kSpec, c.s0, c.actions, c.others, 0.2), 1e-10);
}

TEST(CumulativeUtility, RejectsLengthMismatch) {
  Case c = merge_case(12);
  c.actions.pop_back();
  EXPECT_THROW(cumulative_utility(kSpec, c.s0, c.actions, c.others, 0.2),
               std::invalid_argument);
}

TEST(CumulativeUtility, GradientMatchesCentralDifferences) {
  Case c = merge_case(20);
  std::vector<double> grad;
  const double u = cumulative_utility_gradient(kSpec, c.s0, c.actions, c.others, 0.2, grad);
  EXPECT_DOUBLE_EQ(u, cumulative_utility(kSpec, c.s0, c.actions, c.others, 0.2));
  ASSERT_EQ(grad.size(), 40u);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double h = i % 2 == 0 ? 1e-5 : 1e-7;
    auto up = c.actions, dn = c.actions;
    (i % 2 == 0 ? up[i / 2].accel_alpha : up[i / 2].steer_delta) += h;
    (i % 2 == 0 ? dn[i / 2].accel_alpha : dn[i / 2].steer_delta) -= h;
    const double fd = (cumulative_utility(kSpec, c.s0, up, c.others, 0.2) -
                       cumulative_utility(kSpec, c.s0, dn, c.others, 0.2)) /
                      (2 * h);
    EXPECT_NEAR(grad[i], fd, 1e-4 * std::max(1.0, std::abs(fd))) << i;
  }
}

TEST(CumulativeUtilityProperty, CentralDifferencesConvergeAtSecondOrder) {
  Case c = merge_case(20);
  std::vector<double> grad;
  cumulative_utility_gradient(kSpec, c.s0, c.actions, c.others, 0.2, grad);
  for (std::size_t i : {0u, 6u, 11u, 21u}) {
    // Steering coordinates are probed in degrees so both axes share the
    // step range.
    const double unit = i % 2 == 0 ? 1.0 : kPi / 180.0;
    auto diff = [&](double h) {
      auto up = c.actions, dn = c.actions;
      (i % 2 == 0 ? up[i / 2].accel_alpha : up[i / 2].steer_delta) += h * unit;
      (i % 2 == 0 ? dn[i / 2].accel_alpha : dn[i / 2].steer_delta) -= h * unit;
      return (cumulative_utility(kSpec, c.s0, up, c.others, 0.2) -
              cumulative_utility(kSpec, c.s0, dn, c.others, 0.2)) /
             (2 * h);
    };
    const double d1 = diff(1e-2), d2 = diff(5e-3), d3 = diff(2.5e-3);
    const double ratio = (d1 - d2) / (d2 - d3);
    EXPECT_NEAR(ratio, 4.0, 0.8) << "coordinate " << i;
    EXPECT_NEAR(diff(1e-4), grad[i] * unit, 1e-6 * std::max(1.0, std::abs(grad[i] * unit)));
  }
}
