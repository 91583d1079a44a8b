#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "trafficgame/anticipation.hpp"

using namespace trafficgame;

namespace {

const AnticipationConfig kCfg{};
const VehicleGeometry kCar{};

RoadLayout two_lanes(bool barrier = true) {
  RoadLayout r;
  r.lane_centers = {-1.85, 1.85};
  if (barrier) r.barrier = Barrier{0.0, -1.85};
  return r;
}

LookAhead look(int h = 15, bool barrier = true) {
  LookAhead l;
  l.config.horizon_h = h;
  l.road = two_lanes(barrier);
  return l;
}

AgentUtilitySpec spec_with_lx(double lx) {
  AgentUtilitySpec s;
  s.params.crash_lx = lx;
  return s;
}

}  // namespace

TEST(StanleyHeading, Examples) {
  EXPECT_EQ(stanley_heading(kCfg, 0.0, 31.0), 0.0);
  EXPECT_NEAR(stanley_heading(kCfg, 1.85, 31.0), 0.049016239844149115, 1e-15);
  EXPECT_LT(stanley_heading(kCfg, 1.85, 1e12), 1e-6);
  EXPECT_LT(stanley_heading(kCfg, -1.0, 20.0), 0.0);
}

TEST(StanleySteering, SaturatesAndWraps) {
  const VehicleState s{0, 0, 2 * kPi + 0.01, 31};
  // heading 2 pi + 0.01 is 0.01 rad left of the road
  EXPECT_NEAR(stanley_steering(kCfg, s, 0.0), -0.5 * 0.01, 1e-12);
  const VehicleState far{0, -100, 0, 0};
  EXPECT_EQ(stanley_steering(kCfg, far, 1.85), kCfg.stanley_max_steer);
}

TEST(PersistenceSteps, CeilingOfFraction) {
  EXPECT_EQ(kCfg.persistence_steps(), 5);
  AnticipationConfig c;
  c.horizon_h = 1;
  EXPECT_EQ(c.persistence_steps(), 1);
  c.horizon_h = 16;
  EXPECT_EQ(c.persistence_steps(), 6);
}

TEST(Config, ValidationRejectsBadValues) {
  AnticipationConfig c;
  c.horizon_h = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.persistence_fraction = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.stanley_kappa = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(CrossingTarget, ThresholdAndDirection) {
  const RoadLayout road = two_lanes();
  EXPECT_FALSE(crossing_target(kCfg, road, -1.85, -1.4));
  EXPECT_EQ(crossing_target(kCfg, road, -1.85, -1.3), 1.85);
  EXPECT_FALSE(crossing_target(kCfg, road, -1.85, -2.5));  // no lane further right
  EXPECT_EQ(crossing_target(kCfg, road, 1.85, 1.0), -1.85);
}

TEST(OriginLane, SwitchesOnlyOnceSettled) {
  const RoadLayout road = two_lanes();
  EXPECT_EQ(update_origin_lane(kCfg, road, -1.85, {0, 1.5, 0.0, 31}), -1.85);
  EXPECT_EQ(update_origin_lane(kCfg, road, -1.85, {0, 1.8, 0.02, 31}), -1.85);
  EXPECT_EQ(update_origin_lane(kCfg, road, -1.85, {0, 1.8, 0.001, 31}), 1.85);
}

TEST(AnticipateOther, KeepLaneIsStraight) {
  const PathScenario p =
      anticipate_other(kCfg, kCar, 2, {-80, -1.85, 0, 31}, Intent::keep_lane(), 0.2);
  ASSERT_EQ(p.anticipated_states.size(), 15u);
  for (const auto& s : p.anticipated_states) EXPECT_EQ(s.y, -1.85);
  EXPECT_NEAR(p.anticipated_states.back().x, -80 + 15 * 6.2, 1e-9);
}

TEST(AnticipateOther, ChangeLaneMovesMonotonicallyTowardTarget) {
  const PathScenario p = anticipate_other(kCfg, kCar, 2, {-80, -1.85, 0, 31},
                                          Intent::change_to_lane(1.85), 0.2);
  ASSERT_EQ(p.anticipated_states.size(), 15u);
  double prev = -1.85;
  for (const auto& s : p.anticipated_states) {
    EXPECT_GE(s.y, prev);
    prev = s.y;
  }
  EXPECT_GT(prev, -1.85);
  EXPECT_LT(prev, 1.85 + 0.3);
  // Independent re-rollout of the prescribed actions reproduces the states.
  VehicleState cur{-80, -1.85, 0, 31};
  for (std::size_t k = 0; k < 15; ++k) {
    cur = step(kCar, cur, p.prescribed_actions[k], 0.2);
    EXPECT_EQ(cur, p.anticipated_states[k]);
  }
}

TEST(AnticipateOther, AlreadyOnStanleyHeadingNeedsNoSteer) {
  const double psi_star = stanley_heading(kCfg, 1.85 - 0.3, 31.0);
  const PathScenario p = anticipate_other(kCfg, kCar, 2, {0, 0.3, psi_star, 31},
                                          Intent::change_to_lane(1.85), 0.2);
  EXPECT_NEAR(p.prescribed_actions.front().steer_delta, 0.0, 1e-15);
}

TEST(AnticipateSelf, ZeroCandidateInLaneIsStraight) {
  const PathScenario p = anticipate_self(kCfg, kCar, two_lanes(), 1, 1.85,
                                         {-50, 1.85, 0, 31}, {0, 0}, 0.2);
  ASSERT_EQ(p.anticipated_states.size(), 15u);
  for (const auto& s : p.anticipated_states) EXPECT_EQ(s.y, 1.85);
}

TEST(AnticipateSelf, CandidatePersistsForFirstSteps) {
  const ActionPair cand{1.0, deg_to_rad(3.0)};
  const PathScenario p = anticipate_self(kCfg, kCar, two_lanes(), 1, -1.85,
                                         {-80, -1.85, 0, 31}, cand, 0.2);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(p.prescribed_actions[k], cand);
  EXPECT_NE(p.prescribed_actions[5].steer_delta, cand.steer_delta);
}

TEST(AnticipateSelf, CrossingCandidateCurvesTowardNewLane) {
  const ActionPair cand{2.0, deg_to_rad(3.0)};
  const PathScenario p = anticipate_self(kCfg, kCar, two_lanes(), 1, -1.85,
                                         {-80, -1.85, 0, 31}, cand, 0.2);
  EXPECT_EQ(p.intent, Intent::change_to_lane(1.85));
  EXPECT_GT(p.anticipated_states.back().y, 0.0);
  // After the persistence window the heading is pulled back toward the road.
  const auto& s = p.anticipated_states;
  EXPECT_LT(std::abs(s.back().heading_psi), s[4].heading_psi);
  EXPECT_LT(p.prescribed_actions[5].steer_delta, 0.0);
  for (std::size_t k = 5; k < 15; ++k) {
    EXPECT_EQ(p.prescribed_actions[k].accel_alpha, 2.0);
  }
}

TEST(AnticipateSelf, NoCrossingKeepsCandidate) {
  const ActionPair cand{0.5, deg_to_rad(0.01)};
  const PathScenario p = anticipate_self(kCfg, kCar, two_lanes(), 1, -1.85,
                                         {-80, -1.85, 0, 31}, cand, 0.2);
  for (const auto& a : p.prescribed_actions) EXPECT_EQ(a, cand);
  EXPECT_EQ(p.intent, Intent::keep_lane());
}

TEST(EnumerateScenarios, BlockedLaneAddsChangeLane) {
  const LookAhead l = look();
  const auto near = enumerate_scenarios(l, spec_with_lx(10), kCar, 2, -1.85,
                                        {-80, -1.85, 0, 31});
  ASSERT_EQ(near.size(), 2u);
  EXPECT_EQ(near[1].intent, Intent::change_to_lane(1.85));
  const auto open = enumerate_scenarios(l, spec_with_lx(10), kCar, 2, 1.85,
                                        {-80, 1.85, 0, 31});
  EXPECT_EQ(open.size(), 1u);
  const auto far = enumerate_scenarios(l, spec_with_lx(10), kCar, 2, -1.85,
                                       {-500, -1.85, 0, 31});
  EXPECT_EQ(far.size(), 1u);
}

TEST(EffectiveUtility, LoneVehicleIsMeanForwardReward) {
  const LookAhead l = look(15, false);
  AgentUtilitySpec s;
  s.weights.w[6] = 0;
  const double u = effective_utility(s, l, 1, 1.85, {-500, 1.85, 0, 31}, {}, {0, 0}, {});
  EXPECT_NEAR(u, 1.0 - 24.0 * 0.00019350764710127037, 1e-12);
}

TEST(EffectiveUtility, HorizonOneEqualsPeriodUtilityOfAnticipatedStep) {
  const LookAhead l = look(1);
  const AgentUtilitySpec s;
  const VehicleState me{-30, -1.5, 0.01, 28};
  const ActionPair prev{0.5, 0.002}, cand{1.0, 0.01};
  const std::vector<std::vector<PathScenario>> sets{
      {anticipate_other(l.config, kCar, 2, {-25, 1.85, 0, 30}, Intent::keep_lane(), 0.2)}};
  PeriodContext ctx;
  ctx.own_state = step(kCar, me, cand, 0.2);
  ctx.own_action = cand;
  ctx.prev_action = prev;
  ctx.others = {sets[0][0].anticipated_states[0]};
  EXPECT_DOUBLE_EQ(effective_utility(s, l, 1, -1.85, me, prev, cand, sets),
                   period_utility(s, ctx));
}

TEST(EffectiveUtility, WorstScenarioWins) {
  const LookAhead l = look();
  const AgentUtilitySpec s;
  const VehicleState me{-80, 1.85, 0, 31};
  const PathScenario far =
      anticipate_other(l.config, kCar, 2, {-80, -1.85, 0, 31}, Intent::keep_lane(), 0.2);
  const PathScenario near = anticipate_other(l.config, kCar, 2, {-80, -1.85, 0, 31},
                                             Intent::change_to_lane(1.85), 0.2);
  const std::vector<std::vector<PathScenario>> f{{far}}, n{{near}}, both{{far, near}};
  const double uf = effective_utility(s, l, 1, 1.85, me, {}, {0, 0}, f);
  const double un = effective_utility(s, l, 1, 1.85, me, {}, {0, 0}, n);
  EXPECT_LT(un, uf);
  EXPECT_EQ(effective_utility(s, l, 1, 1.85, me, {}, {0, 0}, both), un);
}

TEST(EffectiveUtility, EmptyScenarioSetIsRejected) {
  const std::vector<std::vector<PathScenario>> sets{{}};
  EXPECT_THROW(effective_utility(AgentUtilitySpec{}, look(), 1, 1.85, {0, 1.85, 0, 31}, {},
                                 {0, 0}, sets),
               std::invalid_argument);
}

TEST(AnticipationProperty, SupersetNeverRaisesUtility) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> dx(-30, 30), a(-3, 3), d(-0.03, 0.03);
  const LookAhead l = look();
  const AgentUtilitySpec s = spec_with_lx(10);
  for (int i = 0; i < 60; ++i) {
    const VehicleState me{-60 + dx(rng) / 3, 1.85, 0, 31};
    const VehicleState other{-60 + dx(rng), -1.85, 0, 30};
    const ActionPair cand{a(rng), d(rng)};
    auto full = enumerate_scenarios(l, s, kCar, 2, -1.85, other);
    full.push_back(anticipate_other(l.config, kCar, 2, other, Intent::change_to_lane(1.85), 0.2));
    for (std::size_t keep = 1; keep <= full.size(); ++keep) {
      const std::vector<std::vector<PathScenario>> sub{{full.begin(), full.begin() + keep}};
      const std::vector<std::vector<PathScenario>> sup{full};
      EXPECT_LE(effective_utility(s, l, 1, 1.85, me, {}, cand, sup),
                effective_utility(s, l, 1, 1.85, me, {}, cand, sub));
    }
  }
}

TEST(AnticipationProperty, HeavierPenaltyWeightNeverRaisesUtility) {
  const LookAhead l = look();
  const AgentUtilitySpec base = spec_with_lx(10);
  const VehicleState me{-40, -1.85, 0, 31};
  const std::vector<std::vector<PathScenario>> sets{
      {anticipate_other(l.config, kCar, 2, {-45, 1.85, 0, 31}, Intent::keep_lane(), 0.2)}};
  for (int k = 1; k < 8; ++k) {
    for (const ActionPair cand : {ActionPair{1.0, 0.02}, ActionPair{-2.0, 0.0}}) {
      AgentUtilitySpec heavy = base;
      heavy.weights.w[k] *= 2.0;
      EXPECT_LE(effective_utility(heavy, l, 1, -1.85, me, {0.5, 0.01}, cand, sets),
                effective_utility(base, l, 1, -1.85, me, {0.5, 0.01}, cand, sets))
          << "w" << k + 1;
    }
  }
}

TEST(AnticipationProperty, PathsAreReproducibleAndHaveHorizonLength) {
  for (int h : {1, 7, 15}) {
    const LookAhead l = look(h);
    const auto a = anticipate_self(l.config, kCar, l.road, 1, -1.85, {-80, -1.85, 0, 31},
                                   {1.5, 0.03}, 0.2);
    const auto b = anticipate_self(l.config, kCar, l.road, 1, -1.85, {-80, -1.85, 0, 31},
                                   {1.5, 0.03}, 0.2);
    EXPECT_EQ(a.anticipated_states.size(), static_cast<std::size_t>(h));
    EXPECT_EQ(a.anticipated_states, b.anticipated_states);
    const auto o = anticipate_other(l.config, kCar, 2, {-80, -1.85, 0, 31},
                                    Intent::change_to_lane(1.85), 0.2);
    EXPECT_EQ(o.anticipated_states.size(), static_cast<std::size_t>(h));
  }
}

TEST(AnticipationProperty, SteeringAtBarrierCostsMoreThanSteeringAway) {
  LookAhead l = look();
  const AgentUtilitySpec s = spec_with_lx(10);
  const VehicleState merger{-80, -1.85, 0, 31};
  const double toward = deg_to_rad(-1.0), away = deg_to_rad(1.0);
  // Accelerating straight at the barrier versus turning away from the
  // blocked lane, no neighbours.
  const double u_toward = effective_utility(s, l, 1, -1.85, merger, {}, {3.0, toward}, {});
  const double u_away = effective_utility(s, l, 1, -1.85, merger, {}, {3.0, away}, {});
  EXPECT_LT(u_toward, u_away);
}
