#pragma once

// Per-period utility features, their weighted sum, and the cumulative
// (undiscounted) utility of an own action sequence against fixed
// trajectories of the other agents.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "trafficgame/dynamics.hpp"

namespace trafficgame {

inline constexpr std::size_t kNumFeatures = 8;
using FeatureVector = std::array<double, kNumFeatures>;

/// Feature shape parameters. Defaults are the double-lane highway values.
struct UtilityParams {
  double speed_limit_v0 = 31.0;
  double accel_max = 4.0;
  double accel_min = -5.0;
  double kappa4 = 15.0;
  double lane_width_W = 3.7;
  double kappa6 = 3.0;
  double crash_lx = 5.0;
  double crash_ly = 1.0;
  double kappa7x = 2.0;
  double kappa7y = 20.0;
  double coll_lx = 10.0;
  double coll_ly = 2.0;
  double kappa8x = 0.5;
  double kappa8y = 9.0;
  double barrier_x = 0.0;
  // Steering roughness is measured in degrees: 180/pi per radian.
  double steer_roughness_scale = 180.0 / kPi;

  void validate() const;
};

struct UtilityWeights {
  FeatureVector w{1.0, -0.01, -1.5, -1.0, -0.3, -24.0, -20.0, -14.0};

  /// w1 > 0, w2..w8 <= 0, all finite.
  void validate() const;
};

struct AgentUtilitySpec {
  UtilityParams params;
  UtilityWeights weights;
  VehicleGeometry geometry;

  void validate() const;
};

struct PeriodContext {
  VehicleState own_state;
  ActionPair own_action;
  ActionPair prev_action;
  std::vector<VehicleState> others;
};

// Overflow-safe scalar building blocks.
double sigmoid(double x);
double softplus(double x);

double phi1_forward(const AgentUtilitySpec& spec, double v);
double phi2_accel_smooth(double a_t, double a_prev);
/// Arguments are in the unit the roughness is measured in.
double phi3_steer_smooth(double d_t, double d_prev);
double phi4_hard_accel(const AgentUtilitySpec& spec, double alpha);
double phi5_lane_departure(const AgentUtilitySpec& spec, double y);
double phi6_out_of_road(const AgentUtilitySpec& spec, double y);
double phi7_crash(const AgentUtilitySpec& spec, double x, double y);
double phi8_collision(const AgentUtilitySpec& spec, double dx, double dy);

/// All eight features for one period; phi8 is summed over ctx.others.
FeatureVector period_features(const AgentUtilitySpec& spec,
                              const PeriodContext& ctx);

double weighted_sum(const UtilityWeights& weights, const FeatureVector& f);

double period_utility(const AgentUtilitySpec& spec, const PeriodContext& ctx);

/// Sum of period utilities over t = 0..T-1. Own states come from rolling
/// out own_actions from s0; others' states at t are read from their
/// trajectories, which must each carry exactly T actions.
double cumulative_utility(const AgentUtilitySpec& spec, const VehicleState& s0,
                          std::span<const ActionPair> own_actions,
                          std::span<const Trajectory> others, double dt,
                          const ActionPair& initial_prev_action = {});

/// Cumulative utility and its exact gradient with respect to the own
/// actions, laid out as (alpha_0, delta_0, alpha_1, delta_1, ...) with
/// delta in radians. Computed by a backward (adjoint) sweep.
double cumulative_utility_gradient(const AgentUtilitySpec& spec,
                                   const VehicleState& s0,
                                   std::span<const ActionPair> own_actions,
                                   std::span<const Trajectory> others, double dt,
                                   std::vector<double>& gradient,
                                   const ActionPair& initial_prev_action = {});

}  // namespace trafficgame
