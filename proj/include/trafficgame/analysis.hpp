#pragma once

// Outcome metrics for two-vehicle merge runs.

#include <optional>
#include <span>
#include <string>

#include "trafficgame/dynamics.hpp"
#include "trafficgame/scenario.hpp"

namespace trafficgame {

enum class MergeOrder { kFront, kRear };

std::string to_string(MergeOrder order);

/// Front when the merging vehicle ends ahead of the through vehicle.
MergeOrder merge_order(const Trajectory& merging, const Trajectory& through);

/// Smallest |dx| over ticks where |dy| < lateral_band; nullopt if the
/// vehicles never share the band.
std::optional<double> min_longitudinal_gap(const Trajectory& a, const Trajectory& b,
                                           double lateral_band = 2.0);

/// Time (s) from which every later action stays within the tolerances, or
/// the run length if the last action is still outside them.
double maneuver_end_time(const Trajectory& run, double accel_tol = 0.1,
                         double steer_tol = deg_to_rad(0.2));

struct MergeSummary {
  MergeOrder order = MergeOrder::kFront;
  double final_lateral_error = 0.0;  // |y_T - target_lane_y| of the merging vehicle
  std::optional<double> min_gap;
  double maneuver_end_s = 0.0;       // later of the two vehicles
};

MergeSummary summarize_merge(const Trajectory& merging, const Trajectory& through,
                             double target_lane_y);

struct MergeRoles {
  std::size_t merging = 0;  // agent index in the scenario
  std::size_t through = 0;
  double target_lane_y = 0.0;
};

/// For a two-agent scenario with a barrier: the agent starting in the
/// blocked lane merges into the other agent's lane.
std::optional<MergeRoles> merge_roles(const Scenario& scenario);

}  // namespace trafficgame
