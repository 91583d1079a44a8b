#pragma once

// Finite look-ahead anticipation: Stanley heading targets, hypothesized
// h-step paths for self and neighbours, and the aggregated worst-case
// effective utility of a candidate action.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "trafficgame/dynamics.hpp"
#include "trafficgame/utility.hpp"

namespace trafficgame {

using AgentId = int;

struct AnticipationConfig {
  int horizon_h = 15;
  double stanley_kappa = 0.15;
  double persistence_fraction = 1.0 / 3.0;
  double crossing_threshold = 0.5;  // m
  /// Steering = gain * (psi* - psi). A unit gain overshoots at highway
  /// speed with dt = 0.2 s, so the default halves it.
  double stanley_steer_gain = 0.5;
  /// Saturation of the tracking steer, rad.
  double stanley_max_steer = deg_to_rad(30.0);
  /// A vehicle adopts a lane as its origin once it is this close to the
  /// centre and this close to parallel with the road.
  double settle_distance = 0.2;                  // m
  double settle_heading = deg_to_rad(0.25);      // rad

  void validate() const;
  /// Number of leading look-ahead steps that repeat the candidate verbatim.
  int persistence_steps() const;
};

enum class AggregationRule { kMeanOverHorizon, kFirstPeriod, kMaxOverHorizon };

struct Aggregators {
  std::array<AggregationRule, kNumFeatures> rules{
      AggregationRule::kMeanOverHorizon,  // forward reward
      AggregationRule::kFirstPeriod,      // accel smoothness
      AggregationRule::kFirstPeriod,      // steer smoothness
      AggregationRule::kFirstPeriod,      // hard accel
      AggregationRule::kMeanOverHorizon,  // lane departure
      AggregationRule::kMaxOverHorizon,   // out of road
      AggregationRule::kMaxOverHorizon,   // crash
      AggregationRule::kMaxOverHorizon,   // collision
  };
};

struct Barrier {
  double x = 0.0;
  double blocked_lane_y = 0.0;
};

struct RoadLayout {
  std::vector<double> lane_centers;  // strictly increasing
  std::optional<Barrier> barrier;

  double nearest_lane(double y) const;
  /// Lane adjacent to `origin_y` on the side of `direction` (+1 / -1).
  std::optional<double> adjacent_lane(double origin_y, double direction) const;
};

/// Look-ahead settings shared by every decision of one simulation.
struct LookAhead {
  AnticipationConfig config;
  Aggregators aggregators;
  RoadLayout road;
  double dt = 0.2;
};

struct Intent {
  enum class Kind { kKeepLane, kChangeToLane };
  Kind kind = Kind::kKeepLane;
  double target_y = 0.0;

  static Intent keep_lane() { return {}; }
  static Intent change_to_lane(double y) { return {Kind::kChangeToLane, y}; }
  friend bool operator==(const Intent&, const Intent&) = default;
};

struct PathScenario {
  AgentId agent_id = 0;
  Intent intent;
  std::vector<VehicleState> anticipated_states;  // h states after s
  std::vector<ActionPair> prescribed_actions;    // h actions producing them
};

/// Target heading toward a lane centre at signed lateral offset d.
double stanley_heading(const AnticipationConfig& cfg, double lateral_offset_d,
                       double v);

/// Steering that tracks the Stanley heading toward target_y, saturated at
/// cfg.stanley_max_steer.
double stanley_steering(const AnticipationConfig& cfg, const VehicleState& s,
                        double target_y);

/// Lane being entered when the vehicle has moved at least the crossing
/// threshold away from its origin lane, otherwise nullopt.
std::optional<double> crossing_target(const AnticipationConfig& cfg,
                                      const RoadLayout& road, double origin_y,
                                      double y);

/// Origin lane after observing `s`: the nearest lane centre once the
/// vehicle has settled there, otherwise the previous origin.
double update_origin_lane(const AnticipationConfig& cfg, const RoadLayout& road,
                          double origin_y, const VehicleState& s);

PathScenario anticipate_other(const AnticipationConfig& cfg,
                              const VehicleGeometry& geom, AgentId agent_id,
                              const VehicleState& s, const Intent& intent,
                              double dt);

PathScenario anticipate_self(const AnticipationConfig& cfg,
                             const VehicleGeometry& geom, const RoadLayout& road,
                             AgentId agent_id, double origin_y,
                             const VehicleState& s, const ActionPair& candidate,
                             double dt);

/// Path scenarios the observer entertains for a neighbour: keep-lane,
/// plus change-to-lane when the neighbour's lane is blocked ahead or it is
/// already crossing.
std::vector<PathScenario> enumerate_scenarios(const LookAhead& look,
                                              const AgentUtilitySpec& observer,
                                              const VehicleGeometry& other_geom,
                                              AgentId other_id, double other_origin_y,
                                              const VehicleState& other);

/// Aggregated utility of an already anticipated own path against one
/// combination of neighbour paths.
double aggregate_utility(const AgentUtilitySpec& spec, const Aggregators& aggs,
                         const PathScenario& own_path, const ActionPair& prev_action,
                         std::span<const PathScenario* const> neighbours);

/// Worst case over every combination of one scenario per neighbour.
double effective_utility(const AgentUtilitySpec& spec, const LookAhead& look,
                         AgentId self_id, double self_origin_y,
                         const VehicleState& s, const ActionPair& prev_action,
                         const ActionPair& candidate,
                         std::span<const std::vector<PathScenario>> scenario_sets);

}  // namespace trafficgame
