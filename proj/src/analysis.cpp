#include "trafficgame/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trafficgame {

std::string to_string(MergeOrder order) {
  return order == MergeOrder::kFront ? "front" : "rear";
}

MergeOrder merge_order(const Trajectory& merging, const Trajectory& through) {
  if (merging.states.empty() || through.states.empty()) {
    throw std::invalid_argument("empty trajectory");
  }
  return merging.final_state().x > through.final_state().x ? MergeOrder::kFront
                                                           : MergeOrder::kRear;
}

std::optional<double> min_longitudinal_gap(const Trajectory& a, const Trajectory& b,
                                           double lateral_band) {
  std::optional<double> best;
  const std::size_t n = std::min(a.states.size(), b.states.size());
  for (std::size_t t = 0; t < n; ++t) {
    if (std::abs(a.states[t].y - b.states[t].y) >= lateral_band) continue;
    const double gap = std::abs(a.states[t].x - b.states[t].x);
    if (!best || gap < *best) best = gap;
  }
  return best;
}

double maneuver_end_time(const Trajectory& run, double accel_tol, double steer_tol) {
  std::size_t end = 0;
  for (std::size_t t = 0; t < run.actions.size(); ++t) {
    const ActionPair& a = run.actions[t];
    if (std::abs(a.accel_alpha) > accel_tol || std::abs(a.steer_delta) > steer_tol) {
      end = t + 1;
    }
  }
  return static_cast<double>(end) * run.dt;
}

MergeSummary summarize_merge(const Trajectory& merging, const Trajectory& through,
                             double target_lane_y) {
  MergeSummary s;
  s.order = merge_order(merging, through);
  s.final_lateral_error = std::abs(merging.final_state().y - target_lane_y);
  s.min_gap = min_longitudinal_gap(merging, through);
  s.maneuver_end_s = std::max(maneuver_end_time(merging), maneuver_end_time(through));
  return s;
}

std::optional<MergeRoles> merge_roles(const Scenario& scenario) {
  if (scenario.agents.size() != 2 || !scenario.road.barrier) return std::nullopt;
  const double blocked = scenario.road.barrier->blocked_lane_y;
  std::optional<MergeRoles> roles;
  for (std::size_t i = 0; i < 2; ++i) {
    const double lane_i = scenario.road.nearest_lane(scenario.agents[i].initial.y);
    const double lane_j = scenario.road.nearest_lane(scenario.agents[1 - i].initial.y);
    if (lane_i == blocked && lane_j != blocked) roles = MergeRoles{i, 1 - i, lane_j};
  }
  return roles;
}

}  // namespace trafficgame
