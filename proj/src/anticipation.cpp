#include "trafficgame/anticipation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trafficgame {

void AnticipationConfig::validate() const {
  if (horizon_h < 1) throw std::invalid_argument("horizon_h must be >= 1");
  if (!(stanley_kappa > 0.0)) {
    throw std::invalid_argument("stanley_kappa must be positive");
  }
  if (!(persistence_fraction > 0.0 && persistence_fraction < 1.0)) {
    throw std::invalid_argument("persistence_fraction must lie in (0, 1)");
  }
  if (!(crossing_threshold > 0.0)) {
    throw std::invalid_argument("crossing_threshold must be positive");
  }
  if (!(stanley_steer_gain > 0.0)) {
    throw std::invalid_argument("stanley_steer_gain must be positive");
  }
  if (!(stanley_max_steer > 0.0 && stanley_max_steer < kPi / 2.0)) {
    throw std::invalid_argument("stanley_max_steer must lie in (0, pi/2)");
  }
  if (!(settle_distance > 0.0) || !(settle_heading > 0.0)) {
    throw std::invalid_argument("settle tolerances must be positive");
  }
}

int AnticipationConfig::persistence_steps() const {
  // Ceiling, with slack for fractions like 1/3 that are not exact in binary.
  return static_cast<int>(std::ceil(horizon_h * persistence_fraction - 1e-9));
}

double RoadLayout::nearest_lane(double y) const {
  if (lane_centers.empty()) throw std::invalid_argument("road has no lanes");
  double best = lane_centers.front();
  for (double c : lane_centers) {
    if (std::abs(c - y) < std::abs(best - y)) best = c;
  }
  return best;
}

std::optional<double> RoadLayout::adjacent_lane(double origin_y,
                                                double direction) const {
  std::optional<double> found;
  for (double c : lane_centers) {
    if (direction > 0.0 && c > origin_y && (!found || c < *found)) found = c;
    if (direction < 0.0 && c < origin_y && (!found || c > *found)) found = c;
  }
  return found;
}

double stanley_heading(const AnticipationConfig& cfg, double lateral_offset_d,
                       double v) {
  return std::atan(cfg.stanley_kappa * lateral_offset_d / std::sqrt(1.0 + v));
}

double stanley_steering(const AnticipationConfig& cfg, const VehicleState& s,
                        double target_y) {
  const double target_heading = stanley_heading(cfg, target_y - s.y, s.speed_v);
  const double error = std::remainder(target_heading - s.heading_psi, 2.0 * kPi);
  return std::clamp(cfg.stanley_steer_gain * error, -cfg.stanley_max_steer,
                    cfg.stanley_max_steer);
}

std::optional<double> crossing_target(const AnticipationConfig& cfg,
                                      const RoadLayout& road, double origin_y,
                                      double y) {
  const double moved = y - origin_y;
  if (std::abs(moved) < cfg.crossing_threshold) return std::nullopt;
  return road.adjacent_lane(origin_y, moved);
}

double update_origin_lane(const AnticipationConfig& cfg, const RoadLayout& road,
                          double origin_y, const VehicleState& s) {
  const double lane = road.nearest_lane(s.y);
  if (std::abs(s.y - lane) < cfg.settle_distance &&
      std::abs(std::remainder(s.heading_psi, 2.0 * kPi)) < cfg.settle_heading) {
    return lane;
  }
  return origin_y;
}

PathScenario anticipate_other(const AnticipationConfig& cfg,
                              const VehicleGeometry& geom, AgentId agent_id,
                              const VehicleState& s, const Intent& intent,
                              double dt) {
  PathScenario out;
  out.agent_id = agent_id;
  out.intent = intent;
  out.anticipated_states.reserve(cfg.horizon_h);
  out.prescribed_actions.reserve(cfg.horizon_h);
  VehicleState cur = s;
  for (int k = 0; k < cfg.horizon_h; ++k) {
    ActionPair a;
    if (intent.kind == Intent::Kind::kChangeToLane) {
      a.steer_delta = stanley_steering(cfg, cur, intent.target_y);
    }
    cur = step(geom, cur, a, dt);
    out.prescribed_actions.push_back(a);
    out.anticipated_states.push_back(cur);
  }
  return out;
}

PathScenario anticipate_self(const AnticipationConfig& cfg,
                             const VehicleGeometry& geom, const RoadLayout& road,
                             AgentId agent_id, double origin_y,
                             const VehicleState& s, const ActionPair& candidate,
                             double dt) {
  PathScenario out;
  out.agent_id = agent_id;
  out.anticipated_states.reserve(cfg.horizon_h);
  out.prescribed_actions.reserve(cfg.horizon_h);
  const int persist = cfg.persistence_steps();
  VehicleState cur = s;
  for (int k = 1; k <= cfg.horizon_h; ++k) {
    ActionPair a = candidate;
    if (k > persist) {
      if (auto target = crossing_target(cfg, road, origin_y, cur.y)) {
        a.steer_delta = stanley_steering(cfg, cur, *target);
        out.intent = Intent::change_to_lane(*target);
      }
    }
    cur = step(geom, cur, a, dt);
    out.prescribed_actions.push_back(a);
    out.anticipated_states.push_back(cur);
  }
  return out;
}

std::vector<PathScenario> enumerate_scenarios(const LookAhead& look,
                                              const AgentUtilitySpec& observer,
                                              const VehicleGeometry& other_geom,
                                              AgentId other_id, double other_origin_y,
                                              const VehicleState& other) {
  const AnticipationConfig& cfg = look.config;
  std::vector<PathScenario> out;
  out.push_back(anticipate_other(cfg, other_geom, other_id, other,
                                 Intent::keep_lane(), look.dt));

  std::vector<double> targets;
  if (auto crossing = crossing_target(cfg, look.road, other_origin_y, other.y)) {
    targets.push_back(*crossing);
  } else if (look.road.barrier) {
    const Barrier& b = *look.road.barrier;
    const double reach = other.speed_v * cfg.horizon_h * look.dt +
                         observer.params.crash_lx;
    const double gap = b.x - other.x;
    const bool in_blocked_lane = std::abs(other_origin_y - b.blocked_lane_y) < 1e-9;
    if (in_blocked_lane && gap <= reach && gap >= -observer.params.crash_lx) {
      for (double dir : {-1.0, 1.0}) {
        if (auto lane = look.road.adjacent_lane(other_origin_y, dir)) {
          targets.push_back(*lane);
        }
      }
    }
  }
  for (double target : targets) {
    out.push_back(anticipate_other(cfg, other_geom, other_id, other,
                                   Intent::change_to_lane(target), look.dt));
  }
  return out;
}

namespace {

double aggregate(AggregationRule rule, std::span<const double> series) {
  switch (rule) {
    case AggregationRule::kFirstPeriod:
      return series.front();
    case AggregationRule::kMaxOverHorizon:
      return *std::max_element(series.begin(), series.end());
    case AggregationRule::kMeanOverHorizon: {
      double sum = 0.0;
      for (double v : series) sum += v;
      return sum / static_cast<double>(series.size());
    }
  }
  return 0.0;
}

}  // namespace

double aggregate_utility(const AgentUtilitySpec& spec, const Aggregators& aggs,
                         const PathScenario& own_path, const ActionPair& prev_action,
                         std::span<const PathScenario* const> neighbours) {
  const std::size_t h = own_path.anticipated_states.size();
  if (h == 0 || own_path.prescribed_actions.size() != h) {
    throw std::invalid_argument("own path must carry h states and actions");
  }
  for (const PathScenario* n : neighbours) {
    if (n->anticipated_states.size() != h) {
      throw std::invalid_argument("neighbour path length differs from own horizon");
    }
  }
  std::array<std::vector<double>, kNumFeatures> series;
  for (auto& s : series) s.resize(h);

  PeriodContext ctx;
  ctx.others.resize(neighbours.size());
  for (std::size_t k = 0; k < h; ++k) {
    ctx.own_state = own_path.anticipated_states[k];
    ctx.own_action = own_path.prescribed_actions[k];
    ctx.prev_action = k == 0 ? prev_action : own_path.prescribed_actions[k - 1];
    for (std::size_t j = 0; j < neighbours.size(); ++j) {
      ctx.others[j] = neighbours[j]->anticipated_states[k];
    }
    const FeatureVector f = period_features(spec, ctx);
    for (std::size_t i = 0; i < kNumFeatures; ++i) series[i][k] = f[i];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    total += spec.weights.w[i] * aggregate(aggs.rules[i], series[i]);
  }
  return total;
}

double effective_utility(const AgentUtilitySpec& spec, const LookAhead& look,
                         AgentId self_id, double self_origin_y,
                         const VehicleState& s, const ActionPair& prev_action,
                         const ActionPair& candidate,
                         std::span<const std::vector<PathScenario>> scenario_sets) {
  for (const auto& set : scenario_sets) {
    if (set.empty()) {
      throw std::invalid_argument("every neighbour needs at least one scenario");
    }
  }
  const PathScenario own =
      anticipate_self(look.config, spec.geometry, look.road, self_id, self_origin_y,
                      s, candidate, look.dt);

  // Odometer over one scenario per neighbour.
  std::vector<std::size_t> pick(scenario_sets.size(), 0);
  std::vector<const PathScenario*> combo(scenario_sets.size());
  double worst = std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t j = 0; j < pick.size(); ++j) combo[j] = &scenario_sets[j][pick[j]];
    worst = std::min(worst,
                     aggregate_utility(spec, look.aggregators, own, prev_action, combo));
    std::size_t j = 0;
    while (j < pick.size() && ++pick[j] == scenario_sets[j].size()) {
      pick[j] = 0;
      ++j;
    }
    if (j == pick.size()) break;
  }
  return worst;
}

}  // namespace trafficgame
