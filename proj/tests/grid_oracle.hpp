#pragma once

// Exhaustive re-evaluation of the adaptive grid search. Own look-ahead
// paths, features and aggregation are recomputed with the scalar oracles;
// only the neighbour scenario enumeration is taken from the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "oracles.hpp"
#include "trafficgame/adaptive.hpp"

namespace oracle {

inline Params params_of(const trafficgame::AgentUtilitySpec& s) {
  const auto& p = s.params;
  Params o;
  o.v0 = p.speed_limit_v0; o.amax = p.accel_max; o.amin = p.accel_min; o.k4 = p.kappa4;
  o.W = p.lane_width_W; o.k6 = p.kappa6; o.width = s.geometry.body_width;
  o.l7x = p.crash_lx; o.l7y = p.crash_ly; o.k7x = p.kappa7x; o.k7y = p.kappa7y;
  o.barrier = p.barrier_x;
  o.l8x = p.coll_lx; o.l8y = p.coll_ly; o.k8x = p.kappa8x; o.k8y = p.kappa8y;
  for (int k = 0; k < 8; ++k) o.w[k] = s.weights.w[k];
  return o;
}

struct SelfPath {
  std::vector<Pose> poses;
  std::vector<std::pair<double, double>> actions;
};

inline SelfPath self_path(const trafficgame::AgentUtilitySpec& spec,
                          const trafficgame::LookAhead& look, double origin_y, Pose s,
                          double alpha, double delta) {
  const auto& c = look.config;
  const int persist = static_cast<int>(std::ceil(c.horizon_h * c.persistence_fraction - 1e-9));
  SelfPath out;
  for (int k = 1; k <= c.horizon_h; ++k) {
    double d = delta;
    if (k > persist && std::fabs(s.y - origin_y) >= c.crossing_threshold) {
      // Adjacent lane on the side the car has moved to.
      const double dir = s.y > origin_y ? 1.0 : -1.0;
      double target = std::numeric_limits<double>::quiet_NaN();
      for (double lane : look.road.lane_centers) {
        if ((lane - origin_y) * dir > 0 &&
            (std::isnan(target) || std::fabs(lane - origin_y) < std::fabs(target - origin_y))) {
          target = lane;
        }
      }
      if (!std::isnan(target)) {
        const double psi_star = std::atan(c.stanley_kappa * (target - s.y) / std::sqrt(1 + s.v));
        double err = std::fmod(psi_star - s.psi, 2 * pi);
        if (err > pi) err -= 2 * pi;
        if (err < -pi) err += 2 * pi;
        d = std::clamp(c.stanley_steer_gain * err, -c.stanley_max_steer, c.stanley_max_steer);
      }
    }
    s = bicycle_step(spec.geometry.wheelbase_L, spec.geometry.cg_to_rear_b, s, alpha, d,
                     look.dt);
    out.poses.push_back(s);
    out.actions.emplace_back(alpha, d);
  }
  return out;
}

inline double aggregate(trafficgame::AggregationRule rule, const std::vector<double>& v) {
  switch (rule) {
    case trafficgame::AggregationRule::kFirstPeriod: return v.front();
    case trafficgame::AggregationRule::kMaxOverHorizon: return *std::max_element(v.begin(), v.end());
    case trafficgame::AggregationRule::kMeanOverHorizon: {
      double s = 0;
      for (double x : v) s += x;
      return s / v.size();
    }
  }
  return 0;
}

inline double effective_value(const trafficgame::AgentUtilitySpec& spec,
                              const trafficgame::LookAhead& look,
                              const trafficgame::AgentSnapshot& self,
                              const trafficgame::ActionPair& prev, double alpha, double delta,
                              const std::vector<std::vector<trafficgame::PathScenario>>& sets) {
  const Params p = params_of(spec);
  const SelfPath own = self_path(spec, look, self.origin_lane_y,
                                 {self.state.x, self.state.y, self.state.heading_psi,
                                  self.state.speed_v},
                                 alpha, delta);
  const std::size_t h = own.poses.size();
  std::size_t combos = 1;
  for (const auto& s : sets) combos *= s.size();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < combos; ++c) {
    std::vector<std::vector<double>> series(8, std::vector<double>(h));
    for (std::size_t k = 0; k < h; ++k) {
      Period t{own.poses[k], own.actions[k].first, own.actions[k].second,
               k == 0 ? prev.accel_alpha : own.actions[k - 1].first,
               k == 0 ? prev.steer_delta : own.actions[k - 1].second, {}};
      std::size_t rest = c;
      for (const auto& s : sets) {
        const auto& st = s[rest % s.size()].anticipated_states[k];
        rest /= s.size();
        t.others.push_back({st.x, st.y, st.heading_psi, st.speed_v});
      }
      const auto f = features(p, t);
      for (int i = 0; i < 8; ++i) series[i][k] = f[i];
    }
    double total = 0;
    for (int i = 0; i < 8; ++i) total += p.w[i] * aggregate(look.aggregators.rules[i], series[i]);
    worst = std::min(worst, total);
  }
  return worst;
}

/// Index of the oracle argmax; values within rel_tie of the best count as
/// ties and fall to the gentlest action, then the lowest index.
inline std::size_t grid_argmax(const trafficgame::AgentUtilitySpec& spec,
                               const trafficgame::LookAhead& look,
                               const trafficgame::ActionGrid& grid,
                               std::span<const trafficgame::AgentSnapshot> perceived,
                               const trafficgame::ActionPair& prev, trafficgame::AgentId id,
                               double radius, double rel_tie = 1e-12) {
  const trafficgame::AgentSnapshot* self = nullptr;
  for (const auto& a : perceived) {
    if (a.id == id) self = &a;
  }
  const auto sets = trafficgame::neighbour_scenarios(spec, look, perceived, id, radius);
  const std::size_t nd = grid.delta_values.size();
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    v[i] = effective_value(spec, look, *self, prev, grid.alpha_values[i / nd],
                           grid.delta_values[i % nd], sets);
  }
  const double best = *std::max_element(v.begin(), v.end());
  const double tol = rel_tie * std::max(1.0, std::fabs(best));
  std::size_t arg = grid.size();
  double arg_size = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (v[i] < best - tol) continue;
    const double size = std::hypot(grid.alpha_values[i / nd], 10 * grid.delta_values[i % nd]);
    if (size < arg_size) {
      arg = i;
      arg_size = size;
    }
  }
  return arg;
}

}  // namespace oracle
