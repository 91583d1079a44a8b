#include "trafficgame/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

#include "rng.hpp"
#include "trafficgame/scenario.hpp"

namespace trafficgame {

namespace {

void check_axis(const std::vector<double>& values, const char* name) {
  if (values.empty()) throw std::invalid_argument(fmt::format("{} grid is empty", name));
  bool has_zero = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument(fmt::format("{} grid has a non-finite value", name));
    }
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw std::invalid_argument(fmt::format("{} grid must be strictly increasing", name));
    }
    if (values[i] == 0.0) has_zero = true;
  }
  if (!has_zero) throw std::invalid_argument(fmt::format("{} grid must contain 0", name));
}

std::vector<double> axis(double lo, double hi, double step, double unit) {
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("bad grid axis");
  std::vector<double> out;
  const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) {
    double v = lo + static_cast<double>(k) * step;
    if (std::abs(v) < 1e-12 * std::max(1.0, step)) v = 0.0;
    out.push_back(v * unit);
  }
  return out;
}

}  // namespace

ActionGrid ActionGrid::standard() { return uniform(-6.0, 5.0, 0.5, -2.0, 2.0, 0.02); }

ActionGrid ActionGrid::uniform(double alpha_lo, double alpha_hi, double alpha_step,
                               double delta_lo_deg, double delta_hi_deg,
                               double delta_step_deg) {
  ActionGrid g;
  g.alpha_values = axis(alpha_lo, alpha_hi, alpha_step, 1.0);
  g.delta_values = axis(delta_lo_deg, delta_hi_deg, delta_step_deg, kPi / 180.0);
  g.alpha_range = {alpha_lo, alpha_hi, alpha_step};
  g.delta_range_deg = {delta_lo_deg, delta_hi_deg, delta_step_deg};
  return g;
}

void ActionGrid::validate() const {
  check_axis(alpha_values, "alpha");
  check_axis(delta_values, "delta");
  for (double d : delta_values) {
    if (!(std::abs(d) < kPi / 2.0)) {
      throw std::invalid_argument("delta grid values must satisfy |delta| < pi/2");
    }
  }
}

ActionPair ActionGrid::at(std::size_t index) const {
  const std::size_t nd = delta_values.size();
  return ActionPair{alpha_values.at(index / nd), delta_values.at(index % nd)};
}

void NoiseModel::validate() const {
  for (double s : state_sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("state noise sigmas must be finite and >= 0");
    }
  }
  for (double s : action_sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("action noise sigmas must be finite and >= 0");
    }
  }
}

double counter_gaussian(std::uint64_t seed, AgentId agent, int tick, int field) {
  const auto a = static_cast<std::uint64_t>(static_cast<std::int64_t>(agent));
  const auto t = static_cast<std::uint64_t>(static_cast<std::int64_t>(tick));
  const auto f = static_cast<std::uint64_t>(field);
  const double u1 = detail::to_unit(detail::derive_seed(seed, {a, t, f, 0}));
  const double u2 = detail::to_unit(detail::derive_seed(seed, {a, t, f, 1}));
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * kPi * u2);
}

std::pair<VehicleState, ActionPair> apply_noise(const NoiseModel& noise,
                                                const VehicleState& s,
                                                const ActionPair& a, int tick,
                                                AgentId agent_id) {
  if (noise.distribution == NoiseDistribution::kNone) return {s, a};
  auto draw = [&](int field, double sigma) {
    return sigma == 0.0 ? 0.0 : sigma * counter_gaussian(noise.rng_seed, agent_id, tick, field);
  };
  VehicleState perceived = s;
  perceived.x += draw(0, noise.state_sigma[0]);
  perceived.y += draw(1, noise.state_sigma[1]);
  perceived.heading_psi += draw(2, noise.state_sigma[2]);
  perceived.speed_v = std::max(0.0, perceived.speed_v + draw(3, noise.state_sigma[3]));
  ActionPair realized = a;
  realized.accel_alpha += draw(4, noise.action_sigma[0]);
  realized.steer_delta += draw(5, noise.action_sigma[1]);
  const double limit = kPi / 2.0 - 1e-6;
  realized.steer_delta = std::clamp(realized.steer_delta, -limit, limit);
  return {perceived, realized};
}

std::vector<std::vector<PathScenario>> neighbour_scenarios(
    const AgentUtilitySpec& spec, const LookAhead& look,
    std::span<const AgentSnapshot> perceived_all, AgentId self,
    double neighbor_radius) {
  const AgentSnapshot* me = nullptr;
  for (const AgentSnapshot& a : perceived_all) {
    if (a.id == self) me = &a;
  }
  if (me == nullptr) throw std::invalid_argument(fmt::format("agent {} not present", self));
  std::vector<std::vector<PathScenario>> sets;
  for (const AgentSnapshot& other : perceived_all) {
    if (other.id == self) continue;
    const double dist = std::hypot(other.state.x - me->state.x, other.state.y - me->state.y);
    if (dist > neighbor_radius) continue;
    sets.push_back(enumerate_scenarios(look, spec, other.geometry, other.id,
                                       other.origin_lane_y, other.state));
  }
  return sets;
}

std::vector<double> evaluate_grid(const AgentUtilitySpec& spec, const LookAhead& look,
                                  const ActionGrid& grid, const AgentSnapshot& self,
                                  const ActionPair& prev_action,
                                  std::span<const std::vector<PathScenario>> sets) {
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    values[k] = effective_utility(spec, look, self.id, self.origin_lane_y, self.state,
                                  prev_action, grid.at(k), sets);
  }
  return values;
}

std::size_t select_best(const ActionGrid& grid, std::span<const double> values) {
  if (values.size() != grid.size() || values.empty()) {
    throw std::invalid_argument("value count must match the grid");
  }
  auto gentleness = [&](std::size_t k) {
    const ActionPair a = grid.at(k);
    return std::hypot(a.accel_alpha, 10.0 * a.steer_delta);
  };
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best] ||
        (values[k] == values[best] && gentleness(k) < gentleness(best))) {
      best = k;
    }
  }
  return best;
}

Decision decide(const AgentUtilitySpec& spec, const LookAhead& look,
                const ActionGrid& grid, std::span<const AgentSnapshot> perceived_all,
                const ActionPair& prev_action, AgentId agent_id,
                double neighbor_radius) {
  const std::vector<std::vector<PathScenario>> sets =
      neighbour_scenarios(spec, look, perceived_all, agent_id, neighbor_radius);
  const AgentSnapshot* self = nullptr;
  for (const AgentSnapshot& a : perceived_all) {
    if (a.id == agent_id) self = &a;
  }
  const std::vector<double> values = evaluate_grid(spec, look, grid, *self, prev_action, sets);
  Decision d;
  d.grid_index = select_best(grid, values);
  d.action = grid.at(d.grid_index);
  d.value = values[d.grid_index];
  for (const auto& set : sets) {
    std::vector<Intent> intents;
    for (const PathScenario& p : set) intents.push_back(p.intent);
    d.neighbour_intents.emplace_back(set.front().agent_id, std::move(intents));
  }
  return d;
}

ActionPair optimal_action(const AgentUtilitySpec& spec, const LookAhead& look,
                          const ActionGrid& grid,
                          std::span<const AgentSnapshot> perceived_all,
                          const ActionPair& prev_action, AgentId agent_id,
                          double neighbor_radius) {
  return decide(spec, look, grid, perceived_all, prev_action, agent_id, neighbor_radius)
      .action;
}

std::string to_string(SimEvent::Kind kind) {
  switch (kind) {
    case SimEvent::Kind::kSpeedClamp: return "speed_clamp";
    case SimEvent::Kind::kScenarioSwitch: return "scenario_switch";
    case SimEvent::Kind::kCalamity: return "calamity";
    case SimEvent::Kind::kEnter: return "enter";
    case SimEvent::Kind::kExit: return "exit";
  }
  return "unknown";
}

bool SimulationResult::has_calamity() const {
  return std::any_of(events.begin(), events.end(), [](const SimEvent& e) {
    return e.kind == SimEvent::Kind::kCalamity;
  });
}

const AgentRun& SimulationResult::agent(AgentId id) const {
  for (const AgentRun& a : agents) {
    if (a.id == id) return a;
  }
  throw std::invalid_argument(fmt::format("agent {} not in result", id));
}

SimulationResult simulate(const Scenario& scenario) {
  return simulate(scenario, scenario.noise, scenario.T);
}

namespace {

std::string describe(const std::vector<Intent>& intents) {
  std::string out;
  for (const Intent& i : intents) {
    if (!out.empty()) out += "|";
    out += i.kind == Intent::Kind::kKeepLane ? std::string("keep")
                                             : fmt::format("change:{}", i.target_y);
  }
  return out;
}

}  // namespace

SimulationResult simulate(const Scenario& scenario, const NoiseModel& noise, int T) {
  scenario.validate();
  noise.validate();
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  const LookAhead look = scenario.look_ahead();
  const AdaptiveSettings& settings = scenario.adaptive;
  const std::size_t n = scenario.agents.size();

  std::vector<AgentUtilitySpec> specs;
  for (const AgentConfig& a : scenario.agents) specs.push_back(scenario.adaptive_spec(a));

  SimulationResult result;
  std::vector<int> run_index(n, -1);
  std::vector<bool> active(n, false);
  std::vector<VehicleState> state(n);
  std::vector<double> origin(n, 0.0);
  std::vector<ActionPair> prev(n);
  std::map<std::pair<AgentId, AgentId>, std::string> last_intents;

  for (int t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const AgentConfig& cfg = scenario.agents[i];
      if (!active[i] && run_index[i] < 0 && cfg.entry_tick == t) {
        active[i] = true;
        state[i] = cfg.initial;
        origin[i] = scenario.road.nearest_lane(cfg.initial.y);
        prev[i] = cfg.initial_prev_action;
        AgentRun run;
        run.id = cfg.id;
        run.first_tick = t;
        run.trajectory.dt = scenario.dt;
        run.trajectory.states.push_back(cfg.initial);
        run_index[i] = static_cast<int>(result.agents.size());
        result.agents.push_back(std::move(run));
        result.events.push_back({SimEvent::Kind::kEnter, t, cfg.id, ""});
      }
      if (active[i] && cfg.exit_tick && *cfg.exit_tick == t) {
        active[i] = false;
        result.events.push_back({SimEvent::Kind::kExit, t, cfg.id, ""});
      }
    }

    std::vector<AgentSnapshot> perceived;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const auto [seen, unused] =
          apply_noise(noise, state[i], ActionPair{}, t, scenario.agents[i].id);
      perceived.push_back({scenario.agents[i].id, seen, origin[i],
                           scenario.agents[i].spec.geometry});
    }

    // Decisions read only the frozen tick-start snapshot.
    std::vector<ActionPair> realized(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const AgentId id = scenario.agents[i].id;
      const Decision d =
          decide(specs[i], look, settings.grid, perceived, prev[i], id,
                 settings.neighbor_radius);
      for (const auto& [other, intents] : d.neighbour_intents) {
        const std::string text = describe(intents);
        auto [it, inserted] = last_intents.try_emplace({id, other}, text);
        if (!inserted && it->second != text) {
          result.events.push_back({SimEvent::Kind::kScenarioSwitch, t, id,
                                   fmt::format("neighbour {}: {} -> {}", other,
                                               it->second, text)});
          it->second = text;
        }
      }
      realized[i] = apply_noise(noise, state[i], d.action, t, id).second;
      AgentRun& run = result.agents[run_index[i]];
      run.planned.push_back(d.action);
      run.effective_utility.push_back(d.value);
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      bool clamped = false;
      state[i] = step(scenario.agents[i].spec.geometry, state[i], realized[i],
                      scenario.dt, &clamped);
      prev[i] = realized[i];
      AgentRun& run = result.agents[run_index[i]];
      run.trajectory.actions.push_back(realized[i]);
      run.trajectory.states.push_back(state[i]);
      if (clamped) {
        run.trajectory.speed_clamps.push_back(run.trajectory.actions.size() - 1);
        result.events.push_back({SimEvent::Kind::kSpeedClamp, t, scenario.agents[i].id, ""});
      }
      origin[i] = update_origin_lane(scenario.anticipation, scenario.road, origin[i], state[i]);
    }

    // Calamity: crash or collision feature near its supremum.
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const AgentUtilitySpec& spec = specs[i];
      const double crash = phi7_crash(spec, state[i].x, state[i].y);
      if (crash > settings.calamity_threshold) {
        result.events.push_back({SimEvent::Kind::kCalamity, t + 1, scenario.agents[i].id,
                                 fmt::format("crash feature {:.4f}", crash)});
      }
      const double peak = phi8_collision(spec, 0.0, 0.0);
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double c = phi8_collision(spec, state[i].x - state[j].x,
                                        state[i].y - state[j].y);
        if (c > settings.calamity_threshold * peak) {
          result.events.push_back(
              {SimEvent::Kind::kCalamity, t + 1, scenario.agents[i].id,
               fmt::format("collision with {} feature {:.4f}", scenario.agents[j].id, c)});
        }
      }
    }
  }
  return result;
}

}  // namespace trafficgame
