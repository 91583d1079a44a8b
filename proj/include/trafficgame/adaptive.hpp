#pragma once

// Per-tick grid-search decisions with finite look-ahead anticipation, the
// additive noise model, and the closed-loop adaptive simulation.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trafficgame/anticipation.hpp"
#include "trafficgame/dynamics.hpp"
#include "trafficgame/utility.hpp"

namespace trafficgame {

struct Scenario;

struct ActionGrid {
  std::vector<double> alpha_values;  // m/s^2, strictly increasing
  std::vector<double> delta_values;  // rad, strictly increasing
  /// [min, max, step] the axes were built from; step 0 when built by hand.
  std::array<double, 3> alpha_range{};      // m/s^2
  std::array<double, 3> delta_range_deg{};  // deg

  /// alpha in [-6, 5] step 0.5, delta in [-2, 2] deg step 0.02.
  static ActionGrid standard();
  static ActionGrid uniform(double alpha_lo, double alpha_hi, double alpha_step,
                            double delta_lo_deg, double delta_hi_deg,
                            double delta_step_deg);
  void validate() const;
  std::size_t size() const { return alpha_values.size() * delta_values.size(); }
  ActionPair at(std::size_t index) const;
};

enum class NoiseDistribution { kNone, kGaussianIid };

struct NoiseModel {
  std::array<double, 4> state_sigma{};   // x, y, psi (rad), v
  std::array<double, 2> action_sigma{};  // alpha, delta (rad)
  NoiseDistribution distribution = NoiseDistribution::kNone;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Standard normal draw keyed by (seed, agent, tick, field). Stateless, so
/// the order in which agents are processed cannot change any draw.
double counter_gaussian(std::uint64_t seed, AgentId agent, int tick, int field);

/// Perceived state and realized action for one agent at one tick.
std::pair<VehicleState, ActionPair> apply_noise(const NoiseModel& noise,
                                                const VehicleState& s,
                                                const ActionPair& a, int tick,
                                                AgentId agent_id);

/// What one agent knows about another at decision time.
struct AgentSnapshot {
  AgentId id = 0;
  VehicleState state;
  double origin_lane_y = 0.0;
  VehicleGeometry geometry;
};

struct Decision {
  ActionPair action;
  double value = 0.0;
  std::size_t grid_index = 0;
  /// Intents considered for each neighbour, in neighbour order.
  std::vector<std::pair<AgentId, std::vector<Intent>>> neighbour_intents;
};

/// Neighbour scenario sets seen by `self` (others farther than the radius
/// are ignored).
std::vector<std::vector<PathScenario>> neighbour_scenarios(
    const AgentUtilitySpec& spec, const LookAhead& look,
    std::span<const AgentSnapshot> perceived_all, AgentId self,
    double neighbor_radius);

/// Effective utility of every grid point, row-major over (alpha, delta).
std::vector<double> evaluate_grid(const AgentUtilitySpec& spec, const LookAhead& look,
                                  const ActionGrid& grid, const AgentSnapshot& self,
                                  const ActionPair& prev_action,
                                  std::span<const std::vector<PathScenario>> sets);

/// Argmax with ties broken by smallest |(alpha, 10 delta)|, then lowest index.
std::size_t select_best(const ActionGrid& grid, std::span<const double> values);

Decision decide(const AgentUtilitySpec& spec, const LookAhead& look,
                const ActionGrid& grid, std::span<const AgentSnapshot> perceived_all,
                const ActionPair& prev_action, AgentId agent_id,
                double neighbor_radius);

ActionPair optimal_action(const AgentUtilitySpec& spec, const LookAhead& look,
                          const ActionGrid& grid,
                          std::span<const AgentSnapshot> perceived_all,
                          const ActionPair& prev_action, AgentId agent_id,
                          double neighbor_radius);

struct SimEvent {
  enum class Kind { kSpeedClamp, kScenarioSwitch, kCalamity, kEnter, kExit };
  Kind kind;
  int tick = 0;
  AgentId agent = 0;
  std::string detail;
};

std::string to_string(SimEvent::Kind kind);

struct AgentRun {
  AgentId id = 0;
  int first_tick = 0;
  Trajectory trajectory;             // realized states and actions
  std::vector<ActionPair> planned;   // pre-noise optimum per tick
  std::vector<double> effective_utility;
};

struct SimulationResult {
  std::vector<AgentRun> agents;
  std::vector<SimEvent> events;

  bool has_calamity() const;
  const AgentRun& agent(AgentId id) const;
};

SimulationResult simulate(const Scenario& scenario);
SimulationResult simulate(const Scenario& scenario, const NoiseModel& noise, int T);

}  // namespace trafficgame
