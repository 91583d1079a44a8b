#pragma once

// Best-response dynamics over full-horizon action sequences, Nash
// certification by single-coordinate deviation probes, and
// multi-start equilibrium probing.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trafficgame/anticipation.hpp"
#include "trafficgame/dynamics.hpp"
#include "trafficgame/utility.hpp"

namespace trafficgame {

struct ActionSequence {
  AgentId agent_id = 0;
  std::vector<ActionPair> actions;
};

struct GameAgent {
  AgentId id = 0;
  AgentUtilitySpec spec;
  VehicleState initial;
  ActionPair initial_prev_action;
};

struct Game {
  std::vector<GameAgent> agents;
  double dt = 0.2;
  int T = 40;

  std::size_t index_of(AgentId id) const;
  void validate() const;
};

struct BestResponseConfig {
  int restarts = 6;
  double perturb_accel = 0.5;                  // m/s^2
  double perturb_steer = deg_to_rad(0.25);     // rad
  int local_opt_max_evals = 3000;
  std::pair<double, double> alpha_bounds{-8.0, 6.0};
  std::pair<double, double> delta_bounds{deg_to_rad(-15.0), deg_to_rad(15.0)};
  std::uint64_t rng_seed = 7;
  double gradient_tolerance = 1e-8;

  void validate() const;
};

struct NashConfig {
  BestResponseConfig best_response;
  int max_iterations = 30;
  double tol = 1e-3;
  /// Steering is multiplied by this before comparing with acceleration.
  double steer_weight = 10.0;
  int probe_points = 11;
  double probe_accel_span = 1.0;              // m/s^2
  double probe_steer_span = deg_to_rad(2.0);  // rad
  double certificate_tol = 1e-3;
  /// Gauss-Seidel (true) or Jacobi (false) agent updates.
  bool sequential = true;
  double dedup_threshold = 0.1;

  void validate() const;
  std::vector<double> accel_probes() const;
  std::vector<double> steer_probes() const;
};

struct NashCertificate {
  double max_unilateral_gain = 0.0;
  std::string probe_grid;
  bool passed = false;
  AgentId worst_agent = 0;
  int worst_tick = -1;
  int worst_coordinate = -1;  // 0 = accel, 1 = steer
};

struct EquilibriumSolution {
  std::vector<ActionSequence> sequences;
  std::vector<Trajectory> trajectories;
  int iterations_used = 0;
  bool converged = false;
  std::vector<double> utilities;
  NashCertificate certificate;
  /// Scaled sup-norm sequence change after each sweep.
  std::vector<double> sweep_changes;
  bool budget_exhausted = false;
};

struct BestResponse {
  ActionSequence sequence;
  double utility = 0.0;
  double incumbent_utility = 0.0;
  bool budget_exhausted = false;
};

struct DeviationSample {
  AgentId agent = 0;
  int tick = 0;
  int coordinate = 0;  // 0 = accel, 1 = steer
  double deviation = 0.0;
  double utility = 0.0;
};

std::vector<ActionSequence> zero_sequences(const Game& game);

std::vector<Trajectory> rollout_all(const Game& game,
                                    const std::vector<ActionSequence>& sequences);

/// Cumulative utility of agent `index` under the given joint sequences.
double agent_utility(const Game& game, const std::vector<ActionSequence>& sequences,
                     std::size_t index);

/// Scaled sup-norm distance between two joint action profiles.
double sequence_distance(const std::vector<ActionSequence>& a,
                         const std::vector<ActionSequence>& b, double steer_weight);

/// Multi-start local maximisation of one agent's cumulative utility with
/// the others held fixed. Never returns worse than the incumbent.
BestResponse best_response(const Game& game,
                           const std::vector<ActionSequence>& sequences,
                           std::size_t agent_index, const BestResponseConfig& cfg,
                           std::uint64_t stream = 0);

NashCertificate verify_nash(const Game& game,
                            const std::vector<ActionSequence>& sequences,
                            const std::vector<double>& accel_probes,
                            const std::vector<double>& steer_probes, double tol,
                            std::vector<DeviationSample>* curves = nullptr);

EquilibriumSolution solve_nash(const Game& game,
                               std::vector<ActionSequence> initial_sequences,
                               const NashConfig& cfg);

struct ProbeReport {
  std::vector<EquilibriumSolution> solutions;  // deduplicated, first-seen order
  std::vector<int> hit_counts;
  std::vector<int> start_assignment;  // solution index per start, -1 if unconverged
  int unconverged = 0;
};

/// Runs solve_nash from n_random_starts initial profiles. Start 0 is the
/// all-zero profile; the rest are uniform draws within the given spans.
ProbeReport probe_equilibria(const Game& game, const NashConfig& cfg,
                             int n_random_starts, std::uint64_t rng_seed,
                             double init_accel_span = 1.0,
                             double init_steer_span = deg_to_rad(0.5));

}  // namespace trafficgame
