#include "trafficgame/nash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "box_lbfgs.hpp"
#include "rng.hpp"

namespace trafficgame {

namespace {

// Optimizer coordinates: acceleration as-is, steering in degrees.
constexpr double kSteerVarScale = 180.0 / kPi;

std::vector<double> to_vars(const std::vector<ActionPair>& actions) {
  std::vector<double> z(2 * actions.size());
  for (std::size_t t = 0; t < actions.size(); ++t) {
    z[2 * t] = actions[t].accel_alpha;
    z[2 * t + 1] = actions[t].steer_delta * kSteerVarScale;
  }
  return z;
}

std::vector<ActionPair> from_vars(std::span<const double> z) {
  std::vector<ActionPair> actions(z.size() / 2);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    actions[t].accel_alpha = z[2 * t];
    actions[t].steer_delta = z[2 * t + 1] / kSteerVarScale;
  }
  return actions;
}

std::vector<Trajectory> others_of(const std::vector<Trajectory>& all, std::size_t i) {
  std::vector<Trajectory> out;
  out.reserve(all.size() - 1);
  for (std::size_t j = 0; j < all.size(); ++j) {
    if (j != i) out.push_back(all[j]);
  }
  return out;
}

void check_profile(const Game& game, const std::vector<ActionSequence>& seqs) {
  if (seqs.size() != game.agents.size()) {
    throw std::invalid_argument("one action sequence per agent is required");
  }
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].actions.size() != static_cast<std::size_t>(game.T)) {
      throw std::invalid_argument("action sequence length must equal T");
    }
    if (seqs[i].agent_id != game.agents[i].id) {
      throw std::invalid_argument("action sequences must follow agent order");
    }
  }
}

std::vector<double> symmetric_probes(double span, int points) {
  std::vector<double> out;
  if (points < 2) return {0.0};
  for (int k = 0; k < points; ++k) {
    out.push_back(-span + 2.0 * span * k / (points - 1));
  }
  return out;
}

}  // namespace

std::size_t Game::index_of(AgentId id) const {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].id == id) return i;
  }
  throw std::invalid_argument(fmt::format("unknown agent id {}", id));
}

void Game::validate() const {
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (agents.empty()) throw std::invalid_argument("game needs at least one agent");
  std::set<AgentId> ids;
  for (const GameAgent& a : agents) {
    if (!ids.insert(a.id).second) {
      throw std::invalid_argument(fmt::format("duplicate agent id {}", a.id));
    }
    a.spec.params.validate();
    a.spec.geometry.validate();
  }
}

void BestResponseConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (!(perturb_accel > 0.0 && perturb_steer > 0.0)) {
    throw std::invalid_argument("perturbation scale must be positive");
  }
  if (!(alpha_bounds.first < alpha_bounds.second) ||
      !(delta_bounds.first < delta_bounds.second)) {
    throw std::invalid_argument("optimizer bounds must be nonempty");
  }
  if (local_opt_max_evals < 1) {
    throw std::invalid_argument("local_opt_max_evals must be >= 1");
  }
}

void NashConfig::validate() const {
  best_response.validate();
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!(certificate_tol >= 0.0)) {
    throw std::invalid_argument("certificate_tol must be non-negative");
  }
}

std::vector<double> NashConfig::accel_probes() const {
  return symmetric_probes(probe_accel_span, probe_points);
}

std::vector<double> NashConfig::steer_probes() const {
  return symmetric_probes(probe_steer_span, probe_points);
}

std::vector<ActionSequence> zero_sequences(const Game& game) {
  std::vector<ActionSequence> out;
  for (const GameAgent& a : game.agents) {
    out.push_back({a.id, std::vector<ActionPair>(game.T)});
  }
  return out;
}

std::vector<Trajectory> rollout_all(const Game& game,
                                    const std::vector<ActionSequence>& sequences) {
  check_profile(game, sequences);
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < game.agents.size(); ++i) {
    out.push_back(rollout(game.agents[i].spec.geometry, game.agents[i].initial,
                          sequences[i].actions, game.dt));
  }
  return out;
}

double agent_utility(const Game& game, const std::vector<ActionSequence>& sequences,
                     std::size_t index) {
  const std::vector<Trajectory> all = rollout_all(game, sequences);
  const std::vector<Trajectory> others = others_of(all, index);
  const GameAgent& a = game.agents[index];
  return cumulative_utility(a.spec, a.initial, sequences[index].actions, others,
                            game.dt, a.initial_prev_action);
}

double sequence_distance(const std::vector<ActionSequence>& a,
                         const std::vector<ActionSequence>& b, double steer_weight) {
  if (a.size() != b.size()) throw std::invalid_argument("profile sizes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].actions.size() != b[i].actions.size()) {
      throw std::invalid_argument("sequence lengths differ");
    }
    for (std::size_t t = 0; t < a[i].actions.size(); ++t) {
      worst = std::max(worst, std::abs(a[i].actions[t].accel_alpha -
                                       b[i].actions[t].accel_alpha));
      worst = std::max(worst, steer_weight * std::abs(a[i].actions[t].steer_delta -
                                                      b[i].actions[t].steer_delta));
    }
  }
  return worst;
}

BestResponse best_response(const Game& game,
                           const std::vector<ActionSequence>& sequences,
                           std::size_t agent_index, const BestResponseConfig& cfg,
                           std::uint64_t stream) {
  check_profile(game, sequences);
  if (agent_index >= game.agents.size()) {
    throw std::invalid_argument("agent index out of range");
  }
  const GameAgent& agent = game.agents[agent_index];
  const std::vector<Trajectory> others = others_of(rollout_all(game, sequences), agent_index);
  const std::size_t n = 2 * static_cast<std::size_t>(game.T);

  std::vector<double> lower(n), upper(n);
  for (std::size_t t = 0; t < n / 2; ++t) {
    lower[2 * t] = cfg.alpha_bounds.first;
    upper[2 * t] = cfg.alpha_bounds.second;
    lower[2 * t + 1] = cfg.delta_bounds.first * kSteerVarScale;
    upper[2 * t + 1] = cfg.delta_bounds.second * kSteerVarScale;
  }

  std::vector<double> grad;
  const detail::ValueAndGradient objective = [&](std::span<const double> z,
                                                 std::span<double> g) {
    const std::vector<ActionPair> actions = from_vars(z);
    const double u = cumulative_utility_gradient(agent.spec, agent.initial, actions,
                                                 others, game.dt, grad,
                                                 agent.initial_prev_action);
    for (std::size_t t = 0; t < n / 2; ++t) {
      g[2 * t] = -grad[2 * t];
      g[2 * t + 1] = -grad[2 * t + 1] / kSteerVarScale;
    }
    return -u;
  };

  detail::BoxLbfgsOptions opts;
  opts.max_evals = cfg.local_opt_max_evals;
  opts.gradient_tolerance = cfg.gradient_tolerance;

  BestResponse out;
  out.sequence = sequences[agent_index];
  out.incumbent_utility =
      cumulative_utility(agent.spec, agent.initial, out.sequence.actions, others,
                         game.dt, agent.initial_prev_action);
  out.utility = out.incumbent_utility;

  const std::vector<double> incumbent = to_vars(out.sequence.actions);
  detail::BoxLbfgsResult local = minimize_box_lbfgs(objective, incumbent, lower, upper, opts);
  out.budget_exhausted = local.budget_exhausted;
  std::vector<double> best_z = local.x;
  double best_u = -local.f;

  // Basin hopping: perturb the best point so far and re-polish.
  detail::CounterStream rng(detail::derive_seed(cfg.rng_seed, {stream, agent_index}));
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> start = best_z;
    for (std::size_t t = 0; t < n / 2; ++t) {
      start[2 * t] += rng.uniform(-cfg.perturb_accel, cfg.perturb_accel);
      start[2 * t + 1] += rng.uniform(-cfg.perturb_steer, cfg.perturb_steer) * kSteerVarScale;
    }
    for (std::size_t i = 0; i < n; ++i) start[i] = std::clamp(start[i], lower[i], upper[i]);
    detail::BoxLbfgsResult hop = minimize_box_lbfgs(objective, start, lower, upper, opts);
    const double u = -hop.f;
    if (u > best_u + 1e-10 * std::max(1.0, std::abs(best_u))) {
      best_u = u;
      best_z = std::move(hop.x);
    }
  }

  if (best_u > out.incumbent_utility) {
    out.sequence.actions = from_vars(best_z);
    // Report the utility of the exact returned actions.
    out.utility = cumulative_utility(agent.spec, agent.initial, out.sequence.actions,
                                     others, game.dt, agent.initial_prev_action);
    if (out.utility < out.incumbent_utility) {
      out.sequence = sequences[agent_index];
      out.utility = out.incumbent_utility;
    }
  }
  return out;
}

NashCertificate verify_nash(const Game& game,
                            const std::vector<ActionSequence>& sequences,
                            const std::vector<double>& accel_probes,
                            const std::vector<double>& steer_probes, double tol,
                            std::vector<DeviationSample>* curves) {
  check_profile(game, sequences);
  const std::vector<Trajectory> all = rollout_all(game, sequences);
  NashCertificate cert;
  cert.probe_grid = fmt::format(
      "accel {} probes in [{}, {}] m/s^2; steer {} probes in [{}, {}] deg",
      accel_probes.size(),
      accel_probes.empty() ? 0.0 : accel_probes.front(),
      accel_probes.empty() ? 0.0 : accel_probes.back(), steer_probes.size(),
      steer_probes.empty() ? 0.0 : rad_to_deg(steer_probes.front()),
      steer_probes.empty() ? 0.0 : rad_to_deg(steer_probes.back()));
  cert.max_unilateral_gain = -std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < game.agents.size(); ++i) {
    const GameAgent& agent = game.agents[i];
    const std::vector<Trajectory> others = others_of(all, i);
    std::vector<ActionPair> actions = sequences[i].actions;
    const double base = cumulative_utility(agent.spec, agent.initial, actions, others,
                                           game.dt, agent.initial_prev_action);
    for (int t = 0; t < game.T; ++t) {
      for (int coord = 0; coord < 2; ++coord) {
        const std::vector<double>& probes = coord == 0 ? accel_probes : steer_probes;
        const ActionPair original = actions[t];
        for (double delta : probes) {
          double u = base;
          if (delta != 0.0) {
            if (coord == 0) {
              actions[t].accel_alpha = original.accel_alpha + delta;
            } else {
              actions[t].steer_delta = std::clamp(original.steer_delta + delta,
                                                  -kPi / 2.0 + 1e-9, kPi / 2.0 - 1e-9);
            }
            u = cumulative_utility(agent.spec, agent.initial, actions, others, game.dt,
                                   agent.initial_prev_action);
            actions[t] = original;
            const double gain = u - base;
            if (gain > cert.max_unilateral_gain) {
              cert.max_unilateral_gain = gain;
              cert.worst_agent = agent.id;
              cert.worst_tick = t;
              cert.worst_coordinate = coord;
            }
          }
          if (curves != nullptr) curves->push_back({agent.id, t, coord, delta, u});
        }
      }
    }
  }
  if (!std::isfinite(cert.max_unilateral_gain)) cert.max_unilateral_gain = 0.0;
  cert.passed = cert.max_unilateral_gain <= tol;
  return cert;
}

EquilibriumSolution solve_nash(const Game& game,
                               std::vector<ActionSequence> initial_sequences,
                               const NashConfig& cfg) {
  game.validate();
  cfg.validate();
  check_profile(game, initial_sequences);

  EquilibriumSolution sol;
  std::vector<ActionSequence> current = std::move(initial_sequences);
  const std::vector<double> accel_probes = cfg.accel_probes();
  const std::vector<double> steer_probes = cfg.steer_probes();
  bool certified = false;

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    const std::vector<ActionSequence> previous = current;
    for (std::size_t i = 0; i < game.agents.size(); ++i) {
      const std::vector<ActionSequence>& basis = cfg.sequential ? current : previous;
      BestResponse br = best_response(game, basis, i, cfg.best_response,
                                      static_cast<std::uint64_t>(iter));
      sol.budget_exhausted = sol.budget_exhausted || br.budget_exhausted;
      current[i] = std::move(br.sequence);
    }
    sol.iterations_used = iter;
    const double change = sequence_distance(previous, current, cfg.steer_weight);
    sol.sweep_changes.push_back(change);
    if (change < cfg.tol) {
      sol.certificate =
          verify_nash(game, current, accel_probes, steer_probes, cfg.certificate_tol);
      if (sol.certificate.passed) {
        certified = true;
        break;
      }
    }
  }
  if (!certified) {
    sol.certificate =
        verify_nash(game, current, accel_probes, steer_probes, cfg.certificate_tol);
  }
  sol.converged = certified;
  sol.trajectories = rollout_all(game, current);
  for (std::size_t i = 0; i < game.agents.size(); ++i) {
    const GameAgent& a = game.agents[i];
    sol.utilities.push_back(cumulative_utility(a.spec, a.initial, current[i].actions,
                                               others_of(sol.trajectories, i), game.dt,
                                               a.initial_prev_action));
  }
  sol.sequences = std::move(current);
  return sol;
}

ProbeReport probe_equilibria(const Game& game, const NashConfig& cfg,
                             int n_random_starts, std::uint64_t rng_seed,
                             double init_accel_span, double init_steer_span) {
  if (n_random_starts < 1) throw std::invalid_argument("n_random_starts must be >= 1");
  ProbeReport report;
  for (int s = 0; s < n_random_starts; ++s) {
    std::vector<ActionSequence> init = zero_sequences(game);
    NashConfig run_cfg = cfg;
    if (s > 0) {
      detail::CounterStream rng(detail::derive_seed(rng_seed, {static_cast<std::uint64_t>(s)}));
      for (ActionSequence& seq : init) {
        for (ActionPair& a : seq.actions) {
          a.accel_alpha = rng.uniform(-init_accel_span, init_accel_span);
          a.steer_delta = rng.uniform(-init_steer_span, init_steer_span);
        }
      }
      run_cfg.best_response.rng_seed =
          detail::derive_seed(cfg.best_response.rng_seed, {static_cast<std::uint64_t>(s)});
    }
    EquilibriumSolution sol = solve_nash(game, std::move(init), run_cfg);
    if (!sol.converged) {
      ++report.unconverged;
      report.start_assignment.push_back(-1);
      continue;
    }
    int match = -1;
    for (std::size_t k = 0; k < report.solutions.size(); ++k) {
      if (sequence_distance(report.solutions[k].sequences, sol.sequences,
                            cfg.steer_weight) <= cfg.dedup_threshold) {
        match = static_cast<int>(k);
        break;
      }
    }
    if (match < 0) {
      report.solutions.push_back(std::move(sol));
      report.hit_counts.push_back(1);
      match = static_cast<int>(report.solutions.size()) - 1;
    } else {
      ++report.hit_counts[match];
    }
    report.start_assignment.push_back(match);
  }
  return report;
}

}  // namespace trafficgame
