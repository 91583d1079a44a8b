#include "trafficgame/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "trafficgame/analysis.hpp"
#include "trafficgame/export.hpp"

namespace trafficgame {

namespace {

namespace fs = std::filesystem;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_merge(std::ostream& out, const Scenario& sc,
                 const std::vector<AgentTrack>& tracks) {
  const auto roles = merge_roles(sc);
  if (!roles || tracks.size() != 2) return;
  const MergeSummary m =
      summarize_merge(tracks[roles->merging].trajectory, tracks[roles->through].trajectory,
                      roles->target_lane_y);
  out << fmt::format("merge: {} (final |y - {:g}| = {:.3f} m, min gap {}, maneuver end {:.1f} s)\n",
                     to_string(m.order), roles->target_lane_y, m.final_lateral_error,
                     m.min_gap ? fmt::format("{:.2f} m", *m.min_gap) : std::string("n/a"),
                     m.maneuver_end_s);
}

struct SimulateArgs {
  std::string solver;
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter;
  std::optional<double> tol;
};

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    return env;
  }
  throw InputError(fmt::format("no output directory: pass --out or set {}", kOutDirEnv));
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  Scenario sc = resolve_scenario(a.scenario);
  const fs::path dir = output_dir(a.out);
  if (a.solver == "nash") {
    if (a.seed) sc.nash.best_response.rng_seed = *a.seed;
    if (a.max_iter) sc.nash.max_iterations = *a.max_iter;
    if (a.tol) sc.nash.tol = *a.tol;
    sc.validate();
    const Game game = sc.game();
    const auto t0 = std::chrono::steady_clock::now();
    const EquilibriumSolution sol = solve_nash(game, zero_sequences(game), sc.nash);
    const RunResult r = make_result(sc, sol, seconds_since(t0));
    export_result(r, dir);
    out << fmt::format("nash on {}: converged={} iterations={} certificate gain={:.3g} ({})\n",
                       sc.name, sol.converged, sol.iterations_used,
                       sol.certificate.max_unilateral_gain,
                       sol.certificate.passed ? "pass" : "fail");
    for (std::size_t i = 0; i < sol.utilities.size(); ++i) {
      out << fmt::format("  agent {} utility {:.6f}\n", game.agents[i].id, sol.utilities[i]);
    }
    print_merge(out, sc, r.tracks);
    out << fmt::format("wrote {}\n", dir.string());
    return sol.converged ? kExitOk : kExitNotConverged;
  }
  if (a.solver == "adaptive") {
    if (a.max_iter || a.tol) throw InputError("--max-iter and --tol apply to the nash solver");
    if (a.seed) sc.noise.rng_seed = *a.seed;
    sc.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const SimulationResult sim = simulate(sc);
    const RunResult r = make_result(sc, sim, seconds_since(t0));
    export_result(r, dir);
    const auto calamities = std::count_if(sim.events.begin(), sim.events.end(), [](const SimEvent& e) {
      return e.kind == SimEvent::Kind::kCalamity;
    });
    out << fmt::format("adaptive on {}: {} agents, {} calamity events\n", sc.name,
                       sim.agents.size(), calamities);
    print_merge(out, sc, r.tracks);
    out << fmt::format("wrote {}\n", dir.string());
    return kExitOk;
  }
  throw InputError(fmt::format("unknown solver '{}'", a.solver));
}

int run_verify(const std::string& result_dir, std::ostream& out) {
  const RunResult r = load_result(result_dir);
  if (r.solver != "nash") throw InputError("verify needs a nash result");
  const Game game = r.scenario.game();
  std::vector<DeviationSample> curves;
  const NashConfig& cfg = r.scenario.nash;
  const NashCertificate cert =
      verify_nash(game, action_sequences(r), cfg.accel_probes(), cfg.steer_probes(),
                  cfg.certificate_tol, &curves);
  export_deviation(curves, result_dir);
  out << fmt::format("certificate: max unilateral gain {:.3g} (tol {:g}) over {}: {}\n",
                     cert.max_unilateral_gain, cfg.certificate_tol, cert.probe_grid,
                     cert.passed ? "pass" : "fail");
  if (!cert.passed) {
    out << fmt::format("  worst: agent {} tick {} {}\n", cert.worst_agent, cert.worst_tick,
                       cert.worst_coordinate == 0 ? "alpha" : "delta");
  }
  return cert.passed ? kExitOk : kExitNotConverged;
}

int run_probe(const std::string& scenario, int starts, std::uint64_t seed, std::ostream& out) {
  if (starts < 1) throw InputError("--starts must be >= 1");
  const Scenario sc = resolve_scenario(scenario);
  const Game game = sc.game();
  const auto t0 = std::chrono::steady_clock::now();
  const ProbeReport rep = probe_equilibria(game, sc.nash, starts, seed);
  out << fmt::format("{} starts on {}: {} distinct equilibria, {} unconverged ({:.1f} s)\n",
                     starts, sc.name, rep.solutions.size(), rep.unconverged, seconds_since(t0));
  const auto roles = merge_roles(sc);
  for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
    const EquilibriumSolution& s = rep.solutions[i];
    std::string utilities;
    for (double u : s.utilities) utilities += fmt::format(" {:.4f}", u);
    std::string order;
    if (roles) {
      order = " " + to_string(merge_order(s.trajectories[roles->merging],
                                          s.trajectories[roles->through])) +
              " merge";
    }
    out << fmt::format("  #{}: {} hits{}, utilities{}\n", i, rep.hit_counts[i], order,
                       utilities);
  }
  return rep.solutions.empty() ? kExitNotConverged : kExitOk;
}

int run_compare(const std::string& a_dir, const std::string& b_dir, std::ostream& out,
                std::ostream& err) {
  const RunResult a = load_result(a_dir);
  const RunResult b = load_result(b_dir);
  if (a.fingerprint != b.fingerprint) {
    err << "warning: the two runs come from different scenarios\n";
  }
  out << fmt::format("# a = {} ({}), b = {} ({})\n", a_dir, a.solver, b_dir, b.solver);
  out << "tick,agent,dx_m,dy_m,dpsi_deg,dv_mps,dalpha_mps2,ddelta_deg\n";
  for (const AgentTrack& ta : a.tracks) {
    const auto it = std::find_if(b.tracks.begin(), b.tracks.end(),
                                 [&](const AgentTrack& t) { return t.id == ta.id; });
    if (it == b.tracks.end()) continue;
    const AgentTrack& tb = *it;
    double max_dx = 0.0, max_dy = 0.0, max_da = 0.0, max_dd = 0.0;
    const int first = std::max(ta.first_tick, tb.first_tick);
    const int last = std::min(ta.first_tick + static_cast<int>(ta.trajectory.states.size()),
                              tb.first_tick + static_cast<int>(tb.trajectory.states.size()));
    for (int tick = first; tick < last; ++tick) {
      const std::size_t ka = tick - ta.first_tick, kb = tick - tb.first_tick;
      const VehicleState& sa = ta.trajectory.states[ka];
      const VehicleState& sb = tb.trajectory.states[kb];
      std::string act = ",";
      if (ka < ta.trajectory.actions.size() && kb < tb.trajectory.actions.size()) {
        const double da = ta.trajectory.actions[ka].accel_alpha -
                          tb.trajectory.actions[kb].accel_alpha;
        const double dd = rad_to_deg(ta.trajectory.actions[ka].steer_delta -
                                     tb.trajectory.actions[kb].steer_delta);
        max_da = std::max(max_da, std::abs(da));
        max_dd = std::max(max_dd, std::abs(dd));
        act = fmt::format("{:.6g},{:.6g}", da, dd);
      }
      max_dx = std::max(max_dx, std::abs(sa.x - sb.x));
      max_dy = std::max(max_dy, std::abs(sa.y - sb.y));
      out << fmt::format("{},{},{:.6g},{:.6g},{:.6g},{:.6g},{}\n", tick, ta.id, sa.x - sb.x,
                         sa.y - sb.y, rad_to_deg(sa.heading_psi - sb.heading_psi),
                         sa.speed_v - sb.speed_v, act);
    }
    out << fmt::format(
        "# agent {}: max |dx| {:.3f} m, |dy| {:.3f} m, |dalpha| {:.3f}, |ddelta| {:.3f} deg; "
        "maneuver end a {:.1f} s, b {:.1f} s\n",
        ta.id, max_dx, max_dy, max_da, max_dd, maneuver_end_time(ta.trajectory),
        maneuver_end_time(tb.trajectory));
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-lane traffic game solvers", "trafficgame"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a solver on a scenario and export the result");
  simulate_cmd->add_option("--solver", sim.solver, "nash or adaptive")
      ->required()
      ->check(CLI::IsMember({"nash", "adaptive"}));
  simulate_cmd->add_option("--scenario", sim.scenario, "Scenario file or bundled name")->required();
  simulate_cmd->add_option("--out", sim.out,
                           fmt::format("Output directory (default: ${})", kOutDirEnv));
  simulate_cmd->add_option("--seed", sim.seed, "Noise seed (adaptive) or restart seed (nash)");
  simulate_cmd->add_option("--max-iter", sim.max_iter, "Best-response sweep budget")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--tol", sim.tol, "Fixed-point tolerance")->check(CLI::PositiveNumber);

  std::string result_dir;
  auto* verify_cmd = app.add_subcommand("verify", "Re-run the Nash certificate on a result");
  verify_cmd->add_option("--result", result_dir, "Result directory")->required();

  std::string probe_scenario;
  int starts = 20;
  std::uint64_t probe_seed = 2024;
  auto* probe_cmd = app.add_subcommand("probe", "Search for equilibria from random starts");
  probe_cmd->add_option("--scenario", probe_scenario, "Scenario file or bundled name")->required();
  probe_cmd->add_option("--starts", starts, "Number of starts")->capture_default_str();
  probe_cmd->add_option("--seed", probe_seed, "Seed for the random starts")->capture_default_str();

  std::string a_dir, b_dir;
  auto* compare_cmd = app.add_subcommand("compare", "Per-tick deltas between two results");
  compare_cmd->add_option("--a", a_dir, "First result directory")->required();
  compare_cmd->add_option("--b", b_dir, "Second result directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*simulate_cmd) return run_simulate(sim, out);
    if (*verify_cmd) return run_verify(result_dir, out);
    if (*probe_cmd) return run_probe(probe_scenario, starts, probe_seed, out);
    if (*compare_cmd) return run_compare(a_dir, b_dir, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ExportError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitInputError;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace trafficgame
