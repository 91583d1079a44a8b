#pragma once

// Run results on disk: CSV tables, a JSON metadata document, SVG plots,
// and a copy of the scenario that produced them.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "trafficgame/adaptive.hpp"
#include "trafficgame/nash.hpp"
#include "trafficgame/scenario.hpp"

namespace trafficgame {

std::string_view version();

inline constexpr std::string_view kTableHeader =
    "tick,time_s,agent,x_m,y_m,psi_deg,v_mps,alpha_mps2,delta_deg";

struct AgentTrack {
  AgentId id = 0;
  std::string label;
  int first_tick = 0;
  Trajectory trajectory;
  std::vector<ActionPair> planned;  // adaptive only
};

struct NashSummary {
  bool converged = false;
  int iterations = 0;
  std::vector<double> utilities;
  std::vector<double> sweep_changes;
  NashCertificate certificate;
};

struct RunResult {
  Scenario scenario;
  std::string solver;  // "nash" or "adaptive"
  std::string fingerprint;
  std::string tool_version;
  double wall_time_s = 0.0;
  std::vector<AgentTrack> tracks;
  std::optional<NashSummary> nash;
  std::vector<SimEvent> events;

  const AgentTrack& track(AgentId id) const;
  bool has_calamity() const;
};

RunResult make_result(const Scenario& scenario, const EquilibriumSolution& solution,
                      double wall_time_s);
RunResult make_result(const Scenario& scenario, const SimulationResult& sim,
                      double wall_time_s);

/// Action sequences of a full-horizon run, in scenario agent order.
std::vector<ActionSequence> action_sequences(const RunResult& result);

class ExportError : public std::runtime_error {
 public:
  explicit ExportError(const std::string& what) : std::runtime_error(what) {}
};

std::string trajectories_csv(const RunResult& result);
std::string actions_csv(const RunResult& result);
std::string planned_actions_csv(const RunResult& result);
std::string run_json(const RunResult& result);
std::string trajectories_svg(const RunResult& result);
std::string actions_svg(const RunResult& result);

/// Writes the file set into out_dir (created if missing) and returns the
/// paths written.
std::vector<std::filesystem::path> export_result(const RunResult& result,
                                                 const std::filesystem::path& out_dir);

/// Reads a directory written by export_result.
RunResult load_result(const std::filesystem::path& dir);

std::string deviation_csv(const std::vector<DeviationSample>& samples);
std::string deviation_svg(const std::vector<DeviationSample>& samples);
std::vector<std::filesystem::path> export_deviation(
    const std::vector<DeviationSample>& samples, const std::filesystem::path& out_dir);

}  // namespace trafficgame
