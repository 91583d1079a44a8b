#pragma once

// Scenario definition shared by both solvers, plus file loading/saving and
// a content fingerprint.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "trafficgame/adaptive.hpp"
#include "trafficgame/anticipation.hpp"
#include "trafficgame/nash.hpp"
#include "trafficgame/utility.hpp"

namespace trafficgame {

struct AgentConfig {
  AgentId id = 0;
  std::string label;
  VehicleState initial;
  AgentUtilitySpec spec;
  ActionPair initial_prev_action;
  int entry_tick = 0;
  std::optional<int> exit_tick;  // exclusive; nullopt means the run end
};

struct AdaptiveSettings {
  ActionGrid grid = ActionGrid::standard();
  double neighbor_radius = 60.0;  // m
  /// Replaces every agent's crash_lx when running the adaptive solver.
  std::optional<double> crash_lx_override;
  /// Fraction of a feature's supremum that counts as a calamity.
  double calamity_threshold = 0.99;
};

struct Scenario {
  std::string name;
  double dt = 0.2;
  int T = 40;
  RoadLayout road;
  std::vector<AgentConfig> agents;
  AnticipationConfig anticipation;
  Aggregators aggregators;
  NoiseModel noise;
  AdaptiveSettings adaptive;
  NashConfig nash;

  /// Throws ScenarioError naming the offending field.
  void validate() const;
  const AgentConfig& agent(AgentId id) const;
  /// Agent specs with the adaptive overrides applied.
  AgentUtilitySpec adaptive_spec(const AgentConfig& agent) const;
  LookAhead look_ahead() const;
  /// Full-horizon game for best-response dynamics (all agents present
  /// throughout).
  Game game() const;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

Scenario parse_scenario(std::string_view text, const std::string& source_name = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical text form. parse_scenario(to_text(s)) reproduces s.
std::string scenario_to_text(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// 64-bit FNV-1a over the canonical form, as 16 hex digits. Independent of
/// key order in the source file.
std::string scenario_fingerprint(const Scenario& scenario);

/// Names of the scenarios compiled into the library.
std::vector<std::string> bundled_scenario_names();
std::optional<std::string> bundled_scenario_text(std::string_view name);

/// A path to an existing file, or the name of a bundled scenario.
Scenario resolve_scenario(const std::string& path_or_name);

}  // namespace trafficgame
