#include "trafficgame/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "bundled_scenarios.hpp"

namespace trafficgame {

namespace {

constexpr std::array<const char*, kNumFeatures> kFeatureKeys{
    "forward",        "accel_smooth", "steer_smooth", "hard_accel",
    "lane_departure", "out_of_road",  "crash",        "collision"};

// ---------------------------------------------------------------- reading

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const YAML::Mark m = node.Mark();
    if (m.line >= 0) {
      throw ScenarioError(fmt::format("{}:{}:{}: {}", source_, m.line + 1, m.column + 1, msg));
    }
    throw ScenarioError(fmt::format("{}: {}", source_, msg));
  }

  void expect_map(const YAML::Node& node, const std::string& where,
                  std::initializer_list<const char*> allowed) const {
    if (!node.IsMap()) fail(node, fmt::format("'{}' must be a mapping", where));
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* k) { return key == k; });
      if (!known) fail(kv.first, fmt::format("unknown key '{}' in '{}'", key, where));
    }
  }

  double number(const YAML::Node& parent, const char* key, double fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    return as_number(n, key);
  }

  double as_number(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, fmt::format("'{}' must be a number", key));
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, fmt::format("'{}' must be a number, got '{}'", key, n.Scalar()));
    }
  }

  int integer(const YAML::Node& parent, const char* key, int fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    if (!n.IsScalar()) fail(n, fmt::format("'{}' must be an integer", key));
    try {
      return n.as<int>();
    } catch (const YAML::Exception&) {
      fail(n, fmt::format("'{}' must be an integer, got '{}'", key, n.Scalar()));
    }
  }

  std::uint64_t unsigned64(const YAML::Node& parent, const char* key,
                           std::uint64_t fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    try {
      return n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail(n, fmt::format("'{}' must be a non-negative integer", key));
    }
  }

  bool boolean(const YAML::Node& parent, const char* key, bool fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, fmt::format("'{}' must be true or false", key));
    }
  }

  std::string text(const YAML::Node& parent, const char* key,
                   const std::string& fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    if (!n.IsScalar()) fail(n, fmt::format("'{}' must be a string", key));
    return n.Scalar();
  }

  std::vector<double> numbers(const YAML::Node& parent, const char* key) const {
    const YAML::Node n = parent[key];
    if (!n.IsSequence()) fail(n ? n : parent, fmt::format("'{}' must be a list", key));
    std::vector<double> out;
    for (const auto& item : n) out.push_back(as_number(item, key));
    return out;
  }

  std::pair<double, double> range(const YAML::Node& parent, const char* key,
                                  std::pair<double, double> fallback) const {
    if (!parent[key]) return fallback;
    const std::vector<double> v = numbers(parent, key);
    if (v.size() != 2) fail(parent[key], fmt::format("'{}' must have two entries", key));
    return {v[0], v[1]};
  }

 private:
  std::string source_;
};

UtilityParams read_params(const Reader& r, const YAML::Node& n) {
  UtilityParams p;
  if (!n) return p;
  r.expect_map(n, "utility",
               {"speed_limit_mps", "accel_max_mps2", "accel_min_mps2", "kappa4",
                "lane_width_m", "kappa6", "crash_lx_m", "crash_ly_m", "kappa7x",
                "kappa7y", "collision_lx_m", "collision_ly_m", "kappa8x", "kappa8y",
                "steer_roughness_per_rad"});
  p.speed_limit_v0 = r.number(n, "speed_limit_mps", p.speed_limit_v0);
  p.accel_max = r.number(n, "accel_max_mps2", p.accel_max);
  p.accel_min = r.number(n, "accel_min_mps2", p.accel_min);
  p.kappa4 = r.number(n, "kappa4", p.kappa4);
  p.lane_width_W = r.number(n, "lane_width_m", p.lane_width_W);
  p.kappa6 = r.number(n, "kappa6", p.kappa6);
  p.crash_lx = r.number(n, "crash_lx_m", p.crash_lx);
  p.crash_ly = r.number(n, "crash_ly_m", p.crash_ly);
  p.kappa7x = r.number(n, "kappa7x", p.kappa7x);
  p.kappa7y = r.number(n, "kappa7y", p.kappa7y);
  p.coll_lx = r.number(n, "collision_lx_m", p.coll_lx);
  p.coll_ly = r.number(n, "collision_ly_m", p.coll_ly);
  p.kappa8x = r.number(n, "kappa8x", p.kappa8x);
  p.kappa8y = r.number(n, "kappa8y", p.kappa8y);
  p.steer_roughness_scale = r.number(n, "steer_roughness_per_rad", p.steer_roughness_scale);
  return p;
}

UtilityWeights read_weights(const Reader& r, const YAML::Node& n) {
  UtilityWeights w;
  if (!n) return w;
  r.expect_map(n, "weights", {"forward", "accel_smooth", "steer_smooth", "hard_accel",
                              "lane_departure", "out_of_road", "crash", "collision"});
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    w.w[k] = r.number(n, kFeatureKeys[k], w.w[k]);
  }
  return w;
}

VehicleGeometry read_geometry(const Reader& r, const YAML::Node& n) {
  VehicleGeometry g;
  if (!n) return g;
  r.expect_map(n, "geometry", {"wheelbase_m", "cg_to_rear_m", "width_m", "length_m"});
  g.wheelbase_L = r.number(n, "wheelbase_m", g.wheelbase_L);
  g.cg_to_rear_b = r.number(n, "cg_to_rear_m", g.cg_to_rear_b);
  g.body_width = r.number(n, "width_m", g.body_width);
  g.body_length = r.number(n, "length_m", g.body_length);
  return g;
}

AgentConfig read_agent(const Reader& r, const YAML::Node& n) {
  r.expect_map(n, "agents[]",
               {"id", "label", "x_m", "y_m", "psi_deg", "speed_mps", "prev_alpha_mps2",
                "prev_steer_deg", "entry_tick", "exit_tick", "utility", "weights",
                "geometry"});
  if (!n["id"]) r.fail(n, "agent is missing 'id'");
  AgentConfig a;
  a.id = r.integer(n, "id", 0);
  a.label = r.text(n, "label", "");
  for (const char* key : {"x_m", "y_m", "speed_mps"}) {
    if (!n[key]) r.fail(n, fmt::format("agent {} is missing '{}'", a.id, key));
  }
  try {
    a.initial = VehicleState(r.number(n, "x_m", 0.0), r.number(n, "y_m", 0.0),
                             deg_to_rad(r.number(n, "psi_deg", 0.0)),
                             r.number(n, "speed_mps", 0.0));
    a.initial_prev_action = ActionPair(r.number(n, "prev_alpha_mps2", 0.0),
                                       deg_to_rad(r.number(n, "prev_steer_deg", 0.0)));
  } catch (const std::exception& e) {
    r.fail(n, fmt::format("agent {}: {}", a.id, e.what()));
  }
  a.entry_tick = r.integer(n, "entry_tick", 0);
  if (n["exit_tick"]) a.exit_tick = r.integer(n, "exit_tick", 0);
  a.spec.params = read_params(r, n["utility"]);
  a.spec.weights = read_weights(r, n["weights"]);
  a.spec.geometry = read_geometry(r, n["geometry"]);
  return a;
}

AggregationRule parse_rule(const Reader& r, const YAML::Node& n) {
  const std::string s = n.Scalar();
  if (s == "mean") return AggregationRule::kMeanOverHorizon;
  if (s == "first") return AggregationRule::kFirstPeriod;
  if (s == "max") return AggregationRule::kMaxOverHorizon;
  r.fail(n, fmt::format("aggregation rule must be mean, first or max, got '{}'", s));
}

const char* rule_name(AggregationRule rule) {
  switch (rule) {
    case AggregationRule::kMeanOverHorizon: return "mean";
    case AggregationRule::kFirstPeriod: return "first";
    case AggregationRule::kMaxOverHorizon: return "max";
  }
  return "mean";
}

Scenario read_scenario(const Reader& r, const YAML::Node& root) {
  r.expect_map(root, "<root>",
               {"name", "dt_s", "steps", "road", "agents", "anticipation", "aggregation",
                "noise", "adaptive", "nash"});
  Scenario s;
  s.name = r.text(root, "name", "");
  s.dt = r.number(root, "dt_s", s.dt);
  s.T = r.integer(root, "steps", s.T);

  const YAML::Node road = root["road"];
  if (!road) r.fail(root, "missing 'road'");
  r.expect_map(road, "road", {"lane_centers_m", "barrier"});
  s.road.lane_centers = r.numbers(road, "lane_centers_m");
  if (const YAML::Node b = road["barrier"]) {
    r.expect_map(b, "road.barrier", {"x_m", "blocked_lane_m"});
    if (!b["x_m"] || !b["blocked_lane_m"]) r.fail(b, "barrier needs x_m and blocked_lane_m");
    s.road.barrier = Barrier{r.number(b, "x_m", 0.0), r.number(b, "blocked_lane_m", 0.0)};
  }

  const YAML::Node agents = root["agents"];
  if (!agents || !agents.IsSequence()) r.fail(agents ? agents : root, "'agents' must be a list");
  for (const auto& a : agents) s.agents.push_back(read_agent(r, a));

  if (const YAML::Node n = root["anticipation"]) {
    r.expect_map(n, "anticipation",
                 {"horizon_steps", "stanley_kappa", "persistence_fraction",
                  "crossing_threshold_m", "stanley_steer_gain", "stanley_max_steer_deg", "settle_distance_m",
                  "settle_heading_deg"});
    AnticipationConfig& c = s.anticipation;
    c.horizon_h = r.integer(n, "horizon_steps", c.horizon_h);
    c.stanley_kappa = r.number(n, "stanley_kappa", c.stanley_kappa);
    c.persistence_fraction = r.number(n, "persistence_fraction", c.persistence_fraction);
    c.crossing_threshold = r.number(n, "crossing_threshold_m", c.crossing_threshold);
    c.stanley_steer_gain = r.number(n, "stanley_steer_gain", c.stanley_steer_gain);
    c.stanley_max_steer =
        deg_to_rad(r.number(n, "stanley_max_steer_deg", rad_to_deg(c.stanley_max_steer)));
    c.settle_distance = r.number(n, "settle_distance_m", c.settle_distance);
    c.settle_heading =
        deg_to_rad(r.number(n, "settle_heading_deg", rad_to_deg(c.settle_heading)));
  }

  if (const YAML::Node n = root["aggregation"]) {
    r.expect_map(n, "aggregation", {"forward", "accel_smooth", "steer_smooth", "hard_accel",
                                    "lane_departure", "out_of_road", "crash", "collision"});
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      if (const YAML::Node rule = n[kFeatureKeys[k]]) {
        s.aggregators.rules[k] = parse_rule(r, rule);
      }
    }
  }

  if (const YAML::Node n = root["noise"]) {
    r.expect_map(n, "noise", {"distribution", "seed", "x_m", "y_m", "psi_deg", "v_mps",
                              "alpha_mps2", "delta_deg"});
    const std::string dist = r.text(n, "distribution", "none");
    if (dist == "none") {
      s.noise.distribution = NoiseDistribution::kNone;
    } else if (dist == "gaussian_iid") {
      s.noise.distribution = NoiseDistribution::kGaussianIid;
    } else {
      r.fail(n["distribution"], "noise.distribution must be none or gaussian_iid");
    }
    s.noise.rng_seed = r.unsigned64(n, "seed", 0);
    s.noise.state_sigma = {r.number(n, "x_m", 0.0), r.number(n, "y_m", 0.0),
                           deg_to_rad(r.number(n, "psi_deg", 0.0)), r.number(n, "v_mps", 0.0)};
    s.noise.action_sigma = {r.number(n, "alpha_mps2", 0.0),
                            deg_to_rad(r.number(n, "delta_deg", 0.0))};
  }

  if (const YAML::Node n = root["adaptive"]) {
    r.expect_map(n, "adaptive",
                 {"alpha_grid_mps2", "delta_grid_deg", "neighbor_radius_m",
                  "crash_lx_override_m", "calamity_threshold"});
    AdaptiveSettings& a = s.adaptive;
    if (n["alpha_grid_mps2"] || n["delta_grid_deg"]) {
      const std::vector<double> ag = n["alpha_grid_mps2"]
                                         ? r.numbers(n, "alpha_grid_mps2")
                                         : std::vector<double>{-6.0, 5.0, 0.5};
      const std::vector<double> dg = n["delta_grid_deg"]
                                         ? r.numbers(n, "delta_grid_deg")
                                         : std::vector<double>{-2.0, 2.0, 0.02};
      if (ag.size() != 3 || dg.size() != 3) {
        r.fail(n, "grids are given as [min, max, step]");
      }
      try {
        a.grid = ActionGrid::uniform(ag[0], ag[1], ag[2], dg[0], dg[1], dg[2]);
      } catch (const std::exception& e) {
        r.fail(n, fmt::format("adaptive grid: {}", e.what()));
      }
    }
    a.neighbor_radius = r.number(n, "neighbor_radius_m", a.neighbor_radius);
    if (n["crash_lx_override_m"]) a.crash_lx_override = r.number(n, "crash_lx_override_m", 0.0);
    a.calamity_threshold = r.number(n, "calamity_threshold", a.calamity_threshold);
  }

  if (const YAML::Node n = root["nash"]) {
    r.expect_map(n, "nash",
                 {"max_iterations", "tol", "steer_weight", "probe_points", "probe_accel_mps2",
                  "probe_steer_deg", "certificate_tol", "sequential", "dedup_threshold",
                  "restarts", "perturb_accel_mps2", "perturb_steer_deg",
                  "local_opt_max_evals", "alpha_bounds_mps2", "delta_bounds_deg", "seed",
                  "gradient_tolerance"});
    NashConfig& c = s.nash;
    c.max_iterations = r.integer(n, "max_iterations", c.max_iterations);
    c.tol = r.number(n, "tol", c.tol);
    c.steer_weight = r.number(n, "steer_weight", c.steer_weight);
    c.probe_points = r.integer(n, "probe_points", c.probe_points);
    c.probe_accel_span = r.number(n, "probe_accel_mps2", c.probe_accel_span);
    c.probe_steer_span =
        deg_to_rad(r.number(n, "probe_steer_deg", rad_to_deg(c.probe_steer_span)));
    c.certificate_tol = r.number(n, "certificate_tol", c.certificate_tol);
    c.sequential = r.boolean(n, "sequential", c.sequential);
    c.dedup_threshold = r.number(n, "dedup_threshold", c.dedup_threshold);
    BestResponseConfig& b = c.best_response;
    b.restarts = r.integer(n, "restarts", b.restarts);
    b.perturb_accel = r.number(n, "perturb_accel_mps2", b.perturb_accel);
    b.perturb_steer = deg_to_rad(r.number(n, "perturb_steer_deg", rad_to_deg(b.perturb_steer)));
    b.local_opt_max_evals = r.integer(n, "local_opt_max_evals", b.local_opt_max_evals);
    b.alpha_bounds = r.range(n, "alpha_bounds_mps2", b.alpha_bounds);
    const auto db = r.range(n, "delta_bounds_deg",
                            {rad_to_deg(b.delta_bounds.first), rad_to_deg(b.delta_bounds.second)});
    b.delta_bounds = {deg_to_rad(db.first), deg_to_rad(db.second)};
    b.rng_seed = r.unsigned64(n, "seed", b.rng_seed);
    b.gradient_tolerance = r.number(n, "gradient_tolerance", b.gradient_tolerance);
  }
  return s;
}

// ---------------------------------------------------------------- writing

// 15 significant digits: degree/radian conversions may move the last bit,
// and this keeps the canonical text (and fingerprint) fixed across reloads.
std::string num(double v) {
  if (v == 0.0) return "0";
  return fmt::format("{:.15g}", v);
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string grid_axis(const std::vector<double>& v, const std::array<double, 3>& range,
                      double unit) {
  if (range[2] > 0.0) {
    return fmt::format("[{}, {}, {}]", num(range[0]), num(range[1]), num(range[2]));
  }
  const double lo = v.front() / unit;
  const double hi = v.back() / unit;
  const double step = v.size() > 1 ? (v[1] - v[0]) / unit : 1.0;
  return fmt::format("[{}, {}, {}]", num(lo), num(hi), num(step));
}

}  // namespace

// ---------------------------------------------------------------- Scenario

void Scenario::validate() const {
  auto field = [](const std::string& name, auto&& check) {
    try {
      check();
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      throw ScenarioError(fmt::format("{}: {}", name, e.what()));
    }
  };
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ScenarioError("dt_s: must be positive");
  if (T < 1) throw ScenarioError("steps: must be >= 1");
  if (road.lane_centers.empty()) throw ScenarioError("road.lane_centers_m: must be nonempty");
  for (std::size_t i = 0; i < road.lane_centers.size(); ++i) {
    if (!std::isfinite(road.lane_centers[i]) ||
        (i > 0 && !(road.lane_centers[i] > road.lane_centers[i - 1]))) {
      throw ScenarioError("road.lane_centers_m: must be finite and strictly increasing");
    }
  }
  if (road.barrier) {
    if (!std::isfinite(road.barrier->x)) throw ScenarioError("road.barrier.x_m: must be finite");
    if (std::find(road.lane_centers.begin(), road.lane_centers.end(),
                  road.barrier->blocked_lane_y) == road.lane_centers.end()) {
      throw ScenarioError("road.barrier.blocked_lane_m: must be one of the lane centres");
    }
  }
  if (agents.empty()) throw ScenarioError("agents: at least one agent is required");
  std::set<AgentId> ids;
  for (const AgentConfig& a : agents) {
    const std::string where = fmt::format("agents[id={}]", a.id);
    if (!ids.insert(a.id).second) throw ScenarioError(where + ": duplicate id");
    field(where + ".utility", [&] { a.spec.params.validate(); });
    field(where + ".weights", [&] { a.spec.weights.validate(); });
    field(where + ".geometry", [&] { a.spec.geometry.validate(); });
    field(where, [&] {
      VehicleState check(a.initial.x, a.initial.y, a.initial.heading_psi, a.initial.speed_v);
      ActionPair prev(a.initial_prev_action.accel_alpha, a.initial_prev_action.steer_delta);
      (void)check;
      (void)prev;
    });
    if (a.entry_tick < 0 || a.entry_tick >= T) {
      throw ScenarioError(where + ".entry_tick: must lie in [0, steps)");
    }
    if (a.exit_tick && *a.exit_tick <= a.entry_tick) {
      throw ScenarioError(where + ".exit_tick: must be after entry_tick");
    }
    for (char c : a.label) {
      if (static_cast<unsigned char>(c) < 0x20) throw ScenarioError(where + ".label: control character");
    }
  }
  for (char c : name) {
    if (static_cast<unsigned char>(c) < 0x20) throw ScenarioError("name: control character");
  }
  field("anticipation", [&] { anticipation.validate(); });
  field("noise", [&] { noise.validate(); });
  field("adaptive.grid", [&] { adaptive.grid.validate(); });
  if (!(adaptive.neighbor_radius > 0.0)) {
    throw ScenarioError("adaptive.neighbor_radius_m: must be positive");
  }
  if (adaptive.crash_lx_override && !(*adaptive.crash_lx_override > 0.0)) {
    throw ScenarioError("adaptive.crash_lx_override_m: must be positive");
  }
  if (!(adaptive.calamity_threshold > 0.0 && adaptive.calamity_threshold <= 1.0)) {
    throw ScenarioError("adaptive.calamity_threshold: must lie in (0, 1]");
  }
  field("nash", [&] { nash.validate(); });
}

const AgentConfig& Scenario::agent(AgentId id) const {
  for (const AgentConfig& a : agents) {
    if (a.id == id) return a;
  }
  throw ScenarioError(fmt::format("no agent with id {}", id));
}

namespace {

// The crash feature is anchored at the barrier; without one it is switched off.
AgentUtilitySpec road_spec(const Scenario& s, const AgentConfig& agent) {
  AgentUtilitySpec spec = agent.spec;
  if (s.road.barrier) {
    spec.params.barrier_x = s.road.barrier->x;
  } else {
    spec.weights.w[6] = 0.0;
  }
  return spec;
}

}  // namespace

AgentUtilitySpec Scenario::adaptive_spec(const AgentConfig& agent) const {
  AgentUtilitySpec spec = road_spec(*this, agent);
  if (adaptive.crash_lx_override) spec.params.crash_lx = *adaptive.crash_lx_override;
  return spec;
}

LookAhead Scenario::look_ahead() const {
  return LookAhead{anticipation, aggregators, road, dt};
}

Game Scenario::game() const {
  Game g;
  g.dt = dt;
  g.T = T;
  for (const AgentConfig& a : agents) {
    if (a.entry_tick != 0 || (a.exit_tick && *a.exit_tick < T)) {
      throw ScenarioError(fmt::format(
          "agents[id={}]: best-response dynamics needs every agent for the whole run", a.id));
    }
    g.agents.push_back({a.id, road_spec(*this, a), a.initial, a.initial_prev_action});
  }
  return g;
}

// ---------------------------------------------------------------- IO

Scenario parse_scenario(std::string_view text, const std::string& source_name) {
  const Reader reader(source_name);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(fmt::format("{}:{}:{}: {}", source_name, e.mark.line + 1,
                                    e.mark.column + 1, e.msg));
  }
  Scenario s = read_scenario(reader, root);
  try {
    s.validate();
  } catch (const ScenarioError& e) {
    throw ScenarioError(fmt::format("{}: {}", source_name, e.what()));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(fmt::format("cannot open scenario file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string scenario_to_text(const Scenario& s) {
  std::string o;
  auto line = [&](const std::string& l) { o += l + "\n"; };
  line("name: " + quoted(s.name));
  line("dt_s: " + num(s.dt));
  line(fmt::format("steps: {}", s.T));
  line("road:");
  {
    std::string lanes;
    for (double y : s.road.lane_centers) lanes += (lanes.empty() ? "" : ", ") + num(y);
    line("  lane_centers_m: [" + lanes + "]");
  }
  if (s.road.barrier) {
    line("  barrier:");
    line("    x_m: " + num(s.road.barrier->x));
    line("    blocked_lane_m: " + num(s.road.barrier->blocked_lane_y));
  }
  line("agents:");
  const UtilityParams dp;
  for (const AgentConfig& a : s.agents) {
    line(fmt::format("  - id: {}", a.id));
    line("    label: " + quoted(a.label));
    line("    x_m: " + num(a.initial.x));
    line("    y_m: " + num(a.initial.y));
    line("    psi_deg: " + num(rad_to_deg(a.initial.heading_psi)));
    line("    speed_mps: " + num(a.initial.speed_v));
    line("    prev_alpha_mps2: " + num(a.initial_prev_action.accel_alpha));
    line("    prev_steer_deg: " + num(rad_to_deg(a.initial_prev_action.steer_delta)));
    line(fmt::format("    entry_tick: {}", a.entry_tick));
    if (a.exit_tick) line(fmt::format("    exit_tick: {}", *a.exit_tick));
    const UtilityParams& p = a.spec.params;
    line("    utility:");
    line("      speed_limit_mps: " + num(p.speed_limit_v0));
    line("      accel_max_mps2: " + num(p.accel_max));
    line("      accel_min_mps2: " + num(p.accel_min));
    line("      kappa4: " + num(p.kappa4));
    line("      lane_width_m: " + num(p.lane_width_W));
    line("      kappa6: " + num(p.kappa6));
    line("      crash_lx_m: " + num(p.crash_lx));
    line("      crash_ly_m: " + num(p.crash_ly));
    line("      kappa7x: " + num(p.kappa7x));
    line("      kappa7y: " + num(p.kappa7y));
    line("      collision_lx_m: " + num(p.coll_lx));
    line("      collision_ly_m: " + num(p.coll_ly));
    line("      kappa8x: " + num(p.kappa8x));
    line("      kappa8y: " + num(p.kappa8y));
    line("      steer_roughness_per_rad: " + num(p.steer_roughness_scale));
    line("    weights:");
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      line(fmt::format("      {}: {}", kFeatureKeys[k], num(a.spec.weights.w[k])));
    }
    const VehicleGeometry& g = a.spec.geometry;
    line("    geometry:");
    line("      wheelbase_m: " + num(g.wheelbase_L));
    line("      cg_to_rear_m: " + num(g.cg_to_rear_b));
    line("      width_m: " + num(g.body_width));
    line("      length_m: " + num(g.body_length));
  }
  const AnticipationConfig& c = s.anticipation;
  line("anticipation:");
  line(fmt::format("  horizon_steps: {}", c.horizon_h));
  line("  stanley_kappa: " + num(c.stanley_kappa));
  line("  persistence_fraction: " + num(c.persistence_fraction));
  line("  crossing_threshold_m: " + num(c.crossing_threshold));
  line("  stanley_steer_gain: " + num(c.stanley_steer_gain));
  line("  stanley_max_steer_deg: " + num(rad_to_deg(c.stanley_max_steer)));
  line("  settle_distance_m: " + num(c.settle_distance));
  line("  settle_heading_deg: " + num(rad_to_deg(c.settle_heading)));
  line("aggregation:");
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    line(fmt::format("  {}: {}", kFeatureKeys[k], rule_name(s.aggregators.rules[k])));
  }
  const NoiseModel& nz = s.noise;
  line("noise:");
  line(std::string("  distribution: ") +
       (nz.distribution == NoiseDistribution::kNone ? "none" : "gaussian_iid"));
  line(fmt::format("  seed: {}", nz.rng_seed));
  line("  x_m: " + num(nz.state_sigma[0]));
  line("  y_m: " + num(nz.state_sigma[1]));
  line("  psi_deg: " + num(rad_to_deg(nz.state_sigma[2])));
  line("  v_mps: " + num(nz.state_sigma[3]));
  line("  alpha_mps2: " + num(nz.action_sigma[0]));
  line("  delta_deg: " + num(rad_to_deg(nz.action_sigma[1])));
  const AdaptiveSettings& ad = s.adaptive;
  line("adaptive:");
  line("  alpha_grid_mps2: " + grid_axis(ad.grid.alpha_values, ad.grid.alpha_range, 1.0));
  line("  delta_grid_deg: " + grid_axis(ad.grid.delta_values, ad.grid.delta_range_deg, kPi / 180.0));
  line("  neighbor_radius_m: " + num(ad.neighbor_radius));
  if (ad.crash_lx_override) line("  crash_lx_override_m: " + num(*ad.crash_lx_override));
  line("  calamity_threshold: " + num(ad.calamity_threshold));
  const NashConfig& n = s.nash;
  const BestResponseConfig& b = n.best_response;
  line("nash:");
  line(fmt::format("  max_iterations: {}", n.max_iterations));
  line("  tol: " + num(n.tol));
  line("  steer_weight: " + num(n.steer_weight));
  line(fmt::format("  probe_points: {}", n.probe_points));
  line("  probe_accel_mps2: " + num(n.probe_accel_span));
  line("  probe_steer_deg: " + num(rad_to_deg(n.probe_steer_span)));
  line("  certificate_tol: " + num(n.certificate_tol));
  line(fmt::format("  sequential: {}", n.sequential));
  line("  dedup_threshold: " + num(n.dedup_threshold));
  line(fmt::format("  restarts: {}", b.restarts));
  line("  perturb_accel_mps2: " + num(b.perturb_accel));
  line("  perturb_steer_deg: " + num(rad_to_deg(b.perturb_steer)));
  line(fmt::format("  local_opt_max_evals: {}", b.local_opt_max_evals));
  line(fmt::format("  alpha_bounds_mps2: [{}, {}]", num(b.alpha_bounds.first),
                   num(b.alpha_bounds.second)));
  line(fmt::format("  delta_bounds_deg: [{}, {}]", num(rad_to_deg(b.delta_bounds.first)),
                   num(rad_to_deg(b.delta_bounds.second))));
  line(fmt::format("  seed: {}", b.rng_seed));
  line("  gradient_tolerance: " + num(b.gradient_tolerance));
  return o;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError(fmt::format("cannot write '{}'", path.string()));
  out << scenario_to_text(scenario);
  if (!out) throw ScenarioError(fmt::format("failed writing '{}'", path.string()));
}

std::string scenario_fingerprint(const Scenario& scenario) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : scenario_to_text(scenario)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::vector<std::string> bundled_scenario_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::bundled_scenarios()) names.emplace_back(name);
  return names;
}

std::optional<std::string> bundled_scenario_text(std::string_view name) {
  for (const auto& [n, text] : detail::bundled_scenarios()) {
    if (n == name) return std::string(text);
  }
  return std::nullopt;
}

Scenario resolve_scenario(const std::string& path_or_name) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(path_or_name, ec)) return load_scenario(path_or_name);
  if (auto text = bundled_scenario_text(path_or_name)) {
    return parse_scenario(*text, path_or_name + ".scenario");
  }
  throw ScenarioError(fmt::format(
      "'{}' is neither a scenario file nor a bundled scenario (bundled: ic1, ic2, single)",
      path_or_name));
}

}  // namespace trafficgame
