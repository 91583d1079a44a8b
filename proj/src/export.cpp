#include "trafficgame/export.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <json.hpp>
#include <sstream>

namespace trafficgame {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view version() { return TRAFFICGAME_VERSION; }

const AgentTrack& RunResult::track(AgentId id) const {
  for (const AgentTrack& t : tracks) {
    if (t.id == id) return t;
  }
  throw std::out_of_range(fmt::format("no track for agent {}", id));
}

bool RunResult::has_calamity() const {
  return std::any_of(events.begin(), events.end(), [](const SimEvent& e) {
    return e.kind == SimEvent::Kind::kCalamity;
  });
}

RunResult make_result(const Scenario& scenario, const EquilibriumSolution& solution,
                      double wall_time_s) {
  RunResult r;
  r.scenario = scenario;
  r.solver = "nash";
  r.fingerprint = scenario_fingerprint(scenario);
  r.tool_version = std::string(version());
  r.wall_time_s = wall_time_s;
  if (solution.trajectories.size() != scenario.agents.size()) {
    throw std::invalid_argument("solution does not match the scenario's agents");
  }
  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    r.tracks.push_back({scenario.agents[i].id, scenario.agents[i].label, 0,
                        solution.trajectories[i], {}});
  }
  NashSummary n;
  n.converged = solution.converged;
  n.iterations = solution.iterations_used;
  n.utilities = solution.utilities;
  n.sweep_changes = solution.sweep_changes;
  n.certificate = solution.certificate;
  r.nash = std::move(n);
  return r;
}

RunResult make_result(const Scenario& scenario, const SimulationResult& sim,
                      double wall_time_s) {
  RunResult r;
  r.scenario = scenario;
  r.solver = "adaptive";
  r.fingerprint = scenario_fingerprint(scenario);
  r.tool_version = std::string(version());
  r.wall_time_s = wall_time_s;
  for (const AgentConfig& cfg : scenario.agents) {
    for (const AgentRun& run : sim.agents) {
      if (run.id != cfg.id) continue;
      r.tracks.push_back({run.id, cfg.label, run.first_tick, run.trajectory, run.planned});
    }
  }
  r.events = sim.events;
  return r;
}

std::vector<ActionSequence> action_sequences(const RunResult& result) {
  std::vector<ActionSequence> out;
  for (const AgentTrack& t : result.tracks) {
    if (t.first_tick != 0 || static_cast<int>(t.trajectory.actions.size()) != result.scenario.T) {
      throw std::invalid_argument(
          fmt::format("agent {} does not span the full horizon", t.id));
    }
    out.push_back({t.id, t.trajectory.actions});
  }
  return out;
}

namespace {

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  return fmt::format("{:.17g}", v);
}

// Angles are converted in extended precision with 21 digits so that
// reading a cell back with angle_cell_to_rad recovers the radian value
// bit for bit.
constexpr long double kDegPerRad = 57.295779513082320876798154814105170L;

std::string deg(double rad) {
  if (rad == 0.0) rad = 0.0;
  return fmt::format("{:.21g}", static_cast<long double>(rad) * kDegPerRad);
}

std::string state_cells(const VehicleState& s) {
  return fmt::format("{},{},{},{}", num(s.x), num(s.y), deg(s.heading_psi), num(s.speed_v));
}

std::string action_cells(const ActionPair& a) {
  return fmt::format("{},{}", num(a.accel_alpha), deg(a.steer_delta));
}

std::string row_prefix(const RunResult& r, const AgentTrack& t, std::size_t k) {
  const int tick = t.first_tick + static_cast<int>(k);
  return fmt::format("{},{},{}", tick, num(tick * r.scenario.dt), t.id);
}

std::string action_table(const RunResult& r, bool planned) {
  std::string out = std::string(kTableHeader) + "\n";
  for (const AgentTrack& t : r.tracks) {
    const auto& acts = planned ? t.planned : t.trajectory.actions;
    for (std::size_t k = 0; k < acts.size(); ++k) {
      out += fmt::format("{},{},{}\n", row_prefix(r, t, k),
                         state_cells(t.trajectory.states[k]), action_cells(acts[k]));
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ExportError(fmt::format("cannot write {}", path.string()));
  f << content;
  if (!f) throw ExportError(fmt::format("write failed for {}", path.string()));
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ExportError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---- SVG helpers ----

struct Frame {
  double x0, x1, y0, y1;    // data range
  double left, top, w, h;   // pixel box
  double px(double x) const { return left + (x - x0) / (x1 - x0) * w; }
  double py(double y) const { return top + h - (y - y0) / (y1 - y0) * h; }
};

std::string svg_open(double w, double h) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      w, h);
}

std::string px(double v) { return fmt::format("{:.2f}", v); }

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s = fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
      px(f.left), px(f.top), px(f.w), px(f.h));
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n",
                     px(f.px(xv)), px(f.top + f.h + 14), xv);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n",
                     px(f.left - 4), px(f.py(yv) + 4), yv);
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                   px(f.left + f.w / 2), px(f.top + f.h + 30), xlabel);
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" "
                   "transform=\"rotate(-90 {} {})\">{}</text>\n",
                   px(f.left - 40), px(f.top + f.h / 2), px(f.left - 40),
                   px(f.top + f.h / 2), ylabel);
  return s;
}

std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts,
                     const std::string& colour, double width = 1.5,
                     double opacity = 1.0) {
  std::string s = "<polyline fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"" +
                  px(width) + "\" stroke-opacity=\"" + px(opacity) + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += px(f.px(pts[i].first)) + "," + px(f.py(pts[i].second));
  }
  return s + "\"/>\n";
}

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c",
                                               "#9467bd", "#ff7f0e", "#17becf"};

std::string speed_colour(double v, double lo, double hi) {
  const double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.5;
  // blue (slow) to red (fast)
  const int r = static_cast<int>(std::lround(40 + 200 * t));
  const int g = static_cast<int>(std::lround(80 + 60 * (1 - std::abs(2 * t - 1))));
  const int b = static_cast<int>(std::lround(220 - 190 * t));
  return fmt::format("#{:02x}{:02x}{:02x}", r, g, b);
}

std::pair<double, double> padded(double lo, double hi, double min_span) {
  if (hi - lo < min_span) {
    const double mid = 0.5 * (lo + hi);
    lo = mid - min_span / 2;
    hi = mid + min_span / 2;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::optional<SimEvent::Kind> event_kind(const std::string& name) {
  for (auto k : {SimEvent::Kind::kSpeedClamp, SimEvent::Kind::kScenarioSwitch,
                 SimEvent::Kind::kCalamity, SimEvent::Kind::kEnter,
                 SimEvent::Kind::kExit}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

double to_double(const std::string& cell, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size()) {
    throw ExportError(fmt::format("{}: not a number: '{}'", where, cell));
  }
  return v;
}

double angle_cell_to_rad(const std::string& cell, const std::string& where) {
  to_double(cell, where);
  return static_cast<double>(std::strtold(cell.c_str(), nullptr) / kDegPerRad);
}

struct TableRow {
  int tick;
  AgentId agent;
  VehicleState state;
  std::optional<ActionPair> action;
};

std::vector<TableRow> read_table(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || split(line) != split(std::string(kTableHeader))) {
    throw ExportError(fmt::format("{}: unexpected header", path.string()));
  }
  std::vector<TableRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = fmt::format("{}:{}", path.string(), lineno);
    const auto c = split(line);
    if (c.size() != 9) throw ExportError(where + ": expected 9 columns");
    TableRow r;
    r.tick = static_cast<int>(to_double(c[0], where));
    r.agent = static_cast<AgentId>(to_double(c[2], where));
    r.state = VehicleState(to_double(c[3], where), to_double(c[4], where),
                           angle_cell_to_rad(c[5], where), to_double(c[6], where));
    if (!c[7].empty() || !c[8].empty()) {
      r.action = ActionPair(to_double(c[7], where), angle_cell_to_rad(c[8], where));
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::string trajectories_csv(const RunResult& r) {
  std::string out = std::string(kTableHeader) + "\n";
  for (const AgentTrack& t : r.tracks) {
    const auto& states = t.trajectory.states;
    for (std::size_t k = 0; k < states.size(); ++k) {
      const bool has_action = k < t.trajectory.actions.size();
      out += fmt::format("{},{},{}\n", row_prefix(r, t, k), state_cells(states[k]),
                         has_action ? action_cells(t.trajectory.actions[k]) : ",");
    }
  }
  return out;
}

std::string actions_csv(const RunResult& r) { return action_table(r, false); }

std::string planned_actions_csv(const RunResult& r) { return action_table(r, true); }

std::string run_json(const RunResult& r) {
  json j;
  j["fingerprint"] = r.fingerprint;
  j["solver"] = r.solver;
  j["version"] = r.tool_version;
  j["wall_time_s"] = r.wall_time_s;
  j["scenario"] = r.scenario.name;
  j["dt_s"] = r.scenario.dt;
  j["steps"] = r.scenario.T;
  j["agents"] = json::array();
  for (const AgentTrack& t : r.tracks) {
    j["agents"].push_back({{"id", t.id}, {"label", t.label}, {"first_tick", t.first_tick},
                           {"states", t.trajectory.states.size()}});
  }
  if (r.nash) {
    const NashSummary& n = *r.nash;
    j["converged"] = n.converged;
    j["iterations"] = n.iterations;
    j["utilities"] = n.utilities;
    j["sweep_changes"] = n.sweep_changes;
    j["certificate"] = {{"max_unilateral_gain", n.certificate.max_unilateral_gain},
                        {"passed", n.certificate.passed},
                        {"probe_grid", n.certificate.probe_grid},
                        {"worst_agent", n.certificate.worst_agent},
                        {"worst_tick", n.certificate.worst_tick},
                        {"worst_coordinate", n.certificate.worst_coordinate}};
  } else {
    j["calamity"] = r.has_calamity();
    j["events"] = json::array();
    for (const SimEvent& e : r.events) {
      j["events"].push_back({{"kind", to_string(e.kind)},
                             {"tick", e.tick},
                             {"agent", e.agent},
                             {"detail", e.detail}});
    }
  }
  return j.dump(2) + "\n";
}

std::string trajectories_svg(const RunResult& r) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  double v0 = x0, v1 = -x0;
  for (const AgentTrack& t : r.tracks) {
    for (const VehicleState& s : t.trajectory.states) {
      x0 = std::min(x0, s.x); x1 = std::max(x1, s.x);
      y0 = std::min(y0, s.y); y1 = std::max(y1, s.y);
      v0 = std::min(v0, s.speed_v); v1 = std::max(v1, s.speed_v);
    }
  }
  for (double c : r.scenario.road.lane_centers) {
    y0 = std::min(y0, c - 2.0);
    y1 = std::max(y1, c + 2.0);
  }
  if (!std::isfinite(x0)) { x0 = 0; x1 = 1; v0 = v1 = 0; }
  std::tie(x0, x1) = padded(x0, x1, 10.0);
  std::tie(y0, y1) = padded(y0, y1, 4.0);

  const double W = 960, H = 300;
  Frame f{x0, x1, y0, y1, 60, 30, W - 90, H - 80};
  std::string s = svg_open(W, H);
  s += fmt::format("<text x=\"{}\" y=\"18\">{} ({}) positions every 5 ticks, colour = speed "
                   "{:.1f}..{:.1f} m/s</text>\n",
                   px(f.left), r.scenario.name, r.solver, v0, v1);
  for (double c : r.scenario.road.lane_centers) {
    s += polyline(f, {{x0, c}, {x1, c}}, "#bbbbbb", 1.0);
  }
  if (r.scenario.road.barrier) {
    const Barrier& b = *r.scenario.road.barrier;
    s += polyline(f, {{b.x, b.blocked_lane_y - 1.8}, {b.x, b.blocked_lane_y + 1.8}},
                  "#000000", 4.0);
  }
  s += axes(f, "x (m)", "y (m)");
  for (std::size_t i = 0; i < r.tracks.size(); ++i) {
    const AgentTrack& t = r.tracks[i];
    std::vector<std::pair<double, double>> pts;
    for (const VehicleState& st : t.trajectory.states) pts.emplace_back(st.x, st.y);
    s += polyline(f, pts, kPalette[i % kPalette.size()], 1.0, 0.6);
    for (std::size_t k = 0; k < t.trajectory.states.size(); k += 5) {
      const VehicleState& st = t.trajectory.states[k];
      s += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\" stroke=\"{}\"/>\n",
                       px(f.px(st.x)), px(f.py(st.y)), speed_colour(st.speed_v, v0, v1),
                       kPalette[i % kPalette.size()]);
    }
    const VehicleState& last = t.trajectory.final_state();
    s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", px(f.px(last.x) + 6),
                     px(f.py(last.y) - 6), t.label.empty() ? std::to_string(t.id) : t.label);
  }
  return s + "</svg>\n";
}

std::string actions_svg(const RunResult& r) {
  const double W = 960, H = 560;
  std::string s = svg_open(W, H);
  const double t_end = r.scenario.T * r.scenario.dt;
  for (int panel = 0; panel < 2; ++panel) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::vector<std::vector<std::pair<double, double>>> series;
    for (const AgentTrack& t : r.tracks) {
      auto& pts = series.emplace_back();
      for (std::size_t k = 0; k < t.trajectory.actions.size(); ++k) {
        const ActionPair& a = t.trajectory.actions[k];
        const double v = panel == 0 ? a.accel_alpha : rad_to_deg(a.steer_delta);
        pts.emplace_back((t.first_tick + static_cast<double>(k)) * r.scenario.dt, v);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!std::isfinite(lo)) lo = hi = 0.0;
    const auto [y0, y1] = padded(lo, hi, panel == 0 ? 1.0 : 0.5);
    Frame f{0.0, t_end, y0, y1, 70, 30 + panel * 270.0, W - 100, 200};
    s += axes(f, "time (s)", panel == 0 ? "alpha (m/s^2)" : "delta (deg)");
    s += polyline(f, {{0.0, 0.0}, {t_end, 0.0}}, "#cccccc", 1.0);
    for (std::size_t i = 0; i < series.size(); ++i) {
      s += polyline(f, series[i], kPalette[i % kPalette.size()]);
      s += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n",
                       px(f.left + 10 + 90 * i), px(f.top - 8), kPalette[i % kPalette.size()],
                       r.tracks[i].label.empty() ? std::to_string(r.tracks[i].id)
                                                 : r.tracks[i].label);
    }
  }
  return s + "</svg>\n";
}

std::vector<fs::path> export_result(const RunResult& r, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw ExportError(fmt::format("cannot create output directory {}", out_dir.string()));
  }
  std::vector<std::pair<std::string, std::string>> files{
      {"scenario.scenario", scenario_to_text(r.scenario)},
      {"trajectories.csv", trajectories_csv(r)},
      {"actions.csv", actions_csv(r)},
      {"run.json", run_json(r)},
      {"trajectories.svg", trajectories_svg(r)},
      {"actions.svg", actions_svg(r)},
  };
  if (r.solver == "adaptive") files.emplace_back("planned_actions.csv", planned_actions_csv(r));
  std::vector<fs::path> written;
  for (const auto& [name, content] : files) {
    write_file(out_dir / name, content);
    written.push_back(out_dir / name);
  }
  return written;
}

RunResult load_result(const fs::path& dir) {
  RunResult r;
  r.scenario = load_scenario(dir / "scenario.scenario");
  json j;
  try {
    j = json::parse(read_file(dir / "run.json"));
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.solver = j.at("solver").get<std::string>();
    r.tool_version = j.at("version").get<std::string>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    if (r.solver == "nash") {
      NashSummary n;
      n.converged = j.at("converged").get<bool>();
      n.iterations = j.at("iterations").get<int>();
      n.utilities = j.at("utilities").get<std::vector<double>>();
      n.sweep_changes = j.at("sweep_changes").get<std::vector<double>>();
      const json& c = j.at("certificate");
      n.certificate.max_unilateral_gain = c.at("max_unilateral_gain").get<double>();
      n.certificate.passed = c.at("passed").get<bool>();
      n.certificate.probe_grid = c.at("probe_grid").get<std::string>();
      n.certificate.worst_agent = c.at("worst_agent").get<AgentId>();
      n.certificate.worst_tick = c.at("worst_tick").get<int>();
      n.certificate.worst_coordinate = c.at("worst_coordinate").get<int>();
      r.nash = std::move(n);
    } else if (r.solver == "adaptive") {
      for (const json& e : j.at("events")) {
        const auto kind = event_kind(e.at("kind").get<std::string>());
        if (!kind) throw ExportError("run.json: unknown event kind");
        r.events.push_back({*kind, e.at("tick").get<int>(), e.at("agent").get<AgentId>(),
                            e.at("detail").get<std::string>()});
      }
    } else {
      throw ExportError(fmt::format("run.json: unknown solver '{}'", r.solver));
    }
  } catch (const json::exception& e) {
    throw ExportError(fmt::format("{}: {}", (dir / "run.json").string(), e.what()));
  }
  if (r.fingerprint != scenario_fingerprint(r.scenario)) {
    throw ExportError("run.json fingerprint does not match scenario.scenario");
  }

  std::map<AgentId, std::size_t> slot;
  for (const AgentConfig& cfg : r.scenario.agents) {
    bool ran = false;
    for (const json& a : j.at("agents")) ran = ran || a.at("id").get<AgentId>() == cfg.id;
    if (!ran) continue;
    slot[cfg.id] = r.tracks.size();
    AgentTrack t;
    t.id = cfg.id;
    t.label = cfg.label;
    t.first_tick = -1;
    t.trajectory.dt = r.scenario.dt;
    r.tracks.push_back(std::move(t));
  }
  for (const TableRow& row : read_table(dir / "trajectories.csv")) {
    auto it = slot.find(row.agent);
    if (it == slot.end()) throw ExportError("trajectories.csv: unknown agent");
    AgentTrack& t = r.tracks[it->second];
    if (t.first_tick < 0) t.first_tick = row.tick;
    if (row.tick != t.first_tick + static_cast<int>(t.trajectory.states.size())) {
      throw ExportError("trajectories.csv: ticks are not consecutive");
    }
    t.trajectory.states.push_back(row.state);
    if (row.action) t.trajectory.actions.push_back(*row.action);
  }
  if (fs::exists(dir / "planned_actions.csv")) {
    for (const TableRow& row : read_table(dir / "planned_actions.csv")) {
      auto it = slot.find(row.agent);
      if (it == slot.end()) throw ExportError("planned_actions.csv: unknown agent");
      r.tracks[it->second].planned.push_back(*row.action);
    }
  }
  return r;
}

std::string deviation_csv(const std::vector<DeviationSample>& samples) {
  std::string out = "agent,tick,coordinate,deviation,utility,gain\n";
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    std::optional<double> base;
    while (j < samples.size() && samples[j].agent == samples[i].agent &&
           samples[j].tick == samples[i].tick &&
           samples[j].coordinate == samples[i].coordinate) {
      if (samples[j].deviation == 0.0) base = samples[j].utility;
      ++j;
    }
    for (std::size_t k = i; k < j; ++k) {
      const DeviationSample& d = samples[k];
      const double dev = d.coordinate == 0 ? d.deviation : rad_to_deg(d.deviation);
      out += fmt::format("{},{},{},{},{},{}\n", d.agent, d.tick,
                         d.coordinate == 0 ? "alpha_mps2" : "delta_deg", num(dev),
                         num(d.utility), base ? num(d.utility - *base) : "");
    }
    i = j;
  }
  return out;
}

std::string deviation_svg(const std::vector<DeviationSample>& samples) {
  const double W = 960, H = 560;
  std::string s = svg_open(W, H);
  // One panel per coordinate; one faint curve per (agent, tick).
  for (int coord = 0; coord < 2; ++coord) {
    std::map<std::pair<AgentId, int>, std::vector<std::pair<double, double>>> curves;
    std::map<std::pair<AgentId, int>, double> base;
    for (const DeviationSample& d : samples) {
      if (d.coordinate != coord) continue;
      const double dev = coord == 0 ? d.deviation : rad_to_deg(d.deviation);
      curves[{d.agent, d.tick}].emplace_back(dev, d.utility);
      if (d.deviation == 0.0) base[{d.agent, d.tick}] = d.utility;
    }
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (auto& [key, pts] : curves) {
      const double b = base.count(key) ? base[key] : 0.0;
      for (auto& p : pts) {
        p.second -= b;
        x0 = std::min(x0, p.first); x1 = std::max(x1, p.first);
        y0 = std::min(y0, p.second); y1 = std::max(y1, p.second);
      }
    }
    if (!std::isfinite(x0)) { x0 = -1; x1 = 1; y0 = -1; y1 = 0; }
    std::tie(x0, x1) = padded(x0, x1, 1e-6);
    std::tie(y0, y1) = padded(y0, std::max(y1, 0.0), 1e-3);
    Frame f{x0, x1, y0, y1, 70, 30 + coord * 270.0, W - 100, 200};
    s += axes(f, coord == 0 ? "alpha deviation (m/s^2)" : "delta deviation (deg)",
              "utility change");
    s += polyline(f, {{x0, 0.0}, {x1, 0.0}}, "#888888", 1.0);
    std::map<AgentId, std::size_t> colour;
    for (const auto& [key, pts] : curves) {
      const std::size_t c = colour.emplace(key.first, colour.size()).first->second;
      s += polyline(f, pts, kPalette[c % kPalette.size()], 0.8, 0.35);
    }
  }
  return s + "</svg>\n";
}

std::vector<fs::path> export_deviation(const std::vector<DeviationSample>& samples,
                                       const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw ExportError(fmt::format("cannot create output directory {}", out_dir.string()));
  }
  write_file(out_dir / "deviation.csv", deviation_csv(samples));
  write_file(out_dir / "deviation.svg", deviation_svg(samples));
  return {out_dir / "deviation.csv", out_dir / "deviation.svg"};
}

}  // namespace trafficgame
