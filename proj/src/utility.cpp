#include "trafficgame/utility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace trafficgame {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

double sigmoid_slope(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

// Partials of the weighted per-period utility.
struct PeriodPartials {
  std::array<double, 4> d_state{};  // x, y, psi, v
  std::array<double, 2> d_action{};
  std::array<double, 2> d_prev{};
};

PeriodPartials period_partials(const AgentUtilitySpec& spec,
                               const VehicleState& s, const ActionPair& a,
                               const ActionPair& prev,
                               std::span<const Trajectory> others,
                               std::size_t t) {
  const UtilityParams& p = spec.params;
  const FeatureVector& w = spec.weights.w;
  PeriodPartials d;

  // phi1
  d.d_state[3] += w[0] * (-2.0 * (s.speed_v - p.speed_limit_v0) /
                          (p.speed_limit_v0 * p.speed_limit_v0));
  // phi2 / phi3
  const double da = a.accel_alpha - prev.accel_alpha;
  d.d_action[0] += w[1] * 2.0 * da;
  d.d_prev[0] -= w[1] * 2.0 * da;
  const double c2 = p.steer_roughness_scale * p.steer_roughness_scale;
  const double dd = a.steer_delta - prev.steer_delta;
  d.d_action[1] += w[2] * 2.0 * c2 * dd;
  d.d_prev[1] -= w[2] * 2.0 * c2 * dd;
  // phi4
  d.d_action[0] += w[3] * p.kappa4 *
                   (sigmoid(p.kappa4 * (a.accel_alpha - p.accel_max)) -
                    sigmoid(-p.kappa4 * (a.accel_alpha - p.accel_min)));
  // phi5
  const double half = p.lane_width_W / 2.0;
  const double denom = 3.0 * std::pow(p.lane_width_W, 4) / 4.0;
  const double core = s.y * s.y - half * half;
  if (core * core / denom < 1.0) {
    d.d_state[1] += w[4] * 2.0 * core * 2.0 * s.y / denom;
  }
  // phi6
  const double edge = p.lane_width_W + spec.geometry.body_width / 2.0;
  const double sign_y = s.y > 0.0 ? 1.0 : (s.y < 0.0 ? -1.0 : 0.0);
  d.d_state[1] += w[5] * p.kappa6 *
                  sigmoid_slope(p.kappa6 * (std::abs(s.y) - edge)) * sign_y;
  // phi7
  const double ax = p.kappa7x * (s.x - p.barrier_x + p.crash_lx);
  const double ay = -p.kappa7y * (s.y - p.crash_ly);
  d.d_state[0] += w[6] * p.kappa7x * sigmoid_slope(ax) * sigmoid(ay);
  d.d_state[1] += w[6] * (-p.kappa7y) * sigmoid(ax) * sigmoid_slope(ay);
  // phi8
  for (const Trajectory& other : others) {
    const VehicleState& o = other.states[t];
    const double dx = s.x - o.x;
    const double dy = s.y - o.y;
    const double kx = p.kappa8x;
    const double ky = p.kappa8y;
    const double bx = sigmoid(kx * (dx + p.coll_lx)) +
                      sigmoid(kx * (p.coll_lx - dx)) - 1.0;
    const double by = sigmoid(ky * (dy + p.coll_ly)) +
                      sigmoid(ky * (p.coll_ly - dy)) - 1.0;
    const double dbx = kx * (sigmoid_slope(kx * (dx + p.coll_lx)) -
                             sigmoid_slope(kx * (p.coll_lx - dx)));
    const double dby = ky * (sigmoid_slope(ky * (dy + p.coll_ly)) -
                             sigmoid_slope(ky * (p.coll_ly - dy)));
    d.d_state[0] += w[7] * dbx * by;
    d.d_state[1] += w[7] * bx * dby;
  }
  return d;
}

void check_lengths(std::span<const ActionPair> own,
                   std::span<const Trajectory> others) {
  if (own.empty()) {
    throw std::invalid_argument("cumulative utility needs a nonempty horizon");
  }
  for (const Trajectory& o : others) {
    if (o.actions.size() != own.size() || o.states.size() != own.size() + 1) {
      throw std::invalid_argument(
          "other trajectory length does not match own action count");
    }
  }
}

}  // namespace

void UtilityParams::validate() const {
  require_positive(speed_limit_v0, "speed_limit_v0");
  if (!(accel_min < 0.0 && 0.0 < accel_max)) {
    throw std::invalid_argument("accel limits must satisfy accel_min < 0 < accel_max");
  }
  require_positive(kappa4, "kappa4");
  require_positive(lane_width_W, "lane_width_W");
  require_positive(kappa6, "kappa6");
  require_positive(crash_lx, "crash_lx");
  require_positive(crash_ly, "crash_ly");
  require_positive(kappa7x, "kappa7x");
  require_positive(kappa7y, "kappa7y");
  require_positive(coll_lx, "coll_lx");
  require_positive(coll_ly, "coll_ly");
  require_positive(kappa8x, "kappa8x");
  require_positive(kappa8y, "kappa8y");
  require_positive(steer_roughness_scale, "steer_roughness_scale");
  if (!std::isfinite(barrier_x)) {
    throw std::invalid_argument("barrier_x must be finite");
  }
}

void UtilityWeights::validate() const {
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    if (!std::isfinite(w[k])) {
      throw std::invalid_argument("weight w" + std::to_string(k + 1) +
                                  " must be finite");
    }
  }
  if (!(w[0] > 0.0)) throw std::invalid_argument("weight w1 must be positive");
  for (std::size_t k = 1; k < kNumFeatures; ++k) {
    if (w[k] > 0.0) {
      throw std::invalid_argument("weight w" + std::to_string(k + 1) +
                                  " must be non-positive");
    }
  }
}

void AgentUtilitySpec::validate() const {
  params.validate();
  weights.validate();
  geometry.validate();
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double phi1_forward(const AgentUtilitySpec& spec, double v) {
  const double r = (v - spec.params.speed_limit_v0) / spec.params.speed_limit_v0;
  return 1.0 - r * r;
}

double phi2_accel_smooth(double a_t, double a_prev) {
  return (a_t - a_prev) * (a_t - a_prev);
}

double phi3_steer_smooth(double d_t, double d_prev) {
  return (d_t - d_prev) * (d_t - d_prev);
}

double phi4_hard_accel(const AgentUtilitySpec& spec, double alpha) {
  const UtilityParams& p = spec.params;
  return softplus(p.kappa4 * (alpha - p.accel_max)) +
         softplus(-p.kappa4 * (alpha - p.accel_min));
}

double phi5_lane_departure(const AgentUtilitySpec& spec, double y) {
  const double W = spec.params.lane_width_W;
  const double core = y * y - (W / 2.0) * (W / 2.0);
  return std::min(core * core / (3.0 * W * W * W * W / 4.0), 1.0);
}

double phi6_out_of_road(const AgentUtilitySpec& spec, double y) {
  const double edge = spec.params.lane_width_W + spec.geometry.body_width / 2.0;
  return sigmoid(spec.params.kappa6 * (std::abs(y) - edge));
}

double phi7_crash(const AgentUtilitySpec& spec, double x, double y) {
  const UtilityParams& p = spec.params;
  return sigmoid(p.kappa7x * (x - p.barrier_x + p.crash_lx)) *
         sigmoid(-p.kappa7y * (y - p.crash_ly));
}

double phi8_collision(const AgentUtilitySpec& spec, double dx, double dy) {
  const UtilityParams& p = spec.params;
  const double bx = (sigmoid(p.kappa8x * (dx + p.coll_lx)) - 0.5) +
                    (sigmoid(p.kappa8x * (p.coll_lx - dx)) - 0.5);
  const double by = (sigmoid(p.kappa8y * (dy + p.coll_ly)) - 0.5) +
                    (sigmoid(p.kappa8y * (p.coll_ly - dy)) - 0.5);
  return bx * by;
}

FeatureVector period_features(const AgentUtilitySpec& spec,
                              const PeriodContext& ctx) {
  const VehicleState& s = ctx.own_state;
  const double scale = spec.params.steer_roughness_scale;
  FeatureVector f{};
  f[0] = phi1_forward(spec, s.speed_v);
  f[1] = phi2_accel_smooth(ctx.own_action.accel_alpha, ctx.prev_action.accel_alpha);
  f[2] = phi3_steer_smooth(scale * ctx.own_action.steer_delta,
                           scale * ctx.prev_action.steer_delta);
  f[3] = phi4_hard_accel(spec, ctx.own_action.accel_alpha);
  f[4] = phi5_lane_departure(spec, s.y);
  f[5] = phi6_out_of_road(spec, s.y);
  f[6] = phi7_crash(spec, s.x, s.y);
  double collision = 0.0;
  for (const VehicleState& o : ctx.others) {
    collision += phi8_collision(spec, s.x - o.x, s.y - o.y);
  }
  f[7] = collision;
  return f;
}

double weighted_sum(const UtilityWeights& weights, const FeatureVector& f) {
  double total = 0.0;
  for (std::size_t k = 0; k < kNumFeatures; ++k) total += weights.w[k] * f[k];
  return total;
}

double period_utility(const AgentUtilitySpec& spec, const PeriodContext& ctx) {
  return weighted_sum(spec.weights, period_features(spec, ctx));
}

double cumulative_utility(const AgentUtilitySpec& spec, const VehicleState& s0,
                          std::span<const ActionPair> own_actions,
                          std::span<const Trajectory> others, double dt,
                          const ActionPair& initial_prev_action) {
  check_lengths(own_actions, others);
  PeriodContext ctx;
  ctx.own_state = s0;
  ctx.prev_action = initial_prev_action;
  ctx.others.resize(others.size());
  double total = 0.0;
  for (std::size_t t = 0; t < own_actions.size(); ++t) {
    ctx.own_action = own_actions[t];
    for (std::size_t j = 0; j < others.size(); ++j) {
      ctx.others[j] = others[j].states[t];
    }
    total += period_utility(spec, ctx);
    if (t + 1 < own_actions.size()) {
      ctx.own_state = step(spec.geometry, ctx.own_state, own_actions[t], dt);
    }
    ctx.prev_action = own_actions[t];
  }
  return total;
}

double cumulative_utility_gradient(const AgentUtilitySpec& spec,
                                   const VehicleState& s0,
                                   std::span<const ActionPair> own_actions,
                                   std::span<const Trajectory> others, double dt,
                                   std::vector<double>& gradient,
                                   const ActionPair& initial_prev_action) {
  check_lengths(own_actions, others);
  const std::size_t T = own_actions.size();
  std::vector<VehicleState> states(T);
  std::vector<StepJacobian> jacobians(T);
  states[0] = s0;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    states[t + 1] =
        step_with_jacobian(spec.geometry, states[t], own_actions[t], dt, jacobians[t]);
  }

  PeriodContext ctx;
  ctx.others.resize(others.size());
  double total = 0.0;
  std::vector<PeriodPartials> partials(T);
  for (std::size_t t = 0; t < T; ++t) {
    ctx.own_state = states[t];
    ctx.own_action = own_actions[t];
    ctx.prev_action = t == 0 ? initial_prev_action : own_actions[t - 1];
    for (std::size_t j = 0; j < others.size(); ++j) {
      ctx.others[j] = others[j].states[t];
    }
    total += period_utility(spec, ctx);
    partials[t] = period_partials(spec, states[t], own_actions[t], ctx.prev_action,
                                  others, t);
  }

  gradient.assign(2 * T, 0.0);
  std::array<double, 4> costate{};  // dU/ds_{t+1} from future periods
  for (std::size_t t = T; t-- > 0;) {
    double ga = partials[t].d_action[0];
    double gd = partials[t].d_action[1];
    if (t + 1 < T) {
      ga += partials[t + 1].d_prev[0];
      gd += partials[t + 1].d_prev[1];
      const StepJacobian& J = jacobians[t];
      for (int r = 0; r < 4; ++r) {
        ga += J.d_action[r][0] * costate[r];
        gd += J.d_action[r][1] * costate[r];
      }
    }
    gradient[2 * t] = ga;
    gradient[2 * t + 1] = gd;

    std::array<double, 4> next{};
    for (int c = 0; c < 4; ++c) {
      double acc = partials[t].d_state[c];
      if (t + 1 < T) {
        for (int r = 0; r < 4; ++r) acc += jacobians[t].d_state[r][c] * costate[r];
      }
      next[c] = acc;
    }
    costate = next;
  }
  return total;
}

}  // namespace trafficgame
