#include "trafficgame/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace trafficgame {

void VehicleGeometry::validate() const {
  if (!(wheelbase_L > 0.0) || !std::isfinite(wheelbase_L)) {
    throw std::invalid_argument("wheelbase must be positive");
  }
  if (!(cg_to_rear_b > 0.0) || !(cg_to_rear_b <= wheelbase_L)) {
    throw std::invalid_argument("cg_to_rear must lie in (0, wheelbase]");
  }
  if (!(body_width > 0.0) || !std::isfinite(body_width)) {
    throw std::invalid_argument("body width must be positive");
  }
  if (!(body_length > 0.0) || !std::isfinite(body_length)) {
    throw std::invalid_argument("body length must be positive");
  }
}

VehicleState::VehicleState(double x_, double y_, double psi_, double v_)
    : x(x_), y(y_), heading_psi(psi_), speed_v(v_) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(heading_psi) ||
      !std::isfinite(speed_v)) {
    throw std::invalid_argument("vehicle state fields must be finite");
  }
  if (speed_v < 0.0) {
    throw std::invalid_argument("vehicle speed must be non-negative");
  }
}

ActionPair::ActionPair(double alpha, double delta)
    : accel_alpha(alpha), steer_delta(delta) {
  if (!std::isfinite(alpha) || !std::isfinite(delta)) {
    throw std::invalid_argument("action fields must be finite");
  }
  if (!(std::abs(delta) < kPi / 2.0)) {
    throw std::domain_error("steering angle must satisfy |delta| < pi/2");
  }
}

double slip_angle(const VehicleGeometry& geom, double steer_delta) {
  if (!(std::abs(steer_delta) < kPi / 2.0)) {
    throw std::domain_error("steering angle must satisfy |delta| < pi/2");
  }
  return std::atan(geom.cg_to_rear_b / geom.wheelbase_L * std::tan(steer_delta));
}

VehicleState step(const VehicleGeometry& geom, const VehicleState& s,
                  const ActionPair& a, double dt, bool* clamped) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!std::isfinite(a.accel_alpha)) {
    throw std::invalid_argument("acceleration must be finite");
  }
  const double beta = slip_angle(geom, a.steer_delta);
  const double course = s.heading_psi + beta;
  VehicleState next;
  next.x = s.x + dt * s.speed_v * std::cos(course);
  next.y = s.y + dt * s.speed_v * std::sin(course);
  next.heading_psi = s.heading_psi + dt * s.speed_v / geom.wheelbase_L *
                                         std::cos(beta) * std::tan(a.steer_delta);
  const double v = s.speed_v + dt * a.accel_alpha;
  next.speed_v = v > 0.0 ? v : 0.0;
  if (clamped != nullptr) *clamped = v < 0.0;
  return next;
}

VehicleState step_with_jacobian(const VehicleGeometry& geom,
                                const VehicleState& s, const ActionPair& a,
                                double dt, StepJacobian& jac) {
  bool clamped = false;
  const VehicleState next = step(geom, s, a, dt, &clamped);

  const double ratio = geom.cg_to_rear_b / geom.wheelbase_L;
  const double tan_d = std::tan(a.steer_delta);
  const double sec2_d = 1.0 + tan_d * tan_d;
  const double beta = std::atan(ratio * tan_d);
  const double dbeta = ratio * sec2_d / (1.0 + ratio * ratio * tan_d * tan_d);
  const double course = s.heading_psi + beta;
  const double c = std::cos(course);
  const double sn = std::sin(course);
  const double v = s.speed_v;
  const double cb = std::cos(beta);
  const double sb = std::sin(beta);

  jac = StepJacobian{};
  // x'
  jac.d_state[0] = {1.0, 0.0, -dt * v * sn, dt * c};
  jac.d_action[0] = {0.0, -dt * v * sn * dbeta};
  // y'
  jac.d_state[1] = {0.0, 1.0, dt * v * c, dt * sn};
  jac.d_action[1] = {0.0, dt * v * c * dbeta};
  // psi'
  jac.d_state[2] = {0.0, 0.0, 1.0, dt / geom.wheelbase_L * cb * tan_d};
  jac.d_action[2] = {0.0, dt * v / geom.wheelbase_L *
                              (-sb * dbeta * tan_d + cb * sec2_d)};
  // v'
  if (clamped) {
    jac.d_state[3] = {0.0, 0.0, 0.0, 0.0};
    jac.d_action[3] = {0.0, 0.0};
  } else {
    jac.d_state[3] = {0.0, 0.0, 0.0, 1.0};
    jac.d_action[3] = {dt, 0.0};
  }
  return next;
}

Trajectory rollout(const VehicleGeometry& geom, const VehicleState& s0,
                   std::span<const ActionPair> actions, double dt) {
  if (actions.empty()) {
    throw std::invalid_argument("rollout requires at least one action");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(actions.size() + 1);
  traj.actions.assign(actions.begin(), actions.end());
  traj.states.push_back(s0);
  for (std::size_t k = 0; k < actions.size(); ++k) {
    bool clamped = false;
    try {
      traj.states.push_back(step(geom, traj.states.back(), actions[k], dt, &clamped));
    } catch (const std::domain_error& e) {
      throw std::domain_error("rollout step " + std::to_string(k) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("rollout step " + std::to_string(k) + ": " +
                                  e.what());
    }
    if (clamped) traj.speed_clamps.push_back(k);
  }
  return traj;
}

}  // namespace trafficgame
