#pragma once

// Kinematic bicycle model (front-wheel steering) with explicit Euler steps.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace trafficgame {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct VehicleGeometry {
  double wheelbase_L = 2.88;
  double cg_to_rear_b = 1.44;
  double body_width = 2.0;
  double body_length = 4.8;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading_psi = 0.0;  // rad
  double speed_v = 0.0;

  VehicleState() = default;
  /// Rejects non-finite fields and negative speed.
  VehicleState(double x, double y, double heading_psi, double speed_v);

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct ActionPair {
  double accel_alpha = 0.0;  // m/s^2
  double steer_delta = 0.0;  // rad

  ActionPair() = default;
  /// Rejects non-finite values and |steer_delta| >= pi/2.
  ActionPair(double accel_alpha, double steer_delta);

  friend bool operator==(const ActionPair&, const ActionPair&) = default;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<VehicleState> states;  // T + 1
  std::vector<ActionPair> actions;   // T
  /// Indices k at which the speed floor clamped v' to zero.
  std::vector<std::size_t> speed_clamps;

  std::size_t horizon() const { return actions.size(); }
  const VehicleState& final_state() const { return states.back(); }
};

/// Partial derivatives of one step with respect to state (x, y, psi, v)
/// and action (alpha, delta). Row order is (x', y', psi', v').
struct StepJacobian {
  std::array<std::array<double, 4>, 4> d_state{};
  std::array<std::array<double, 2>, 4> d_action{};
};

double slip_angle(const VehicleGeometry& geom, double steer_delta);

VehicleState step(const VehicleGeometry& geom, const VehicleState& s,
                  const ActionPair& a, double dt, bool* clamped = nullptr);

/// Step plus its Jacobian, evaluated at (s, a).
VehicleState step_with_jacobian(const VehicleGeometry& geom,
                                const VehicleState& s, const ActionPair& a,
                                double dt, StepJacobian& jac);

Trajectory rollout(const VehicleGeometry& geom, const VehicleState& s0,
                   std::span<const ActionPair> actions, double dt);

}  // namespace trafficgame
