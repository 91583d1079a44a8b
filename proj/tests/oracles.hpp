#pragma once

// Scalar re-implementations used as test oracles. Written from the model
// equations directly; they share no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

constexpr double pi = 3.141592653589793;

struct Pose {
  double x, y, psi, v;
};

inline Pose bicycle_step(double L, double b, Pose s, double alpha, double delta,
                         double dt) {
  const double beta = std::atan(b / L * std::tan(delta));
  Pose n;
  n.x = s.x + dt * s.v * std::cos(s.psi + beta);
  n.y = s.y + dt * s.v * std::sin(s.psi + beta);
  n.psi = s.psi + dt * s.v / L * std::cos(beta) * std::tan(delta);
  n.v = std::max(0.0, s.v + dt * alpha);
  return n;
}

inline double logistic(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

inline double log1pexp(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Double-lane highway constants.
struct Params {
  double v0 = 31, amax = 4, amin = -5, k4 = 15, W = 3.7, k6 = 3, width = 2;
  double l7x = 5, l7y = 1, k7x = 2, k7y = 20, barrier = 0;
  double l8x = 10, l8y = 2, k8x = 0.5, k8y = 9;
  std::array<double, 8> w{1.0, -0.01, -1.5, -1.0, -0.3, -24.0, -20.0, -14.0};
};

inline double f1(const Params& p, double v) {
  const double r = (v - p.v0) / p.v0;
  return 1 - r * r;
}
inline double f2(double a, double a_prev) { return (a - a_prev) * (a - a_prev); }
inline double f3_rad(double d, double d_prev) {
  const double deg = (d - d_prev) * 180.0 / pi;
  return deg * deg;
}
inline double f4(const Params& p, double a) {
  return log1pexp(p.k4 * (a - p.amax)) + log1pexp(-p.k4 * (a - p.amin));
}
inline double f5(const Params& p, double y) {
  const double q = y * y - p.W * p.W / 4;
  return std::min(q * q / (0.75 * std::pow(p.W, 4)), 1.0);
}
inline double f6(const Params& p, double y) {
  return logistic(p.k6 * (std::fabs(y) - (p.W + p.width / 2)));
}
inline double f7(const Params& p, double x, double y) {
  return logistic(p.k7x * (x - p.barrier + p.l7x)) * logistic(-p.k7y * (y - p.l7y));
}
inline double f8(const Params& p, double dx, double dy) {
  auto bump = [](double k, double l, double d) {
    return (logistic(k * (d + l)) - 0.5) + (logistic(k * (l - d)) - 0.5);
  };
  return bump(p.k8x, p.l8x, dx) * bump(p.k8y, p.l8y, dy);
}

struct Period {
  Pose own;
  double alpha, delta, prev_alpha, prev_delta;
  std::vector<Pose> others;
};

inline std::array<double, 8> features(const Params& p, const Period& t) {
  double coll = 0;
  for (const Pose& o : t.others) coll += f8(p, t.own.x - o.x, t.own.y - o.y);
  return {f1(p, t.own.v),
          f2(t.alpha, t.prev_alpha),
          f3_rad(t.delta, t.prev_delta),
          f4(p, t.alpha),
          f5(p, t.own.y),
          f6(p, t.own.y),
          f7(p, t.own.x, t.own.y),
          coll};
}

inline double utility(const Params& p, const Period& t) {
  const auto f = features(p, t);
  double u = 0;
  for (int k = 0; k < 8; ++k) u += p.w[k] * f[k];
  return u;
}

}  // namespace oracle
