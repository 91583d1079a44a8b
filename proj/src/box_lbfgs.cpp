#include "box_lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace trafficgame::detail {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

}  // namespace

BoxLbfgsResult minimize_box_lbfgs(const ValueAndGradient& fg, std::vector<double> x0,
                                  std::span<const double> lower,
                                  std::span<const double> upper,
                                  const BoxLbfgsOptions& options) {
  const std::size_t n = x0.size();
  auto project = [&](std::vector<double>& v) {
    for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i], lower[i], upper[i]);
  };

  BoxLbfgsResult out;
  std::vector<double> x = std::move(x0);
  project(x);
  std::vector<double> g(n);
  double f = fg(x, g);
  out.evals = 1;

  std::deque<Pair> memory;
  std::vector<double> d(n), x_new(n), g_new(n), q(n), alpha_hist;
  std::vector<bool> free_var(n);
  int stalls = 0;

  while (true) {
    // Projected gradient and the free set.
    double pg_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool at_lo = x[i] <= lower[i] && g[i] > 0.0;
      const bool at_hi = x[i] >= upper[i] && g[i] < 0.0;
      free_var[i] = !(at_lo || at_hi);
      if (free_var[i]) pg_norm = std::max(pg_norm, std::abs(g[i]));
    }
    if (pg_norm < options.gradient_tolerance) {
      out.converged = true;
      break;
    }
    if (out.evals >= options.max_evals) {
      out.budget_exhausted = true;
      break;
    }

    // Two-loop recursion on the free subspace.
    for (std::size_t i = 0; i < n; ++i) q[i] = free_var[i] ? g[i] : 0.0;
    alpha_hist.assign(memory.size(), 0.0);
    for (std::size_t k = memory.size(); k-- > 0;) {
      alpha_hist[k] = memory[k].rho * dot(memory[k].s, q);
      for (std::size_t i = 0; i < n; ++i) q[i] -= alpha_hist[k] * memory[k].y[i];
    }
    double gamma = 1.0;
    if (!memory.empty()) {
      const Pair& last = memory.back();
      gamma = dot(last.s, last.y) / dot(last.y, last.y);
    } else {
      gamma = 1.0 / std::max(1.0, pg_norm);
    }
    for (std::size_t i = 0; i < n; ++i) q[i] *= gamma;
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = memory[k].rho * dot(memory[k].y, q);
      for (std::size_t i = 0; i < n; ++i) q[i] += (alpha_hist[k] - beta) * memory[k].s[i];
    }
    for (std::size_t i = 0; i < n; ++i) d[i] = free_var[i] ? -q[i] : 0.0;
    if (dot(d, g) >= 0.0) {
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = free_var[i] ? -g[i] / std::max(1.0, pg_norm) : 0.0;
    }

    // Armijo backtracking along the projected path.
    double step = 1.0;
    bool accepted = false;
    double f_new = f;
    for (int tries = 0; tries < 50 && out.evals < options.max_evals; ++tries) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
      project(x_new);
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (x_new[i] - x[i]);
      f_new = fg(x_new, g_new);
      ++out.evals;
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      if (out.evals >= options.max_evals) out.budget_exhausted = true;
      break;
    }

    Pair p;
    p.s.resize(n);
    p.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - x[i];
      p.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y))) {
      p.rho = 1.0 / sy;
      memory.push_back(std::move(p));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }

    const double improvement = f - f_new;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    ++out.iterations;
    if (improvement <= options.relative_f_tolerance * std::max(1.0, std::abs(f))) {
      if (++stalls >= 3) {
        out.converged = true;
        break;
      }
    } else {
      stalls = 0;
    }
  }
  out.x = std::move(x);
  out.f = f;
  return out;
}

}  // namespace trafficgame::detail
