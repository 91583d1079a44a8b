#pragma once

// Limited-memory BFGS with projection onto box bounds. Internal helper for
// the best-response optimizer.

#include <functional>
#include <span>
#include <vector>

namespace trafficgame::detail {

/// Returns f(x) and writes the gradient into the second argument.
using ValueAndGradient = std::function<double(std::span<const double>, std::span<double>)>;

struct BoxLbfgsOptions {
  int memory = 12;
  int max_evals = 3000;
  double gradient_tolerance = 1e-8;
  double relative_f_tolerance = 1e-15;
};

struct BoxLbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  int iterations = 0;
  bool converged = false;
  bool budget_exhausted = false;
};

BoxLbfgsResult minimize_box_lbfgs(const ValueAndGradient& fg, std::vector<double> x0,
                                  std::span<const double> lower,
                                  std::span<const double> upper,
                                  const BoxLbfgsOptions& options);

}  // namespace trafficgame::detail
