#pragma once

// Small-dimension bound-constrained minimizers used by the EMOS fits.

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace emos::optimize {

/// Objective value at x; when `grad` is non-empty it receives the gradient.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box unbounded(std::size_t dim) {
    return {std::vector<double>(dim, -std::numeric_limits<double>::infinity()),
            std::vector<double>(dim, std::numeric_limits<double>::infinity())};
  }
  void project(std::span<double> x) const;
};

struct Options {
  int max_iterations = 1000;
  double relative_tolerance = 1e-8;
  double gradient_tolerance = 1e-10;
};

struct Result {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool used_simplex = false;
  /// Objective after every accepted iteration, starting with the initial value.
  std::vector<double> trace;
};

/// Projected quasi-Newton (BFGS) with backtracking line search. When the line
/// search cannot make progress away from a stationary point, continues with a
/// Nelder-Mead simplex from the best point and then retries BFGS once.
Result minimize(const Objective& f, std::vector<double> x0, const Box& box, const Options& opt);

/// Derivative-free simplex search; iterates are projected onto `box`.
Result nelder_mead(const Objective& f, std::vector<double> x0, const Box& box, const Options& opt,
                   double initial_step = 0.1);

}  // namespace emos::optimize
