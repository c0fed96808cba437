#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "emos/optimize.hpp"

using namespace emos::optimize;
using doctest::Approx;

namespace {

double rosenbrock(std::span<const double> x, std::span<double> g) {
  const double a = 1.0 - x[0];
  const double b = x[1] - x[0] * x[0];
  if (!g.empty()) {
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
  }
  return a * a + 100.0 * b * b;
}

double shifted_bowl(std::span<const double> x, std::span<double> g) {
  double f = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - static_cast<double>(i + 1);
    f += (i + 1.0) * d * d;
    if (!g.empty()) g[i] = 2.0 * (i + 1.0) * d;
  }
  return f;
}

}  // namespace

TEST_CASE("quasi-Newton search finds the Rosenbrock minimum") {
  Options opt;
  opt.relative_tolerance = 1e-14;
  const auto r = minimize(rosenbrock, {-1.2, 1.0}, Box::unbounded(2), opt);
  CHECK(r.converged);
  CHECK(r.x[0] == Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == Approx(1.0).epsilon(1e-5));
}

TEST_CASE("accepted iterations never increase the objective") {
  const auto r = minimize(rosenbrock, {-1.2, 1.0}, Box::unbounded(2), Options{});
  REQUIRE(r.trace.size() >= 2);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
  CHECK(r.trace.back() == r.value);
}

TEST_CASE("bounds are respected and active at the constrained optimum") {
  Box box = Box::unbounded(3);
  box.upper[1] = 0.5;   // unconstrained optimum is 2
  box.lower[2] = 4.0;   // unconstrained optimum is 3
  const auto r = minimize(shifted_bowl, {0.0, 0.0, 5.0}, box, Options{});
  CHECK(r.converged);
  CHECK(r.x[0] == Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == 0.5);
  CHECK(r.x[2] == 4.0);
}

TEST_CASE("projection clamps into the box") {
  Box box{{0.0, -1.0}, {1.0, 1.0}};
  std::vector<double> x{2.0, -3.0};
  box.project(x);
  CHECK(x == std::vector<double>{1.0, -1.0});
}

TEST_CASE("simplex search minimizes without derivatives") {
  auto f = [](std::span<const double> x, std::span<double>) {
    return shifted_bowl(x, {});
  };
  Options opt;
  opt.relative_tolerance = 1e-14;
  const auto r = nelder_mead(f, {0.0, 0.0}, Box::unbounded(2), opt, 0.5);
  CHECK(r.x[0] == Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == Approx(2.0).epsilon(1e-4));
}

TEST_CASE("an iteration cap reports non-convergence") {
  Options opt;
  opt.max_iterations = 2;
  opt.relative_tolerance = 1e-15;
  const auto r = minimize(rosenbrock, {-1.2, 1.0}, Box::unbounded(2), opt);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations <= opt.max_iterations + 1);
}
