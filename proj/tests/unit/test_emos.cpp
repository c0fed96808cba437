#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "emos/emos.hpp"
#include "emos/error.hpp"
#include "fixtures.hpp"

using namespace emos;
using doctest::Approx;

namespace {

const std::pair<ModelId, ModelId> kAB{"A", "B"};

FitOptions tight() {
  FitOptions o;
  o.objective_tolerance = 1e-10;
  return o;
}

}  // namespace

TEST_CASE("single-model predictive distributions") {
  auto p = predict_single({0, 1, 0, 1}, {5, 2, 10});
  CHECK(p.mu == 5.0);
  CHECK(p.sigma == 2.0);
  p = predict_single({2, 0.5, 1, 0}, {4, 3, 10});
  CHECK(p.mu == 4.0);
  CHECK(p.sigma == 1.0);
  CHECK(predict_single({0, 1, 3, 4}, {0, 1, 10}).sigma == 5.0);
  CHECK(predict_single({0, 1, 0, 1}, {0, 0, 10}).sigma == kDefaultMinSigma);
}

TEST_CASE("mixed predictive distributions") {
  const EnsembleStats s1{2, 3, 10}, s2{4, 4, 10};
  const MixedEmosCoefficients nested{1.0, 0.8, 0.0, 0.5, 1.2, 0.0};
  const auto m = predict_mixed(nested, s1, s2);
  const auto s = predict_single({1.0, 0.8, 0.5, 1.2}, s1);
  CHECK(m.mu == s.mu);
  CHECK(m.sigma == s.sigma);
  CHECK(predict_mixed({0, 0.5, 0.5, 0, 1, 1}, s1, s2).mu == 3.0);
  CHECK(predict_mixed({0, 0.5, 0.5, 0, 1, 1}, s1, s2).sigma == 5.0);
  CHECK(predict_mixed({0, 0, 0, 0, 0, 0}, s1, s2, 0.25).sigma == 0.25);
}

TEST_CASE("model weights") {
  CHECK(model_weights({0, 2, 2, 0, 1, 1}).weight_mean == 0.5);
  const auto w = model_weights({0, 3, 1, 0, 1, 3});
  CHECK(w.weight_mean == 0.75);
  CHECK(w.weight_std == 0.25);
  CHECK(w.defined_mean);
  const auto z = model_weights({0, 0, 0, 0, 0, 0});
  CHECK_FALSE(z.defined_mean);
  CHECK_FALSE(z.defined_std);
  CHECK(z.weight_mean == 0.5);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int i = 0; i < 50; ++i) {
    const MixedEmosCoefficients c{0, u(rng), u(rng), 0, u(rng), u(rng)};
    const auto wi = model_weights(c);
    const auto swapped = model_weights({0, c.b2, c.b1, 0, c.d2, c.d1});
    CHECK(wi.weight_mean + swapped.weight_mean == Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("fit_single recovers known coefficients") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 0.01), mean(10.0, 5.0);
  std::vector<TrainingSample> xs;
  for (int i = 0; i < 60; ++i) {
    const double m = mean(rng);
    xs.push_back(fixture::sample(i, 2.0 + m + noise(rng), m, 1.0));
  }
  const auto r = fit_single(xs, "A", tight());
  CHECK(r.diagnostics.converged);
  CHECK(r.coefficients.a == Approx(2.0).epsilon(0.025));
  CHECK(r.coefficients.b == Approx(1.0).epsilon(0.05));
  CHECK(r.diagnostics.sample_count == 60);
  CHECK(r.diagnostics.objective <= r.diagnostics.initial_objective);
}

TEST_CASE("a perfect predictor drives the spread to the floor") {
  std::vector<TrainingSample> xs;
  for (int i = 0; i < 40; ++i) xs.push_back(fixture::sample(i, 0.3 * i, 0.3 * i, 1.0));
  const auto r = fit_single(xs, "A", tight());
  CHECK(r.coefficients.a == Approx(0.0).epsilon(1e-3).scale(1.0));
  CHECK(r.coefficients.b == Approx(1.0).epsilon(1e-3));
  CHECK(r.diagnostics.objective < 1e-3);
}

TEST_CASE("a constant predictor fits climatology") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> y(3.0, 1.0);
  std::vector<double> ys(4000);
  for (auto& v : ys) v = y(rng);
  std::vector<TrainingSample> xs;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    xs.push_back(fixture::sample(static_cast<int>(i), ys[i], 0.0, 1.0));
  }
  const auto r = fit_single(xs, "A", tight());
  double mean = 0.0, ss = 0.0;
  for (double v : ys) mean += v;
  mean /= static_cast<double>(ys.size());
  for (double v : ys) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(ys.size()));
  const auto p = predict_single(r.coefficients, {0.0, 1.0, 10});
  CHECK(r.coefficients.a == Approx(mean).epsilon(0.02));
  CHECK(p.sigma == Approx(sd).epsilon(0.03));
}

TEST_CASE("mixed fit ignores an uninformative second model") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<TrainingSample> xs;
  for (int i = 0; i < 200; ++i) {
    const double truth = 5.0 + 4.0 * z(rng);
    xs.push_back(fixture::sample(i, truth, truth + 0.5 * z(rng), 0.5, 10.0 + 3.0 * z(rng), 1.0));
  }
  const auto r = fit_mixed(xs, kAB, tight());
  CHECK(r.coefficients.b2 <= 0.05);
  CHECK(r.coefficients.b1 == Approx(1.0).epsilon(0.1));
}

TEST_CASE("identical model streams give the single-model objective") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<TrainingSample> xs;
  for (int i = 0; i < 80; ++i) {
    const double truth = 4.0 * z(rng);
    const double m = truth + 1.0 + z(rng);
    xs.push_back(fixture::sample(i, truth, m, 0.8, m, 0.8));
  }
  const auto opt = tight();
  const auto single = fit_single(xs, "A", opt);
  const auto mixed = fit_mixed(xs, kAB, opt);
  CHECK(mixed.diagnostics.objective ==
        Approx(single.diagnostics.objective).epsilon(2 * opt.objective_tolerance + 1e-9));
  CHECK(mixed.coefficients.b1 + mixed.coefficients.b2 ==
        Approx(single.coefficients.b).epsilon(1e-3));
}

TEST_CASE("zero upper bounds reduce the mixed fit to the second model") {
  std::mt19937_64 rng(23);
  auto xs = fixture::two_model_set(rng, 60);
  FitOptions opt = tight();
  std::vector<TrainingSample> second_only;
  for (auto s : xs) {
    s.stats_per_model["A"] = s.stats_per_model.at("B");
    second_only.push_back(s);
  }
  const auto single = fit_single(second_only, "A", opt);
  opt.bounds = {0.0, 0.0};
  const auto mixed = fit_mixed(xs, kAB, opt);
  CHECK(mixed.coefficients.b1 == 0.0);
  CHECK(mixed.coefficients.d1 == 0.0);
  CHECK(mixed.diagnostics.objective ==
        Approx(single.diagnostics.objective).epsilon(1e-6));
}

TEST_CASE("upper bounds on the first model hold exactly") {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 10; ++t) {
    auto xs = fixture::two_model_set(rng, 45, 0.5, 2.0);
    FitOptions opt;
    opt.bounds = {0.3 + 0.05 * t, 0.2};
    const auto r = fit_mixed(xs, kAB, opt);
    CHECK(r.coefficients.b1 <= *opt.bounds.b1_max);
    CHECK(r.coefficients.d1 <= *opt.bounds.d1_max);
    CHECK(r.coefficients.b1 >= 0.0);
    CHECK(r.coefficients.b2 >= 0.0);
  }
}

TEST_CASE("mixed optimum is never worse than either single-model optimum") {
  std::mt19937_64 rng(25);
  const auto opt = FitOptions{};
  for (int t = 0; t < 20; ++t) {
    auto xs = fixture::two_model_set(rng, 45, 0.5 + 0.1 * t, 1.5);
    std::vector<TrainingSample> b_only;
    for (auto s : xs) {
      s.stats_per_model["A"] = s.stats_per_model.at("B");
      b_only.push_back(s);
    }
    const double f1 = fit_single(xs, "A", opt).diagnostics.objective;
    const double f2 = fit_single(b_only, "A", opt).diagnostics.objective;
    const double fm = fit_mixed(xs, kAB, opt).diagnostics.objective;
    CHECK(fm <= f1 + 2 * opt.objective_tolerance);
    CHECK(fm <= f2 + 2 * opt.objective_tolerance);
  }
}

TEST_CASE("an affine map of a predictor leaves the optimal objective unchanged") {
  std::mt19937_64 rng(26);
  const auto opt = tight();
  for (int t = 0; t < 5; ++t) {
    auto xs = fixture::two_model_set(rng, 50);
    auto mapped = xs;
    for (auto& s : mapped) {
      auto& st = s.stats_per_model["B"];
      st.mean = 2.5 * st.mean - 7.0;
      st.std = 2.5 * st.std;
    }
    const double f = fit_mixed(xs, kAB, opt).diagnostics.objective;
    const double g = fit_mixed(mapped, kAB, opt).diagnostics.objective;
    CHECK(g == Approx(f).epsilon(1e-6));
    CHECK(fit_single(mapped, "A", opt).diagnostics.objective ==
          Approx(fit_single(xs, "A", opt).diagnostics.objective).epsilon(1e-9));
  }
}

TEST_CASE("fit traces decrease monotonically") {
  std::mt19937_64 rng(27);
  auto xs = fixture::two_model_set(rng, 45);
  for (const auto& trace : {fit_single(xs, "A", FitOptions{}).diagnostics.trace,
                            fit_mixed(xs, kAB, FitOptions{}).diagnostics.trace}) {
    REQUIRE_FALSE(trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
  }
}

TEST_CASE("predictive spread respects the floor after fitting") {
  std::mt19937_64 rng(28);
  auto xs = fixture::two_model_set(rng, 45);
  FitOptions opt;
  opt.min_sigma = 0.05;
  const auto r = fit_mixed(xs, kAB, opt);
  for (const auto& s : xs) {
    const auto p = predict_mixed(r.coefficients, s.stats("A"), s.stats("B"), opt.min_sigma);
    CHECK(p.sigma >= opt.min_sigma);
    CHECK(std::isfinite(p.mu));
  }
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(fit_single(std::vector<TrainingSample>{}, "A", FitOptions{}), InvalidInput);
  std::vector<TrainingSample> xs{fixture::sample(0, 1.0, 1.0, 1.0)};
  CHECK_THROWS_AS(fit_mixed(xs, kAB, FitOptions{}), InvalidInput);
  FitOptions bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = FitOptions{};
  bad.bounds.b1_max = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);

  std::mt19937_64 rng(29);
  auto many = fixture::two_model_set(rng, 45);
  FitOptions capped;
  capped.max_iterations = 1;
  capped.objective_tolerance = 1e-15;
  CHECK_THROWS_AS(fit_single(many, "A", capped), NonConvergence);
  const auto r = try_fit_single(many, "A", capped);
  CHECK_FALSE(r.diagnostics.converged);
}
