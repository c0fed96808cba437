#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "emos/error.hpp"
#include "emos/synth.hpp"
#include "fixtures.hpp"

using namespace emos;
using doctest::Approx;

namespace {

ScenarioSpec quiet_spec() {
  ScenarioSpec s;
  s.n_stations = 2;
  s.n_days = 5;
  s.truth.seasonal_amplitude = 0.0;
  s.truth.diurnal_amplitude = 0.0;
  s.truth.innovation_std = 0.0;
  s.truth.elevation_gradient = 0.0;
  ModelSpec m;
  m.id = "m";
  m.member_count = 5;
  m.horizon = 48;
  m.hourly_until = 48;
  s.models.push_back(m);
  return s;
}

double lag1_autocorrelation(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += (x[i] - mean) * (x[i] - mean);
    if (i) num += (x[i] - mean) * (x[i - 1] - mean);
  }
  return num / den;
}

}  // namespace

TEST_CASE("a noise-free truth is constant at the level") {
  const auto spec = quiet_spec();
  for (const auto& series : generate_truth(spec)) {
    for (double v : series.values()) CHECK(v == spec.truth.level);
  }
}

TEST_CASE("white-noise truth has no lag-1 autocorrelation") {
  auto spec = quiet_spec();
  spec.n_stations = 1;
  spec.n_days = 420;
  spec.truth.ar_coefficient = 0.0;
  spec.truth.innovation_std = 1.0;
  const auto truth = generate_truth(spec);
  REQUIRE(truth[0].size() >= 10000);
  CHECK(std::abs(lag1_autocorrelation(truth[0].values())) < 0.1);

  spec.truth.ar_coefficient = 0.9;
  CHECK(lag1_autocorrelation(generate_truth(spec)[0].values()) > 0.8);
}

TEST_CASE("generation is deterministic under the seed") {
  const auto spec = paper_like_preset(7, 3, 10);
  const auto a = generate_station(spec, 1);
  const auto b = generate_station(spec, 1);
  CHECK(std::equal(a.observations.values().begin(), a.observations.values().end(),
                   b.observations.values().begin()));
  REQUIRE(a.forecasts.size() == b.forecasts.size());
  for (std::size_t m = 0; m < a.forecasts.size(); ++m) {
    REQUIRE(a.forecasts[m].size() == b.forecasts[m].size());
    for (std::size_t i = 0; i < a.forecasts[m].size(); ++i) {
      CHECK(a.forecasts[m][i].members == b.forecasts[m][i].members);
    }
  }
  const auto other_station = generate_station(spec, 2);
  CHECK(other_station.observations.values()[100] != a.observations.values()[100]);
  const auto other_seed = generate_station(paper_like_preset(8, 3, 10), 1);
  CHECK(other_seed.observations.values()[100] != a.observations.values()[100]);
}

TEST_CASE("a pure bias gives members equal to truth plus bias") {
  auto spec = quiet_spec();
  spec.truth.innovation_std = 0.5;
  spec.models[0].bias_mean = 2.0;
  spec.models[0].dispersion = 1.0;
  const auto stations = generate_stations(spec);
  const auto truth = generate_truth(spec, stations[0], 0);
  for (const auto& f : generate_model_ensemble(spec, 0, stations[0], 0, truth)) {
    for (double x : f.members) CHECK(x == Approx(*truth.at(f.valid_time()) + 2.0).epsilon(1e-12));
  }
}

TEST_CASE("dispersion scales the spread against the actual error") {
  auto spec = quiet_spec();
  spec.n_days = 400;
  spec.common_error_std = 1.0;
  spec.models[0].member_count = 200;
  spec.models[0].dispersion = 0.5;
  spec.models[0].horizon = 24;
  spec.models[0].hourly_until = 24;
  spec.lead_hours = {24};
  const auto stations = generate_stations(spec);
  const auto truth = generate_truth(spec, stations[0], 0);
  double err_sq = 0.0, spread = 0.0;
  std::size_t n = 0;
  for (const auto& f : generate_model_ensemble(spec, 0, stations[0], 0, truth)) {
    const auto s = ensemble_stats(f);
    const double e = s.mean - *truth.at(f.valid_time());
    err_sq += e * e;
    spread += s.std;
    ++n;
  }
  const double error_std = std::sqrt(err_sq / static_cast<double>(n));
  CHECK(spread / static_cast<double>(n) == Approx(0.5 * error_std).epsilon(0.08));
}

TEST_CASE("forecasts stop at the model horizon") {
  const auto spec = paper_like_preset(1, 1, 3);
  const auto s = generate_station(spec, 0);
  for (std::size_t m = 0; m < spec.models.size(); ++m) {
    for (const auto& f : s.forecasts[m]) {
      CHECK(f.lead_time <= spec.models[m].horizon);
      CHECK(spec.models[m].native_lead(f.lead_time));
    }
  }
}

TEST_CASE("the preset mirrors the two-model setting") {
  const auto spec = paper_like_preset();
  REQUIRE(spec.models.size() == 2);
  const auto& hires = spec.models[0];
  const auto& global = spec.models[1];
  CHECK(hires.member_count == 21);
  CHECK(hires.horizon == 120);
  CHECK(global.member_count == 51);
  CHECK(global.horizon == 150);
  CHECK(global.native_lead(90));
  CHECK(global.native_lead(93));
  CHECK_FALSE(global.native_lead(91));
  CHECK(hires.dispersion < global.dispersion);
  CHECK(global.dispersion < 1.0);
  CHECK(spec.n_stations == 50);
  CHECK(spec.n_days == 200);
}

TEST_CASE("lead interpolation") {
  std::vector<EnsembleForecast> fc{fixture::forecast("S", "m", 0, 90, {0.0}),
                                   fixture::forecast("S", "m", 0, 93, {3.0})};
  const auto out = interpolate_leads(fc, 3);
  REQUIRE(out.size() == 4);
  CHECK(out[1].lead_time == 91);
  CHECK(out[1].members[0] == 1.0);
  CHECK(out[2].members[0] == 2.0);
  CHECK(out[0].members == fc[0].members);
  CHECK(out[3].members == fc[1].members);

  std::vector<EnsembleForecast> flat{fixture::forecast("S", "m", 0, 0, {4.0, 6.0}),
                                     fixture::forecast("S", "m", 0, 3, {4.0, 6.0}),
                                     fixture::forecast("S", "m", 0, 6, {4.0, 6.0})};
  for (const auto& f : interpolate_leads(flat, 3)) CHECK(f.members == std::vector<double>{4.0, 6.0});

  std::vector<EnsembleForecast> line;
  for (int lead = 0; lead <= 24; lead += 6) {
    line.push_back(fixture::forecast("S", "m", 0, lead, {0.25 * lead - 1.0, 2.0 - 0.5 * lead}));
  }
  const auto dense = interpolate_leads(line, 6);
  CHECK(dense.size() == 25);
  for (const auto& f : dense) {
    CHECK(f.members[0] == Approx(0.25 * f.lead_time - 1.0).epsilon(1e-14));
    CHECK(f.members[1] == Approx(2.0 - 0.5 * f.lead_time).epsilon(1e-14));
  }

  CHECK_THROWS_AS(interpolate_leads(line, 3), InvalidInput);
  std::vector<EnsembleForecast> ragged{fixture::forecast("S", "m", 0, 0, {1.0}),
                                       fixture::forecast("S", "m", 0, 3, {1.0, 2.0})};
  CHECK_THROWS_AS(interpolate_leads(ragged, 3), InvalidInput);
}
