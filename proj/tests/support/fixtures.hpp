#pragma once

// Small builders for training sets and forecast records shared by the tests.

#include <random>
#include <string>
#include <vector>

#include "emos/domain.hpp"
#include "emos/time.hpp"

namespace fixture {

inline emos::HourStamp day(int index, int hour = 0) {
  return emos::make_hour(2020, 1, 1, hour) + std::chrono::days{index};
}

inline emos::TrainingSample sample(int day_index, double y, double mean1, double std1,
                                   double mean2 = 0.0, double std2 = 0.0, int lead = 24) {
  emos::TrainingSample s;
  s.init_time = day(day_index);
  s.valid_time = s.init_time + std::chrono::hours{lead};
  s.stats_per_model["A"] = {mean1, std1, 20};
  if (std2 > 0.0 || mean2 != 0.0) s.stats_per_model["B"] = {mean2, std2, 50};
  s.observation = y;
  return s;
}

/// Two-model training set: y = truth, each model sees truth plus its own
/// error with a spread loosely tied to the error size.
inline std::vector<emos::TrainingSample> two_model_set(std::mt19937_64& rng, int n,
                                                       double err1 = 1.0, double err2 = 1.5,
                                                       double bias1 = 0.5, double bias2 = -1.0) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.3, 1.5);
  std::vector<emos::TrainingSample> out;
  for (int i = 0; i < n; ++i) {
    const double truth = 5.0 + 4.0 * z(rng);
    const double m1 = truth + bias1 + err1 * z(rng);
    const double m2 = truth + bias2 + err2 * z(rng);
    out.push_back(sample(i, truth, m1, err1 * u(rng), m2, err2 * u(rng)));
  }
  return out;
}

inline emos::EnsembleForecast forecast(const std::string& station, const std::string& model,
                                       int day_index, int lead, std::vector<double> members) {
  return {station, model, day(day_index), lead, std::move(members)};
}

}  // namespace fixture
