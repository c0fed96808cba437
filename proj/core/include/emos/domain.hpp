#pragma once

// Core records shared by every stage of the postprocessing chain.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emos/time.hpp"

namespace emos {

using StationId = std::string;
using ModelId = std::string;

struct StationMetadata {
  StationId station_id;
  double latitude = 0.0;   // degrees N
  double longitude = 0.0;  // degrees E
  double elevation = 0.0;  // m MSL
  /// Elevation of the nearest grid point per model, m MSL.
  std::map<ModelId, double> grid_elevation;

  /// Throws InvalidInput when coordinates or elevations are out of range.
  void validate() const;
};

struct EnsembleForecast {
  StationId station_id;
  ModelId model_id;
  HourStamp init_time;
  int lead_time = 0;  // hours
  std::vector<double> members;

  HourStamp valid_time() const { return init_time + std::chrono::hours{lead_time}; }
  void validate() const;
};

struct EnsembleStats {
  double mean = 0.0;
  double std = 0.0;  // population (1/m) standard deviation
  std::size_t member_count = 0;
};

/// Hourly observations of one station. Missing values are NaN.
class ObservationSeries {
 public:
  ObservationSeries() = default;
  /// Throws InvalidInput unless timestamps are strictly increasing and sizes agree.
  ObservationSeries(StationId station_id, std::vector<HourStamp> timestamps,
                    std::vector<double> values);

  const StationId& station_id() const noexcept { return station_id_; }
  std::span<const HourStamp> timestamps() const noexcept { return timestamps_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Observed value at `t`, or nullopt when absent or missing.
  std::optional<double> at(HourStamp t) const;

 private:
  StationId station_id_;
  std::vector<HourStamp> timestamps_;
  std::vector<double> values_;
};

struct TrainingSample {
  HourStamp init_time;
  HourStamp valid_time;
  std::map<ModelId, EnsembleStats> stats_per_model;
  double observation = 0.0;

  const EnsembleStats& stats(const ModelId& model) const;
};

struct GaussianPredictive {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Throws InvalidInput on an empty member list.
EnsembleStats ensemble_stats(std::span<const double> members);
inline EnsembleStats ensemble_stats(const EnsembleForecast& forecast) {
  return ensemble_stats(forecast.members);
}

struct AlignResult {
  std::vector<TrainingSample> samples;  // sorted by valid_time
  std::size_t dropped = 0;              // init times without a complete tuple
};

/// Pairs forecasts at `lead_time` with observations. An init time is kept only
/// when every model in `models` has a forecast and the observation exists.
/// An empty `models` list means every model present in `forecasts`.
AlignResult align(std::span<const EnsembleForecast> forecasts, const ObservationSeries& obs,
                  int lead_time, std::span<const ModelId> models = {});

}  // namespace emos
