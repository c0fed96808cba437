#pragma once

// Synthetic stations, observations and ensemble forecasts with a controllable
// error structure: diurnal bias curves, lead-dependent error growth, errors
// shared between models, and under-dispersive member spread.

#include <cstdint>
#include <vector>

#include "emos/domain.hpp"

namespace emos {

struct TruthSpec {
  double level = 8.0;               // degC at 500 m
  double seasonal_amplitude = 8.0;  // coldest mid-January
  double diurnal_amplitude = 4.0;
  int diurnal_peak_hour = 14;  // UTC
  double ar_coefficient = 0.97;  // hourly AR(1) anomaly
  double innovation_std = 0.4;
  double elevation_gradient = 0.0065;  // degC per m above 500 m, applied to the level

  void validate() const;
};

struct ModelSpec {
  ModelId id;
  int member_count = 21;
  int horizon = 120;        // hours
  int hourly_until = 120;   // native step is 1 h up to this lead ...
  int coarse_step = 3;      // ... and coarse_step hours beyond it
  // bias(h) = (bias_mean + bias_amplitude * cos(2 pi (h - bias_peak_hour) / 24)) * (1 + bias_variability * xi_day)
  double bias_mean = 0.0;
  double bias_amplitude = 0.0;
  int bias_peak_hour = 14;
  double bias_variability = 0.0;
  // model-specific error: AR(1) across lead hours with std error_std + error_growth * lead
  double error_std = 0.0;
  double error_growth = 0.0;
  double error_lead_correlation = 0.95;
  /// Member spread relative to the forecast's actual error std (< 1 is under-dispersive).
  double dispersion = 1.0;
  double station_bias_std = 0.0;      // constant per station
  double grid_elevation_std = 0.0;    // m, grid point minus station elevation

  void validate() const;
  bool native_lead(int lead) const;
};

struct ScenarioSpec {
  std::uint64_t seed = 1;
  int n_stations = 10;
  int n_days = 120;
  Date start_date = Date{std::chrono::year{2018} / 1 / 1};
  std::vector<int> lead_hours;  // emitted leads; empty = 0 .. longest horizon
  TruthSpec truth;
  // Error shared by all models (unpredictable part of the weather).
  double common_error_std = 0.0;
  double common_error_growth = 0.0;
  double common_lead_correlation = 0.97;
  /// Log-normal day-to-day predictability factor std, scaling errors and spread alike.
  double predictability_variability = 0.0;
  double station_elevation_min = 300.0;
  double station_elevation_max = 2500.0;
  std::vector<ModelSpec> models;

  void validate() const;
  int max_lead() const;
  std::vector<int> leads() const;
  const ModelSpec& model(const ModelId& id) const;
};

/// Two-model preset: "hires" (hourly, 21 members, 120 h, warm-night/cold-day
/// bias that is small at night, strongly under-dispersive) and "global" (hourly
/// to 90 h then 3-hourly, 51 members, 150 h, cold-night/warm-day bias that is
/// small by day, milder under-dispersion).
ScenarioSpec paper_like_preset(std::uint64_t seed = 1, int n_stations = 50, int n_days = 200);

/// Everything generated for one station.
struct StationScenario {
  StationMetadata station;
  ObservationSeries observations;
  std::vector<std::vector<EnsembleForecast>> forecasts;  // per model, spec order
};

std::vector<StationMetadata> generate_stations(const ScenarioSpec& spec);

/// Hourly truth for one station: level + seasonal + diurnal sinusoids + AR(1) noise.
ObservationSeries generate_truth(const ScenarioSpec& spec, const StationMetadata& station,
                                 int station_index);
std::vector<ObservationSeries> generate_truth(const ScenarioSpec& spec);

/// Forecasts of spec.models[model_index] for one station, 00 UTC inits, native
/// leads only. Members are in the grid point's elevation frame.
std::vector<EnsembleForecast> generate_model_ensemble(const ScenarioSpec& spec,
                                                      std::size_t model_index,
                                                      const StationMetadata& station,
                                                      int station_index,
                                                      const ObservationSeries& truth);

StationScenario generate_station(const ScenarioSpec& spec, int station_index);

/// Member-wise linear interpolation to every target_step hours between native
/// leads. Throws InvalidInput when consecutive leads are more than max_gap hours
/// apart or member counts differ.
std::vector<EnsembleForecast> interpolate_leads(const std::vector<EnsembleForecast>& forecasts,
                                                int max_gap, int target_step = 1);

}  // namespace emos
