#pragma once

// CSV tables exchanged between pipeline stages. All timestamps are ISO-8601 UTC,
// reals carry 9 significant digits.
//
//   observations.csv     station_id,valid_time,temp_c
//   forecasts_<model>.csv station_id,init_time,lead_h,member_idx,temp_c
//   stations.csv         station_id,lat,lon,elev_m,grid_elev_<model>...
//   predictions.csv      station_id,init_time,lead_h,strategy,mu,sigma

#include <iosfwd>
#include <string>
#include <vector>

#include "emos/domain.hpp"

namespace emos::io {

inline constexpr const char* kObservationsHeader = "station_id,valid_time,temp_c";
inline constexpr const char* kForecastsHeader = "station_id,init_time,lead_h,member_idx,temp_c";
inline constexpr const char* kPredictionsHeader = "station_id,init_time,lead_h,strategy,mu,sigma";

void write_observations(std::ostream& out, const std::vector<ObservationSeries>& series);
/// One series per station in order of first appearance; rows are sorted by time.
/// Missing values ("", "nan", "NA") are kept as NaN.
std::vector<ObservationSeries> read_observations(std::istream& in,
                                                 const std::string& source = "<stream>");

void write_forecasts(std::ostream& out, const std::vector<EnsembleForecast>& forecasts);
/// Rows of one forecast must be contiguous with member_idx 0, 1, ...
std::vector<EnsembleForecast> read_forecasts(std::istream& in, const ModelId& model,
                                             const std::string& source = "<stream>");

void write_stations(std::ostream& out, const std::vector<StationMetadata>& stations,
                    const std::vector<ModelId>& models);
std::vector<StationMetadata> read_stations(std::istream& in,
                                           const std::string& source = "<stream>");

struct PredictionRow {
  StationId station_id;
  HourStamp init_time;
  int lead_time = 0;
  std::string strategy;
  GaussianPredictive prediction;

  friend bool operator==(const PredictionRow& a, const PredictionRow& b) {
    return a.station_id == b.station_id && a.init_time == b.init_time &&
           a.lead_time == b.lead_time && a.strategy == b.strategy &&
           a.prediction.mu == b.prediction.mu && a.prediction.sigma == b.prediction.sigma;
  }
};

void write_predictions(std::ostream& out, const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_predictions(std::istream& in,
                                            const std::string& source = "<stream>");

/// File helpers; throw InvalidInput when the file cannot be opened.
std::vector<ObservationSeries> load_observations(const std::string& path);
std::vector<EnsembleForecast> load_forecasts(const std::string& path, const ModelId& model);
std::vector<StationMetadata> load_stations(const std::string& path);
std::vector<PredictionRow> load_predictions(const std::string& path);

}  // namespace emos::io
