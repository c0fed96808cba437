#pragma once

// Pipeline stages behind the command-line tool: simulate, train, predict,
// transition, verify and tpi. Each stage reads and writes the CSV tables of
// io.hpp; the per-station building blocks are exposed for in-process use.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "emos/config.hpp"
#include "emos/io.hpp"
#include "emos/scoring.hpp"
#include "emos/terrain.hpp"
#include "emos/training.hpp"
#include "emos/transition.hpp"

namespace emos::pipeline {

/// One station's inputs after lapse-rate correction and interpolation to
/// hourly leads. Forecasts are sorted by (init time, lead time).
struct StationData {
  StationMetadata station;
  ObservationSeries observations;
  std::map<ModelId, std::vector<EnsembleForecast>> forecasts;

  /// Lead times available for a model.
  std::set<int> leads(const ModelId& model) const;
  /// Distinct init dates over all models, ascending.
  std::vector<Date> issue_dates() const;
};

/// Lapse-corrects every member to the station elevation, interpolates each model
/// to hourly leads and keeps the configured leads. Throws InvalidInput when a
/// model lacks a grid elevation, when a model has two inits on one date, or
/// when native leads are further apart than config.interpolation_max_gap.
StationData prepare_station(const StationMetadata& station, ObservationSeries observations,
                            const std::map<ModelId, std::vector<EnsembleForecast>>& raw,
                            const RunConfig& config);

/// Training samples per lead time; each sample holds the statistics of every
/// configured model that forecasts that lead.
Archive build_archive(const StationData& data, const std::vector<ModelId>& models);

/// Keys fitted or predicted for one issue date: every strategy at every lead its
/// models cover, tapered strategies only at the taper leads.
std::vector<CoefficientKey> keys_for_issue(const StationData& data, Date issue_date,
                                           const RunConfig& config);

struct StationTraining {
  CoefficientStore store;
  std::vector<KeyOutcome> problems;  // non-converged fits and fit errors
  std::size_t fresh_fits = 0;
  std::size_t fallbacks = 0;
};

/// Fits all keys of all issue dates in date order. Tapered mixed keys are
/// refitted under bounds derived from the same issue's mixed coefficients at
/// the anchor lead.
StationTraining train_station(const StationData& data, const RunConfig& config);

/// Predictions for every issue date with forecasts, sorted by init, lead and strategy.
std::vector<io::PredictionRow> predict_station(const StationData& data,
                                               const CoefficientStore& store,
                                               const RunConfig& config);

/// "seamless-<scheme>:A:B" for mixed strategy A:B.
std::string seamless_name(const Strategy& mixed, TransitionScheme scheme);

/// Seamless series for every mixed strategy and (station, init) holding both
/// the mixed predictions and single-model predictions of the second model.
std::vector<io::PredictionRow> seamless_predictions(const std::vector<io::PredictionRow>& rows,
                                                    const RunConfig& config,
                                                    TransitionScheme scheme);

struct WeightRow {
  StationId station_id;
  HourStamp init_time;
  int lead_time = 0;
  ModelWeights weights;
};

struct DmEntry {
  std::string first;
  std::string second;
  SignificanceResult result;
};

struct PitSummary {
  PitHistogram histogram;
  ChiSquareResult uniformity;
};

struct VerifyResult {
  VerificationReport report;
  std::map<std::string, PitSummary> pit;
  std::vector<DmEntry> dm;
  std::vector<WeightRow> weights;
  std::map<std::string, SeamDiagnostics> seams;
  std::size_t cases = 0;
};

/// Scores predictions and raw ensembles ("raw:<model>") on the cases after
/// the burn-in period where every compared strategy has a value.
VerifyResult verify(const std::vector<StationData>& stations,
                    const std::vector<io::PredictionRow>& predictions,
                    const CoefficientStore& store, const RunConfig& config);

/// Writes crps_<stratification>.csv, pit_hist.csv, pit_uniformity.csv,
/// dm_matrix.csv, weights.csv and seam.csv into `dir`.
void write_report(const VerifyResult& result, const StratificationSpec& strata,
                  const std::string& dir);

/// Smooth synthetic terrain covering the scenario's station area.
ElevationGrid synthetic_topography(const ScenarioSpec& spec);

// Whole-dataset stages used by the command-line tool. They throw InvalidInput
// or SchemaError on bad input.

void simulate(const RunConfig& config);

struct TrainSummary {
  std::size_t keys = 0;
  std::size_t fresh_fits = 0;
  std::size_t fallbacks = 0;
  std::vector<KeyOutcome> problems;

  bool converged() const;
};

/// `stations` filters by id; empty = all stations in the station table.
TrainSummary train(const RunConfig& config, const std::vector<StationId>& stations = {});
void predict(const RunConfig& config, const std::vector<StationId>& stations = {});
void transition(const RunConfig& config, TransitionScheme scheme);
VerifyResult verify(const RunConfig& config, const std::vector<StationId>& stations = {});
void tpi(const RunConfig& config, const std::vector<StationId>& stations = {});

/// Loads and prepares the configured stations' data.
std::vector<StationData> load_stations_data(const RunConfig& config,
                                            const std::vector<StationId>& stations);

}  // namespace emos::pipeline
