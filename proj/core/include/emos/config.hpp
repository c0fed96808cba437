#pragma once

// Run configuration shared by the pipeline stages. Files hold flat
// `key = value` lines with dotted keys; `#` starts a comment. Command-line
// flags are applied after the file and therefore override it.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "emos/emos.hpp"
#include "emos/scoring.hpp"
#include "emos/synth.hpp"
#include "emos/terrain.hpp"
#include "emos/training.hpp"
#include "emos/transition.hpp"

namespace emos {

struct RunConfig {
  /// Scenario written by `simulate`; scenario.seed is the run seed.
  ScenarioSpec scenario = paper_like_preset(1, 5, 90);

  std::string data_dir = "data";
  std::string output_dir = "output";
  // Explicit paths; empty means the default file inside data_dir / output_dir.
  std::string observations_path;
  std::string stations_path;
  std::string topography_path;
  std::string store_path;
  std::map<ModelId, std::string> forecast_paths;

  /// Models used downstream of `simulate`, in predictor order. The first
  /// model of a mixed strategy is the one ending at transition.horizon.
  std::vector<ModelId> models;
  std::vector<Strategy> strategies;  // empty = one single per model + mixed of the first two
  std::string reference;             // empty = raw:<first model>
  std::vector<int> leads;            // empty = every lead present in the forecasts

  RollingWindowSpec window;
  FitOptions fit;
  TransitionSpec transition;
  StratificationSpec strata;

  int interpolation_max_gap = 3;  // hours between native leads
  double lapse_rate = kLapseRatePer100m;
  int burn_in_days = -1;  // verification skips this many issue days; -1 = window days
  int pit_bins = 20;
  double alpha = 0.05;
  unsigned threads = 0;  // 0 = hardware concurrency

  std::uint64_t seed() const { return scenario.seed; }

  std::string observations_file() const;
  std::string stations_file() const;
  std::string topography_file() const;
  std::string forecasts_file(const ModelId& model) const;
  std::string store_file() const;
  std::string predictions_file() const;
  std::string seamless_file(TransitionScheme scheme) const;
  std::string report_dir() const;

  std::vector<ModelId> model_list() const;
  /// Configured strategies plus the tapered variant of every mixed strategy.
  std::vector<Strategy> strategy_list() const;
  std::string reference_strategy() const;
  int burn_in() const { return burn_in_days < 0 ? window.window_days : burn_in_days; }

  /// Throws InvalidInput on inconsistent settings.
  void validate() const;
};

/// Sets one dotted key; throws InvalidInput on an unknown key or bad value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Applies every line of a configuration stream; errors cite source and line.
void apply_config(RunConfig& config, std::istream& in, const std::string& source = "<stream>");
void apply_config_file(RunConfig& config, const std::string& path);

/// Comma-separated list of leads or ranges "a-b" with optional "/step".
std::vector<int> parse_lead_list(const std::string& text);

}  // namespace emos
