#pragma once

// Rolling-archive coefficient estimation per (station, lead time, strategy),
// with a fallback chain for short archives and a persistent coefficient store.

#include <compare>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "emos/domain.hpp"
#include "emos/emos.hpp"

namespace emos {

struct RollingWindowSpec {
  int window_days = 45;
  int min_samples = 30;
  /// Most recent fresh coefficients younger than this are reused when the
  /// window holds fewer than min_samples.
  int reuse_days = 10;

  void validate() const;
};

/// How predictions for one key are produced.
///   single:A      single-model EMOS on model A
///   mixed:A:B     two-model EMOS with A as predictor 1
///   mixed-t1:A:B  two-model EMOS refitted under the transition-1 taper bounds
struct Strategy {
  enum class Kind { single, mixed, mixed_tapered };

  Kind kind = Kind::single;
  ModelId first;
  ModelId second;  // empty for single

  static Strategy single(ModelId model) { return {Kind::single, std::move(model), {}}; }
  static Strategy mixed(ModelId a, ModelId b) { return {Kind::mixed, std::move(a), std::move(b)}; }
  static Strategy mixed_tapered(ModelId a, ModelId b) {
    return {Kind::mixed_tapered, std::move(a), std::move(b)};
  }

  bool is_mixed() const { return kind != Kind::single; }
  std::pair<ModelId, ModelId> models() const { return {first, second}; }
  std::string to_string() const;
  /// Throws InvalidInput on an unknown form.
  static Strategy parse(const std::string& text);

  auto operator<=>(const Strategy&) const = default;
};

struct CoefficientKey {
  StationId station_id;
  int lead_time = 0;
  Strategy strategy;
  Date issue_date;

  auto operator<=>(const CoefficientKey&) const = default;
};

using AnyCoefficients = std::variant<EmosCoefficients, MixedEmosCoefficients>;

struct CoefficientRecord {
  AnyCoefficients coefficients;
  std::size_t n_samples = 0;
  double objective = 0.0;  // NaN when no fit was performed
  bool converged = true;
  bool fallback = false;

  friend bool operator==(const CoefficientRecord& x, const CoefficientRecord& y);
};

/// Coefficients of a strategy's identity mapping (fallback of last resort).
AnyCoefficients identity_coefficients(const Strategy& s);

class CoefficientStore {
 public:
  void put(const CoefficientKey& key, CoefficientRecord record);
  const CoefficientRecord* find(const CoefficientKey& key) const;

  /// Latest non-fallback record for the same station, lead time and strategy
  /// with issue date in [issue_date - max_age_days, issue_date - 1].
  std::optional<std::pair<CoefficientKey, CoefficientRecord>> latest_fresh(
      const StationId& station, int lead_time, const Strategy& strategy, Date issue_date,
      int max_age_days) const;

  const std::map<CoefficientKey, CoefficientRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  /// Line-delimited CSV; one record per key, values with 9 significant digits.
  void write(std::ostream& out) const;
  /// Throws SchemaError naming `source`, line and column.
  static CoefficientStore read(std::istream& in, const std::string& source = "<stream>");

  friend bool operator==(const CoefficientStore&, const CoefficientStore&) = default;

 private:
  std::map<CoefficientKey, CoefficientRecord> records_;
};

/// Header line of the persisted store.
inline constexpr const char* kCoefficientStoreHeader =
    "station_id,lead_h,strategy,issue_date,a,b1,b2,c,d1,d2,n_samples,objective,converged,"
    "fallback";

/// Samples whose init date lies in [issue_date - window_days, issue_date - 1].
/// `archive` must be sorted by valid time.
std::vector<TrainingSample> select_window(std::span<const TrainingSample> archive,
                                          Date issue_date, const RollingWindowSpec& spec);

/// Aligned samples per (station, lead time); each sample carries every model's statistics.
using Archive = std::map<std::pair<StationId, int>, std::vector<TrainingSample>>;

struct KeyOutcome {
  CoefficientKey key;
  CoefficientRecord record;
  std::string error;  // optimizer or input failure, empty on success
};

struct IssueFitOptions {
  RollingWindowSpec window;
  FitOptions fit;
  /// Per-key upper bounds for mixed fits (transition 1 taper).
  std::map<CoefficientKey, CoefficientBounds> bounds;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Fits every key for one issue date and merges the results into `store`.
/// Single-model keys are fitted first so that mixed fits for the same station
/// and lead time can start from them. A key with too few window samples falls
/// back to recent stored coefficients, then to the identity mapping. Never
/// throws for a single key; failures are reported in the outcomes.
std::vector<KeyOutcome> fit_for_issue(const Archive& archive, Date issue_date,
                                      std::span<const CoefficientKey> keys,
                                      const IssueFitOptions& options, CoefficientStore& store);

/// Ensemble statistics of the forecasts issued on one date: (station, lead) -> model -> stats.
using IssueStats = std::map<std::pair<StationId, int>, std::map<ModelId, EnsembleStats>>;

struct IssuePredictions {
  std::map<CoefficientKey, GaussianPredictive> predictions;
  std::vector<std::pair<CoefficientKey, std::string>> errors;
};

/// Applies stored coefficients to the issue's ensemble statistics, key by key.
IssuePredictions predict_for_issue(const CoefficientStore& store, const IssueStats& stats,
                                   std::span<const CoefficientKey> keys,
                                   double min_sigma = kDefaultMinSigma);

}  // namespace emos
