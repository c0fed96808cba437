#pragma once

// Proper scores, skill scores, reliability diagnostics and significance tests.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "emos/domain.hpp"

namespace emos {

/// Standard normal density.
double normal_pdf(double z);
/// Standard normal distribution function.
double normal_cdf(double z);

/// Closed-form CRPS of N(mu, sigma^2) against `y`. Throws InvalidInput if sigma <= 0.
double gaussian_crps(const GaussianPredictive& pred, double y);

struct CrpsGradient {
  double d_mu = 0.0;
  double d_sigma = 0.0;
};

/// Analytic partial derivatives of gaussian_crps in mu and sigma.
CrpsGradient gaussian_crps_gradient(const GaussianPredictive& pred, double y);

/// Score and gradient in one pass; no argument checks. Used by the optimizer.
double gaussian_crps_with_gradient(double mu, double sigma, double y, CrpsGradient& grad);

/// Empirical-CDF CRPS of a raw ensemble: mean |x_i - y| - 1/(2 m^2) sum |x_i - x_j|.
double ensemble_crps(std::span<const double> members, double y);

/// 1 - crps / crps_ref. Throws InvalidInput if crps_ref <= 0.
double crpss(double crps, double crps_ref);

/// Phi((y - mu) / sigma).
double pit_value(const GaussianPredictive& pred, double y);

/// Randomized rank PIT of a raw ensemble; `u` is a uniform(0,1) draw that breaks
/// ties and spreads the discrete rank over its bin.
double ensemble_pit(std::span<const double> members, double y, double u);

struct PitHistogram {
  int bin_count = 0;
  std::vector<std::int64_t> counts;

  std::int64_t total() const;
};

/// Equal-width bins on [0, 1]; 1.0 falls in the last bin.
PitHistogram pit_histogram(std::span<const double> pits, int bin_count);

struct ChiSquareResult {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
};

/// Pearson chi-square test of the histogram against a uniform distribution.
ChiSquareResult chi_square_uniformity(const PitHistogram& hist);

/// One score per verification case. `station_ids` and `lead_times` may be left
/// empty when the series is not stratified by them.
struct ScoreSeries {
  std::vector<HourStamp> valid_times;
  std::vector<double> crps_values;
  std::vector<StationId> station_ids;
  std::vector<int> lead_times;

  std::size_t size() const noexcept { return crps_values.size(); }
  void push_back(HourStamp valid, double crps, StationId station = {}, int lead = -1);
  void validate() const;
  double mean() const;
};

enum class Conclusion { first_better, second_better, not_significant, degenerate };
std::string to_string(Conclusion c);

struct SignificanceResult {
  double statistic = 0.0;
  double p_value = 1.0;
  Conclusion conclusion = Conclusion::not_significant;
};

/// Diebold-Mariano test on d_t = a_t - b_t with the lag-0 sample variance and a
/// two-sided normal p-value. A positive statistic means `scores_a` scored worse.
SignificanceResult diebold_mariano(const ScoreSeries& scores_a, const ScoreSeries& scores_b,
                                   double alpha = 0.05);

enum class Stratum { overall, season, day_night, lead_time, station };
std::string to_string(Stratum s);

struct StratificationSpec {
  bool season = true;
  bool day_night = true;
  bool lead_time = true;
  bool station = true;
  std::string reference;  // strategy the skill scores are computed against
};

/// "DJF", "MAM", "JJA" or "SON".
std::string season_of(HourStamp valid_time);
/// "day" for 07-18 UTC, "night" for 19-06 UTC.
std::string day_night_of(HourStamp valid_time);

struct ReportRow {
  Stratum stratification = Stratum::overall;
  std::string stratum;
  std::string strategy;
  std::size_t count = 0;
  double mean_crps = 0.0;
  double crpss = 0.0;  // skill of the stratum-mean CRPS against the reference
  /// Share of stations whose stratum-mean CRPSS is positive; NaN when the
  /// series carries no station ids.
  double station_fraction_positive = 0.0;
};

struct VerificationReport {
  std::string reference;
  std::vector<ReportRow> rows;

  std::vector<ReportRow> rows_for(Stratum s) const;
  const ReportRow* find(Stratum s, const std::string& stratum, const std::string& strategy) const;
};

/// Mean CRPS per (strategy, stratum) and CRPSS against spec.reference. All
/// series must be aligned case by case. Throws InvalidInput on an unknown
/// reference or misaligned series.
VerificationReport stratified_report(const std::map<std::string, ScoreSeries>& scores,
                                     const StratificationSpec& spec);

}  // namespace emos
