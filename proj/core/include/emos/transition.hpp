#pragma once

// Seamless hand-over from the two-model combination to the longer-range single
// model at the shorter model's horizon.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emos/domain.hpp"
#include "emos/emos.hpp"

namespace emos {

enum class TransitionScheme {
  none,  // hard switch at the horizon
  t1,    // taper the first model's coefficients over the last hours before the horizon
  t2,    // carry the mixed-minus-single offset into the hours after the horizon
};

std::string to_string(TransitionScheme s);
/// "none", "t1" or "t2"; throws InvalidInput otherwise.
TransitionScheme parse_scheme(const std::string& text);

struct TransitionSpec {
  int horizon = 120;
  TransitionScheme scheme = TransitionScheme::none;
  std::vector<double> weights{0.75, 0.5, 0.25};

  /// Weights strictly decreasing within (0, 1); horizon > number of weights.
  void validate() const;
  int taper_length() const { return static_cast<int>(weights.size()); }
  /// Lead whose coefficients anchor the transition-1 bounds (horizon - 3 by default).
  int anchor_lead() const { return horizon - taper_length(); }
};

/// Lead time -> predictive distribution for one forecast case.
using PredictiveSeries = std::map<int, GaussianPredictive>;

/// Upper bounds b1(t) = b1(anchor) w(t), d1(t) = d1(anchor) w(t) for the taper
/// leads anchor+1 .. horizon.
std::map<int, CoefficientBounds> transition1_bounds(const MixedEmosCoefficients& anchor,
                                                    const TransitionSpec& spec);

/// Same, looking the anchor up by lead time; throws InvalidInput when missing.
std::map<int, CoefficientBounds> transition1_bounds(
    const std::map<int, MixedEmosCoefficients>& by_lead, const TransitionSpec& spec);

/// Adds w_k times the mixed-minus-single difference at the horizon to the single
/// series at horizon + k. Other leads are returned unchanged. Throws InvalidInput
/// when the single series lacks any lead in [horizon, horizon + taper].
PredictiveSeries transition2_blend(const GaussianPredictive& mixed_at_horizon,
                                   const PredictiveSeries& single_series,
                                   const TransitionSpec& spec,
                                   double min_sigma = kDefaultMinSigma);

/// Mixed predictions up to the horizon followed by single-model predictions,
/// blended according to spec.scheme. Under t1 the mixed series is expected to
/// already hold the tapered refits at the taper leads.
PredictiveSeries seamless_series(const PredictiveSeries& mixed_series,
                                 const PredictiveSeries& single_series,
                                 const TransitionSpec& spec,
                                 double min_sigma = kDefaultMinSigma);

struct SeamCase {
  PredictiveSeries series;
  std::map<int, double> observations;  // by lead time; absent leads are not scored
};

struct SeamRow {
  int lead_time = 0;
  double mean_abs_mu_step = 0.0;     // mean |mu(t) - mu(t-1)|
  double mean_abs_sigma_step = 0.0;  // mean |sigma(t) - sigma(t-1)|
  double mean_crps = 0.0;            // NaN when no observation was available
  std::size_t cases = 0;
  std::size_t scored_cases = 0;
};

struct SeamDiagnostics {
  std::vector<SeamRow> rows;

  const SeamRow& at(int lead_time) const;
};

/// Step sizes and CRPS per lead time in [first_lead, last_lead]. Every case must
/// cover first_lead - 1 .. last_lead without gaps.
SeamDiagnostics seam_diagnostics(const std::vector<SeamCase>& cases, int first_lead = 116,
                                 int last_lead = 126);

}  // namespace emos
