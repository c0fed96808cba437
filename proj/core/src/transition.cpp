#include "emos/transition.hpp"

#include <cmath>
#include <limits>

#include "emos/error.hpp"
#include "emos/scoring.hpp"

namespace emos {

std::string to_string(TransitionScheme s) {
  switch (s) {
    case TransitionScheme::none: return "none";
    case TransitionScheme::t1: return "t1";
    case TransitionScheme::t2: return "t2";
  }
  return "none";
}

TransitionScheme parse_scheme(const std::string& text) {
  if (text == "none") return TransitionScheme::none;
  if (text == "t1") return TransitionScheme::t1;
  if (text == "t2") return TransitionScheme::t2;
  throw InvalidInput("unknown transition scheme '" + text + "' (expected none, t1 or t2)");
}

void TransitionSpec::validate() const {
  if (weights.empty()) throw InvalidInput("transition: no taper weights");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0 && weights[i] < 1.0)) {
      throw InvalidInput("transition: weights must lie in (0, 1)");
    }
    if (i > 0 && !(weights[i] < weights[i - 1])) {
      throw InvalidInput("transition: weights must be strictly decreasing");
    }
  }
  if (horizon <= taper_length()) throw InvalidInput("transition: horizon too short for taper");
}

std::map<int, CoefficientBounds> transition1_bounds(const MixedEmosCoefficients& anchor,
                                                    const TransitionSpec& spec) {
  spec.validate();
  std::map<int, CoefficientBounds> out;
  for (int k = 1; k <= spec.taper_length(); ++k) {
    const double w = spec.weights[static_cast<std::size_t>(k - 1)];
    out[spec.anchor_lead() + k] = {anchor.b1 * w, anchor.d1 * w};
  }
  return out;
}

std::map<int, CoefficientBounds> transition1_bounds(
    const std::map<int, MixedEmosCoefficients>& by_lead, const TransitionSpec& spec) {
  const auto it = by_lead.find(spec.anchor_lead());
  if (it == by_lead.end()) {
    throw InvalidInput("transition 1: no mixed coefficients at anchor lead " +
                       std::to_string(spec.anchor_lead()) + " h");
  }
  return transition1_bounds(it->second, spec);
}

PredictiveSeries transition2_blend(const GaussianPredictive& mixed_at_horizon,
                                   const PredictiveSeries& single_series,
                                   const TransitionSpec& spec, double min_sigma) {
  spec.validate();
  for (int lead = spec.horizon; lead <= spec.horizon + spec.taper_length(); ++lead) {
    if (!single_series.count(lead)) {
      throw InvalidInput("transition 2: single-model series lacks lead " + std::to_string(lead) +
                         " h");
    }
  }
  const GaussianPredictive& at_horizon = single_series.at(spec.horizon);
  const double delta_mu = mixed_at_horizon.mu - at_horizon.mu;
  const double delta_sigma = mixed_at_horizon.sigma - at_horizon.sigma;

  PredictiveSeries out = single_series;
  for (int k = 1; k <= spec.taper_length(); ++k) {
    const double w = spec.weights[static_cast<std::size_t>(k - 1)];
    auto& p = out.at(spec.horizon + k);
    p.mu += w * delta_mu;
    p.sigma = std::max(p.sigma + w * delta_sigma, min_sigma);
  }
  return out;
}

PredictiveSeries seamless_series(const PredictiveSeries& mixed_series,
                                 const PredictiveSeries& single_series,
                                 const TransitionSpec& spec, double min_sigma) {
  spec.validate();
  PredictiveSeries tail = single_series;
  if (spec.scheme == TransitionScheme::t2) {
    const auto m = mixed_series.find(spec.horizon);
    if (m == mixed_series.end()) {
      throw InvalidInput("transition 2: mixed series lacks the horizon lead");
    }
    tail = transition2_blend(m->second, single_series, spec, min_sigma);
  }
  PredictiveSeries out;
  for (const auto& [lead, p] : mixed_series) {
    if (lead <= spec.horizon) out.emplace(lead, p);
  }
  for (const auto& [lead, p] : tail) {
    if (lead > spec.horizon) out.emplace(lead, p);
  }
  return out;
}

const SeamRow& SeamDiagnostics::at(int lead_time) const {
  for (const auto& r : rows) {
    if (r.lead_time == lead_time) return r;
  }
  throw InvalidInput("seam diagnostics: no row for lead " + std::to_string(lead_time));
}

SeamDiagnostics seam_diagnostics(const std::vector<SeamCase>& cases, int first_lead,
                                 int last_lead) {
  if (first_lead > last_lead) throw InvalidInput("seam diagnostics: empty lead window");
  for (const auto& c : cases) {
    for (int lead = first_lead - 1; lead <= last_lead; ++lead) {
      if (!c.series.count(lead)) {
        throw InvalidInput("seam diagnostics: series has a gap at lead " + std::to_string(lead));
      }
    }
  }
  SeamDiagnostics out;
  for (int lead = first_lead; lead <= last_lead; ++lead) {
    SeamRow row;
    row.lead_time = lead;
    double crps_sum = 0.0;
    for (const auto& c : cases) {
      const auto& now = c.series.at(lead);
      const auto& before = c.series.at(lead - 1);
      row.mean_abs_mu_step += std::abs(now.mu - before.mu);
      row.mean_abs_sigma_step += std::abs(now.sigma - before.sigma);
      ++row.cases;
      if (const auto y = c.observations.find(lead); y != c.observations.end()) {
        crps_sum += gaussian_crps(now, y->second);
        ++row.scored_cases;
      }
    }
    if (row.cases) {
      row.mean_abs_mu_step /= static_cast<double>(row.cases);
      row.mean_abs_sigma_step /= static_cast<double>(row.cases);
    }
    row.mean_crps = row.scored_cases ? crps_sum / static_cast<double>(row.scored_cases)
                                     : std::numeric_limits<double>::quiet_NaN();
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace emos
