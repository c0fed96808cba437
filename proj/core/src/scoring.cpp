#include "emos/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <tuple>

#include <boost/math/special_functions/gamma.hpp>

#include "emos/error.hpp"

namespace emos {

namespace {

constexpr double kInvSqrtPi = 0.56418958354775628694807945156077;  // 1/sqrt(pi)
constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidInput("predictive sigma must be positive and finite");
  }
}

}  // namespace

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

double gaussian_crps_with_gradient(double mu, double sigma, double y, CrpsGradient& grad) {
  const double z = (y - mu) / sigma;
  const double cdf = normal_cdf(z);
  const double pdf = normal_pdf(z);
  const double two_cdf_m1 = 2.0 * cdf - 1.0;
  // At fixed z the score is linear in sigma, so d/dsigma reduces to 2 pdf - 1/sqrt(pi).
  grad.d_mu = -two_cdf_m1;
  grad.d_sigma = 2.0 * pdf - kInvSqrtPi;
  return sigma * (z * two_cdf_m1 + 2.0 * pdf - kInvSqrtPi);
}

double gaussian_crps(const GaussianPredictive& pred, double y) {
  require_sigma(pred.sigma);
  CrpsGradient g;
  // The closed form can round to a tiny negative value near z = 0 and sigma -> 0.
  return std::max(0.0, gaussian_crps_with_gradient(pred.mu, pred.sigma, y, g));
}

CrpsGradient gaussian_crps_gradient(const GaussianPredictive& pred, double y) {
  require_sigma(pred.sigma);
  CrpsGradient g;
  gaussian_crps_with_gradient(pred.mu, pred.sigma, y, g);
  return g;
}

double ensemble_crps(std::span<const double> members, double y) {
  if (members.empty()) throw InvalidInput("ensemble_crps: empty member list");
  std::vector<double> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  double abs_err = 0.0;
  double pair_sum = 0.0;  // sum_{i<j} (x_j - x_i) over sorted members
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    abs_err += std::abs(sorted[i] - y);
    pair_sum += (2.0 * static_cast<double>(i) - m + 1.0) * sorted[i];
  }
  // sum_i sum_j |x_i - x_j| = 2 * pair_sum
  const double crps = abs_err / m - pair_sum / (m * m);
  return std::max(0.0, crps);
}

double crpss(double crps, double crps_ref) {
  if (!(crps_ref > 0.0)) throw InvalidInput("crpss: reference score must be positive");
  return 1.0 - crps / crps_ref;
}

double pit_value(const GaussianPredictive& pred, double y) {
  require_sigma(pred.sigma);
  return normal_cdf((y - pred.mu) / pred.sigma);
}

double ensemble_pit(std::span<const double> members, double y, double u) {
  if (members.empty()) throw InvalidInput("ensemble_pit: empty member list");
  std::size_t below = 0, equal = 0;
  for (double x : members) {
    if (x < y) ++below;
    else if (x == y) ++equal;
  }
  const double m = static_cast<double>(members.size());
  return (static_cast<double>(below) + u * static_cast<double>(equal + 1)) / (m + 1.0);
}

std::int64_t PitHistogram::total() const {
  std::int64_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

PitHistogram pit_histogram(std::span<const double> pits, int bin_count) {
  if (bin_count < 2) throw InvalidInput("pit_histogram: need at least two bins");
  PitHistogram h{bin_count, std::vector<std::int64_t>(static_cast<std::size_t>(bin_count), 0)};
  for (double p : pits) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("pit_histogram: PIT value outside [0, 1]");
    auto bin = static_cast<int>(p * bin_count);
    if (bin >= bin_count) bin = bin_count - 1;
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

ChiSquareResult chi_square_uniformity(const PitHistogram& hist) {
  const auto n = static_cast<double>(hist.total());
  if (n <= 0.0) throw InvalidInput("chi_square_uniformity: empty histogram");
  const double expected = n / hist.bin_count;
  double stat = 0.0;
  for (auto c : hist.counts) {
    const double diff = static_cast<double>(c) - expected;
    stat += diff * diff / expected;
  }
  const int dof = hist.bin_count - 1;
  return {stat, dof, boost::math::gamma_q(0.5 * dof, 0.5 * stat)};
}

void ScoreSeries::push_back(HourStamp valid, double crps, StationId station, int lead) {
  valid_times.push_back(valid);
  crps_values.push_back(crps);
  if (!station.empty()) station_ids.push_back(std::move(station));
  if (lead >= 0) lead_times.push_back(lead);
}

void ScoreSeries::validate() const {
  if (valid_times.size() != crps_values.size()) {
    throw InvalidInput("score series: valid_times and crps_values differ in length");
  }
  if (!station_ids.empty() && station_ids.size() != crps_values.size()) {
    throw InvalidInput("score series: station_ids length mismatch");
  }
  if (!lead_times.empty() && lead_times.size() != crps_values.size()) {
    throw InvalidInput("score series: lead_times length mismatch");
  }
  for (double v : crps_values) {
    if (!(v >= 0.0)) throw InvalidInput("score series: negative or NaN CRPS");
  }
}

double ScoreSeries::mean() const {
  if (crps_values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double v : crps_values) s += v;
  return s / static_cast<double>(crps_values.size());
}

std::string to_string(Conclusion c) {
  switch (c) {
    case Conclusion::first_better: return "first_better";
    case Conclusion::second_better: return "second_better";
    case Conclusion::not_significant: return "not_significant";
    case Conclusion::degenerate: return "degenerate";
  }
  return "unknown";
}

SignificanceResult diebold_mariano(const ScoreSeries& scores_a, const ScoreSeries& scores_b,
                                   double alpha) {
  const std::size_t n = scores_a.size();
  if (n != scores_b.size()) throw InvalidInput("diebold_mariano: series differ in length");
  if (n < 2) throw InvalidInput("diebold_mariano: need at least two cases");
  if (scores_a.valid_times != scores_b.valid_times) {
    throw InvalidInput("diebold_mariano: valid times do not match");
  }
  const auto nd = static_cast<double>(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += scores_a.crps_values[i] - scores_b.crps_values[i];
  mean /= nd;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = scores_a.crps_values[i] - scores_b.crps_values[i] - mean;
    ss += d * d;
  }
  const double var = ss / (nd - 1.0);

  SignificanceResult r;
  if (var == 0.0) {
    r.conclusion = Conclusion::degenerate;
    if (mean == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = std::copysign(std::numeric_limits<double>::infinity(), mean);
      r.p_value = 0.0;
    }
    return r;
  }
  r.statistic = mean / std::sqrt(var / nd);
  r.p_value = std::clamp(std::erfc(std::abs(r.statistic) / std::numbers::sqrt2), 0.0, 1.0);
  if (r.p_value < alpha) {
    r.conclusion = r.statistic > 0.0 ? Conclusion::second_better : Conclusion::first_better;
  } else {
    r.conclusion = Conclusion::not_significant;
  }
  return r;
}

std::string to_string(Stratum s) {
  switch (s) {
    case Stratum::overall: return "overall";
    case Stratum::season: return "season";
    case Stratum::day_night: return "day_night";
    case Stratum::lead_time: return "lead_time";
    case Stratum::station: return "station";
  }
  return "unknown";
}

std::string season_of(HourStamp valid_time) {
  switch (month_of(valid_time)) {
    case 12: case 1: case 2: return "DJF";
    case 3: case 4: case 5: return "MAM";
    case 6: case 7: case 8: return "JJA";
    default: return "SON";
  }
}

std::string day_night_of(HourStamp valid_time) {
  const int h = hour_of_day(valid_time);
  return (h >= 7 && h <= 18) ? "day" : "night";
}

std::vector<ReportRow> VerificationReport::rows_for(Stratum s) const {
  std::vector<ReportRow> out;
  for (const auto& r : rows) {
    if (r.stratification == s) out.push_back(r);
  }
  return out;
}

const ReportRow* VerificationReport::find(Stratum s, const std::string& stratum,
                                          const std::string& strategy) const {
  for (const auto& r : rows) {
    if (r.stratification == s && r.stratum == stratum && r.strategy == strategy) return &r;
  }
  return nullptr;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  std::size_t count = 0;
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

std::string stratum_label(Stratum s, const ScoreSeries& series, std::size_t i) {
  switch (s) {
    case Stratum::overall: return "all";
    case Stratum::season: return season_of(series.valid_times[i]);
    case Stratum::day_night: return day_night_of(series.valid_times[i]);
    case Stratum::lead_time: return std::to_string(series.lead_times[i]);
    case Stratum::station: return series.station_ids[i];
  }
  return {};
}

// Lead-time strata sort numerically rather than lexically.
bool stratum_less(Stratum s, const std::string& a, const std::string& b) {
  if (s == Stratum::lead_time) return std::stoi(a) < std::stoi(b);
  return a < b;
}

}  // namespace

VerificationReport stratified_report(const std::map<std::string, ScoreSeries>& scores,
                                     const StratificationSpec& spec) {
  const auto ref_it = scores.find(spec.reference);
  if (ref_it == scores.end()) {
    throw InvalidInput("stratified_report: unknown reference strategy '" + spec.reference + "'");
  }
  const ScoreSeries& ref = ref_it->second;
  ref.validate();
  for (const auto& [name, series] : scores) {
    series.validate();
    if (series.size() != ref.size() || series.valid_times != ref.valid_times ||
        series.station_ids != ref.station_ids || series.lead_times != ref.lead_times) {
      throw InvalidInput("stratified_report: series for '" + name +
                         "' is not aligned with the reference");
    }
  }
  const bool has_stations = !ref.station_ids.empty();

  std::vector<Stratum> strata{Stratum::overall};
  if (spec.season) strata.push_back(Stratum::season);
  if (spec.day_night) strata.push_back(Stratum::day_night);
  if (spec.lead_time && !ref.lead_times.empty()) strata.push_back(Stratum::lead_time);
  if (spec.station && has_stations) strata.push_back(Stratum::station);

  VerificationReport report;
  report.reference = spec.reference;
  for (Stratum s : strata) {
    std::vector<std::string> labels(ref.size());
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      labels[i] = stratum_label(s, ref, i);
      distinct.insert(labels[i]);
    }
    std::vector<std::string> ordered(distinct.begin(), distinct.end());
    std::sort(ordered.begin(), ordered.end(),
              [s](const std::string& a, const std::string& b) { return stratum_less(s, a, b); });

    // Reference per stratum and per (stratum, station).
    std::map<std::string, Accumulator> ref_total;
    std::map<std::pair<std::string, std::string>, Accumulator> ref_station;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      auto& acc = ref_total[labels[i]];
      acc.sum += ref.crps_values[i];
      ++acc.count;
      if (has_stations) {
        auto& st = ref_station[{labels[i], ref.station_ids[i]}];
        st.sum += ref.crps_values[i];
        ++st.count;
      }
    }

    for (const auto& label : ordered) {
      for (const auto& [name, series] : scores) {
        Accumulator total;
        std::map<std::string, Accumulator> per_station;
        for (std::size_t i = 0; i < series.size(); ++i) {
          if (labels[i] != label) continue;
          total.sum += series.crps_values[i];
          ++total.count;
          if (has_stations) {
            auto& st = per_station[series.station_ids[i]];
            st.sum += series.crps_values[i];
            ++st.count;
          }
        }
        ReportRow row;
        row.stratification = s;
        row.stratum = label;
        row.strategy = name;
        row.count = total.count;
        row.mean_crps = total.mean();
        const double ref_mean = ref_total[label].mean();
        row.crpss = ref_mean > 0.0 ? crpss(row.mean_crps, ref_mean)
                                   : std::numeric_limits<double>::quiet_NaN();
        if (has_stations) {
          std::size_t positive = 0;
          for (const auto& [station, acc] : per_station) {
            if (acc.mean() < ref_station[{label, station}].mean()) ++positive;
          }
          row.station_fraction_positive =
              per_station.empty() ? 0.0
                                  : static_cast<double>(positive) /
                                        static_cast<double>(per_station.size());
        } else {
          row.station_fraction_positive = std::numeric_limits<double>::quiet_NaN();
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

}  // namespace emos
