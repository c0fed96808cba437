#include "emos/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

#include "emos/csv.hpp"
#include "emos/error.hpp"
#include "emos/parallel.hpp"
#include "emos/synth.hpp"

namespace emos::pipeline {

namespace {

namespace fs = std::filesystem;
using csv::format_real;

// Seam diagnostics cover horizon - kSeamBefore .. horizon + kSeamAfter.
constexpr int kSeamBefore = 4;
constexpr int kSeamAfter = 6;

constexpr const char* kRawPrefix = "raw:";
constexpr const char* kSeamlessPrefix = "seamless-";

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

HourStamp midnight(Date d) { return std::chrono::time_point_cast<std::chrono::hours>(
    std::chrono::sys_days{d}); }

std::ofstream create(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  return out;
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw InvalidInput("missing " + what + " file " + path);
}

// Lead sets per model, computed once per station.
struct LeadSets {
  std::map<ModelId, std::set<int>> per_model;
  std::set<int> all;

  bool has(const ModelId& m, int lead) const {
    const auto it = per_model.find(m);
    return it != per_model.end() && it->second.count(lead);
  }
};

LeadSets lead_sets(const StationData& data) {
  LeadSets out;
  for (const auto& [m, fcs] : data.forecasts) {
    auto& s = out.per_model[m];
    for (const auto& f : fcs) s.insert(f.lead_time);
    out.all.insert(s.begin(), s.end());
  }
  return out;
}

std::vector<CoefficientKey> issue_keys(const StationData& data, const LeadSets& leads,
                                       const std::vector<Strategy>& strategies, Date issue,
                                       const TransitionSpec& transition) {
  std::vector<CoefficientKey> keys;
  for (int lead : leads.all) {
    for (const auto& s : strategies) {
      bool ok = leads.has(s.first, lead) && (!s.is_mixed() || leads.has(s.second, lead));
      if (ok && s.kind == Strategy::Kind::mixed_tapered) {
        const int anchor = transition.anchor_lead();
        ok = lead > anchor && lead <= transition.horizon && leads.has(s.first, anchor) &&
             leads.has(s.second, anchor);
      }
      if (ok) keys.push_back({data.station.station_id, lead, s, issue});
    }
  }
  return keys;
}

MixedEmosCoefficients clamp(MixedEmosCoefficients c, const CoefficientBounds& b) {
  if (b.b1_max) c.b1 = std::min(c.b1, *b.b1_max);
  if (b.d1_max) c.d1 = std::min(c.d1, *b.d1_max);
  return c;
}

using CaseKey = std::tuple<StationId, HourStamp, int>;

// Uniform draw in [0, 1) from the top 53 bits.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::set<int> StationData::leads(const ModelId& model) const {
  std::set<int> out;
  if (const auto it = forecasts.find(model); it != forecasts.end()) {
    for (const auto& f : it->second) out.insert(f.lead_time);
  }
  return out;
}

std::vector<Date> StationData::issue_dates() const {
  std::set<Date> dates;
  for (const auto& [m, fcs] : forecasts) {
    for (const auto& f : fcs) dates.insert(date_of(f.init_time));
  }
  return {dates.begin(), dates.end()};
}

StationData prepare_station(const StationMetadata& station, ObservationSeries observations,
                            const std::map<ModelId, std::vector<EnsembleForecast>>& raw,
                            const RunConfig& config) {
  StationData out{station, std::move(observations), {}};
  const std::set<int> wanted(config.leads.begin(), config.leads.end());
  for (const auto& model : config.model_list()) {
    const auto it = raw.find(model);
    if (it == raw.end() || it->second.empty()) continue;
    const auto grid = station.grid_elevation.find(model);
    if (grid == station.grid_elevation.end()) {
      throw InvalidInput("station " + station.station_id + " has no grid elevation for model " +
                         model);
    }
    std::vector<EnsembleForecast> corrected = it->second;
    for (auto& f : corrected) {
      if (f.station_id != station.station_id) {
        throw InvalidInput("forecast of station " + f.station_id + " passed for " +
                           station.station_id);
      }
      f.validate();
      f.members = lapse_correct(f.members, grid->second, station.elevation, config.lapse_rate);
    }
    auto hourly = interpolate_leads(corrected, config.interpolation_max_gap);
    if (!wanted.empty()) {
      std::erase_if(hourly, [&](const EnsembleForecast& f) { return !wanted.count(f.lead_time); });
    }
    std::sort(hourly.begin(), hourly.end(), [](const auto& a, const auto& b) {
      return std::tie(a.init_time, a.lead_time) < std::tie(b.init_time, b.lead_time);
    });
    std::map<Date, HourStamp> inits;
    for (const auto& f : hourly) {
      const auto [pos, inserted] = inits.emplace(date_of(f.init_time), f.init_time);
      if (!inserted && pos->second != f.init_time) {
        throw InvalidInput("model " + model + " has two runs on " + format_date(pos->first) +
                           " for station " + station.station_id);
      }
    }
    out.forecasts.emplace(model, std::move(hourly));
  }
  return out;
}

Archive build_archive(const StationData& data, const std::vector<ModelId>& models) {
  std::map<int, std::vector<EnsembleForecast>> by_lead;
  for (const auto& m : models) {
    const auto it = data.forecasts.find(m);
    if (it == data.forecasts.end()) continue;
    for (const auto& f : it->second) by_lead[f.lead_time].push_back(f);
  }
  Archive archive;
  for (const auto& [lead, fcs] : by_lead) {
    std::vector<ModelId> present;
    for (const auto& m : models) {
      if (std::any_of(fcs.begin(), fcs.end(), [&](const auto& f) { return f.model_id == m; })) {
        present.push_back(m);
      }
    }
    archive[{data.station.station_id, lead}] =
        align(fcs, data.observations, lead, present).samples;
  }
  return archive;
}

std::vector<CoefficientKey> keys_for_issue(const StationData& data, Date issue_date,
                                           const RunConfig& config) {
  return issue_keys(data, lead_sets(data), config.strategy_list(), issue_date,
                    config.transition);
}

StationTraining train_station(const StationData& data, const RunConfig& config) {
  StationTraining out;
  const auto archive = build_archive(data, config.model_list());
  const auto leads = lead_sets(data);
  const auto strategies = config.strategy_list();
  IssueFitOptions options{config.window, config.fit, {}, 1};

  auto tally = [&](const std::vector<KeyOutcome>& outcomes) {
    for (const auto& o : outcomes) {
      (o.record.fallback ? out.fallbacks : out.fresh_fits) += 1;
      if (!o.record.converged || !o.error.empty()) out.problems.push_back(o);
    }
  };

  for (const Date issue : data.issue_dates()) {
    const auto keys = issue_keys(data, leads, strategies, issue, config.transition);
    std::vector<CoefficientKey> main, tapered;
    for (const auto& k : keys) {
      (k.strategy.kind == Strategy::Kind::mixed_tapered ? tapered : main).push_back(k);
    }
    tally(fit_for_issue(archive, issue, main, options, out.store));
    if (tapered.empty()) continue;

    IssueFitOptions taper_options = options;
    for (const auto& k : tapered) {
      const CoefficientKey anchor{k.station_id, config.transition.anchor_lead(),
                                  Strategy::mixed(k.strategy.first, k.strategy.second), issue};
      const auto* rec = out.store.find(anchor);
      if (!rec) {
        throw InvalidInput("tapered strategy " + k.strategy.to_string() +
                           " needs its mixed strategy at lead " +
                           std::to_string(anchor.lead_time));
      }
      const auto bounds = transition1_bounds(std::get<MixedEmosCoefficients>(rec->coefficients),
                                             config.transition);
      taper_options.bounds[k] = bounds.at(k.lead_time);
    }
    auto outcomes = fit_for_issue(archive, issue, tapered, taper_options, out.store);
    // Reused or identity coefficients must respect this issue's bounds as well.
    for (auto& o : outcomes) {
      if (!o.record.fallback) continue;
      o.record.coefficients = clamp(std::get<MixedEmosCoefficients>(o.record.coefficients),
                                    taper_options.bounds.at(o.key));
      out.store.put(o.key, o.record);
    }
    tally(outcomes);
  }
  return out;
}

std::vector<io::PredictionRow> predict_station(const StationData& data,
                                               const CoefficientStore& store,
                                               const RunConfig& config) {
  struct Issue {
    HourStamp init;
    IssueStats stats;
  };
  std::map<Date, Issue> issues;
  for (const auto& [model, fcs] : data.forecasts) {
    for (const auto& f : fcs) {
      const Date d = date_of(f.init_time);
      auto [it, inserted] = issues.try_emplace(d, Issue{f.init_time, {}});
      if (it->second.init != f.init_time) {
        throw InvalidInput("models disagree on the init time of " + format_date(d) +
                           " for station " + data.station.station_id);
      }
      it->second.stats[{f.station_id, f.lead_time}][model] = ensemble_stats(f);
    }
  }

  const auto leads = lead_sets(data);
  const auto strategies = config.strategy_list();
  std::vector<io::PredictionRow> rows;
  for (const auto& [date, issue] : issues) {
    auto keys = issue_keys(data, leads, strategies, date, config.transition);
    std::erase_if(keys, [&](const CoefficientKey& k) {
      const auto st = issue.stats.find({k.station_id, k.lead_time});
      if (st == issue.stats.end() || !st->second.count(k.strategy.first)) return true;
      return k.strategy.is_mixed() && !st->second.count(k.strategy.second);
    });
    const auto result = predict_for_issue(store, issue.stats, keys, config.fit.min_sigma);
    if (!result.errors.empty()) throw InvalidInput(result.errors.front().second);
    for (const auto& [key, pred] : result.predictions) {
      rows.push_back({key.station_id, issue.init, key.lead_time, key.strategy.to_string(), pred});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.init_time, a.lead_time, a.strategy) <
           std::tie(b.init_time, b.lead_time, b.strategy);
  });
  return rows;
}

std::string seamless_name(const Strategy& mixed, TransitionScheme scheme) {
  return kSeamlessPrefix + to_string(scheme) + ":" + mixed.first + ":" + mixed.second;
}

std::vector<io::PredictionRow> seamless_predictions(const std::vector<io::PredictionRow>& rows,
                                                    const RunConfig& config,
                                                    TransitionScheme scheme) {
  TransitionSpec spec = config.transition;
  spec.scheme = scheme;
  spec.validate();

  using SeriesKey = std::pair<StationId, HourStamp>;
  std::map<std::string, std::map<SeriesKey, PredictiveSeries>> index;
  for (const auto& r : rows) {
    index[r.strategy][{r.station_id, r.init_time}][r.lead_time] = r.prediction;
  }
  auto series_of = [&](const std::string& strategy) -> const std::map<SeriesKey, PredictiveSeries>* {
    const auto it = index.find(strategy);
    return it == index.end() ? nullptr : &it->second;
  };

  std::vector<io::PredictionRow> out;
  for (const auto& s : config.strategy_list()) {
    if (s.kind != Strategy::Kind::mixed) continue;
    const auto* mixed = series_of(s.to_string());
    const auto* single = series_of(Strategy::single(s.second).to_string());
    if (!mixed || !single) continue;
    const auto* tapered = series_of(Strategy::mixed_tapered(s.first, s.second).to_string());
    const std::string name = seamless_name(s, scheme);

    for (const auto& [key, mixed_series] : *mixed) {
      const auto single_it = single->find(key);
      if (single_it == single->end()) continue;
      PredictiveSeries blended = mixed_series;
      if (scheme == TransitionScheme::t1) {
        const PredictiveSeries* taper = nullptr;
        if (tapered) {
          if (const auto t = tapered->find(key); t != tapered->end()) taper = &t->second;
        }
        for (int lead = spec.anchor_lead() + 1; lead <= spec.horizon; ++lead) {
          if (!blended.count(lead)) continue;
          if (!taper || !taper->count(lead)) {
            throw InvalidInput("transition t1: no tapered predictions for station " + key.first +
                               " init " + format_time(key.second) + " lead " +
                               std::to_string(lead));
          }
          blended[lead] = taper->at(lead);
        }
      }
      for (const auto& [lead, p] :
           seamless_series(blended, single_it->second, spec, config.fit.min_sigma)) {
        out.push_back({key.first, key.second, lead, name, p});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.station_id, a.init_time, a.lead_time, a.strategy) <
           std::tie(b.station_id, b.init_time, b.lead_time, b.strategy);
  });
  return out;
}

VerifyResult verify(const std::vector<StationData>& stations,
                    const std::vector<io::PredictionRow>& predictions,
                    const CoefficientStore& store, const RunConfig& config) {
  const auto models = config.model_list();
  const std::string reference = config.reference_strategy();

  // Strategies compared case by case: raw ensembles, then configured
  // strategies, then anything else found in the predictions.
  std::set<std::string> present;
  for (const auto& r : predictions) {
    if (!starts_with(r.strategy, kSeamlessPrefix) && !starts_with(r.strategy, "mixed-t1:")) {
      present.insert(r.strategy);
    }
  }
  std::vector<std::string> compared;
  for (const auto& m : models) compared.push_back(kRawPrefix + m);
  for (const auto& s : config.strategy_list()) {
    if (present.erase(s.to_string())) compared.push_back(s.to_string());
  }
  compared.insert(compared.end(), present.begin(), present.end());
  if (std::find(compared.begin(), compared.end(), reference) == compared.end()) {
    throw InvalidInput("reference strategy " + reference + " has no scores");
  }

  std::map<StationId, const StationData*> by_station;
  Date first_issue = Date::max();
  for (const auto& s : stations) {
    by_station[s.station.station_id] = &s;
    const auto dates = s.issue_dates();
    if (!dates.empty()) first_issue = std::min(first_issue, dates.front());
  }
  const Date cutoff = first_issue + std::chrono::days{config.burn_in()};

  // Predictions per case, indexed by position in `compared`.
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < compared.size(); ++i) column[compared[i]] = i;
  std::map<CaseKey, std::vector<const GaussianPredictive*>> cases;
  for (const auto& r : predictions) {
    const auto col = column.find(r.strategy);
    if (col == column.end()) continue;
    auto& slot = cases[{r.station_id, r.init_time, r.lead_time}];
    if (slot.empty()) slot.assign(compared.size(), nullptr);
    slot[col->second] = &r.prediction;
  }

  // Raw members per (station, init, lead, model).
  std::map<std::pair<StationId, ModelId>, std::map<std::pair<HourStamp, int>, const EnsembleForecast*>>
      raw;
  for (const auto& s : stations) {
    for (const auto& [m, fcs] : s.forecasts) {
      auto& idx = raw[{s.station.station_id, m}];
      for (const auto& f : fcs) idx[{f.init_time, f.lead_time}] = &f;
    }
  }
  auto raw_members = [&](const StationId& st, const ModelId& m, HourStamp init,
                         int lead) -> const EnsembleForecast* {
    const auto it = raw.find({st, m});
    if (it == raw.end()) return nullptr;
    const auto f = it->second.find({init, lead});
    return f == it->second.end() ? nullptr : f->second;
  };

  std::vector<std::mt19937_64> rngs;
  for (std::size_t i = 0; i < models.size(); ++i) {
    std::seed_seq seq{static_cast<std::uint64_t>(config.seed()), static_cast<std::uint64_t>(300 + i)};
    rngs.emplace_back(seq);
  }

  std::map<std::string, ScoreSeries> scores;
  std::vector<std::vector<double>> pits(compared.size());
  std::vector<const EnsembleForecast*> ens(models.size());
  VerifyResult out;
  for (const auto& [key, preds] : cases) {
    const auto& [station, init, lead] = key;
    if (date_of(init) < cutoff) continue;
    const auto sd = by_station.find(station);
    if (sd == by_station.end()) continue;
    const HourStamp valid = init + std::chrono::hours{lead};
    const auto y = sd->second->observations.at(valid);
    if (!y) continue;
    bool complete = true;
    for (std::size_t m = 0; m < models.size() && complete; ++m) {
      ens[m] = raw_members(station, models[m], init, lead);
      complete = ens[m] != nullptr;
    }
    for (std::size_t i = models.size(); i < compared.size() && complete; ++i) {
      complete = preds[i] != nullptr;
    }
    if (!complete) continue;

    ++out.cases;
    for (std::size_t m = 0; m < models.size(); ++m) {
      scores[compared[m]].push_back(valid, ensemble_crps(ens[m]->members, *y), station, lead);
      pits[m].push_back(ensemble_pit(ens[m]->members, *y, unit_draw(rngs[m])));
    }
    for (std::size_t i = models.size(); i < compared.size(); ++i) {
      scores[compared[i]].push_back(valid, gaussian_crps(*preds[i], *y), station, lead);
      pits[i].push_back(pit_value(*preds[i], *y));
    }
  }
  if (out.cases == 0) throw InvalidInput("verify: no case has every strategy and an observation");

  StratificationSpec strata = config.strata;
  strata.reference = reference;
  out.report = stratified_report(scores, strata);

  for (std::size_t i = 0; i < compared.size(); ++i) {
    PitSummary p;
    p.histogram = pit_histogram(pits[i], config.pit_bins);
    p.uniformity = chi_square_uniformity(p.histogram);
    out.pit.emplace(compared[i], std::move(p));
  }
  for (const auto& a : compared) {
    for (const auto& b : compared) {
      if (a != b) out.dm.push_back({a, b, diebold_mariano(scores[a], scores[b], config.alpha)});
    }
  }

  for (const auto& [key, rec] : store.records()) {
    if (key.strategy.kind != Strategy::Kind::mixed || rec.fallback) continue;
    if (!by_station.count(key.station_id)) continue;
    out.weights.push_back({key.station_id, midnight(key.issue_date), key.lead_time,
                           model_weights(std::get<MixedEmosCoefficients>(rec.coefficients))});
  }

  // Seam diagnostics for the continuation model and every seamless series.
  const int first = config.transition.horizon - kSeamBefore;
  const int last = config.transition.horizon + kSeamAfter;
  std::set<std::string> seam_strategies;
  for (const auto& s : config.strategy_list()) {
    if (s.kind == Strategy::Kind::mixed) seam_strategies.insert(Strategy::single(s.second).to_string());
  }
  for (const auto& r : predictions) {
    if (starts_with(r.strategy, kSeamlessPrefix)) seam_strategies.insert(r.strategy);
  }
  std::map<std::string, std::map<std::pair<StationId, HourStamp>, PredictiveSeries>> series;
  for (const auto& r : predictions) {
    if (!seam_strategies.count(r.strategy) || date_of(r.init_time) < cutoff) continue;
    if (r.lead_time < first - 1 || r.lead_time > last) continue;
    series[r.strategy][{r.station_id, r.init_time}][r.lead_time] = r.prediction;
  }
  for (const auto& [strategy, per_case] : series) {
    std::vector<SeamCase> seam_cases;
    for (const auto& [key, s] : per_case) {
      const auto sd = by_station.find(key.first);
      if (sd == by_station.end() || static_cast<int>(s.size()) != last - first + 2) continue;
      SeamCase c{s, {}};
      for (int lead = first; lead <= last; ++lead) {
        if (const auto y = sd->second->observations.at(key.second + std::chrono::hours{lead})) {
          c.observations[lead] = *y;
        }
      }
      seam_cases.push_back(std::move(c));
    }
    if (!seam_cases.empty()) out.seams.emplace(strategy, seam_diagnostics(seam_cases, first, last));
  }
  return out;
}

void write_report(const VerifyResult& result, const StratificationSpec& strata,
                  const std::string& dir) {
  fs::create_directories(dir);
  std::vector<Stratum> kinds{Stratum::overall};
  if (strata.season) kinds.push_back(Stratum::season);
  if (strata.day_night) kinds.push_back(Stratum::day_night);
  if (strata.lead_time) kinds.push_back(Stratum::lead_time);
  if (strata.station) kinds.push_back(Stratum::station);
  for (const auto kind : kinds) {
    auto out = create((fs::path(dir) / ("crps_" + to_string(kind) + ".csv")).string());
    out << "stratum,strategy,count,mean_crps,crpss,station_fraction_positive\n";
    for (const auto& r : result.report.rows_for(kind)) {
      out << r.stratum << ',' << r.strategy << ',' << r.count << ',' << format_real(r.mean_crps)
          << ',' << format_real(r.crpss) << ',' << format_real(r.station_fraction_positive)
          << '\n';
    }
  }
  {
    auto out = create((fs::path(dir) / "pit_hist.csv").string());
    out << "bin_lo,bin_hi,count,strategy\n";
    for (const auto& [strategy, p] : result.pit) {
      const int bins = p.histogram.bin_count;
      for (int b = 0; b < bins; ++b) {
        out << format_real(static_cast<double>(b) / bins) << ','
            << format_real(static_cast<double>(b + 1) / bins) << ','
            << p.histogram.counts[static_cast<std::size_t>(b)] << ',' << strategy << '\n';
      }
    }
  }
  {
    auto out = create((fs::path(dir) / "pit_uniformity.csv").string());
    out << "strategy,count,chi_square,dof,p_value\n";
    for (const auto& [strategy, p] : result.pit) {
      out << strategy << ',' << p.histogram.total() << ',' << format_real(p.uniformity.statistic)
          << ',' << p.uniformity.degrees_of_freedom << ',' << format_real(p.uniformity.p_value) << '\n';
    }
  }
  {
    auto out = create((fs::path(dir) / "dm_matrix.csv").string());
    out << "strategy_a,strategy_b,statistic,p_value,conclusion\n";
    for (const auto& e : result.dm) {
      out << e.first << ',' << e.second << ',' << format_real(e.result.statistic) << ','
          << format_real(e.result.p_value) << ',' << to_string(e.result.conclusion) << '\n';
    }
  }
  {
    auto out = create((fs::path(dir) / "weights.csv").string());
    out << "station_id,init_time,lead_h,weight_mean,weight_std\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& w : result.weights) {
      out << w.station_id << ',' << format_time(w.init_time) << ',' << w.lead_time << ','
          << format_real(w.weights.defined_mean ? w.weights.weight_mean : nan) << ','
          << format_real(w.weights.defined_std ? w.weights.weight_std : nan) << '\n';
    }
  }
  {
    auto out = create((fs::path(dir) / "seam.csv").string());
    out << "strategy,lead_h,mean_abs_mu_step,mean_abs_sigma_step,mean_crps,cases\n";
    for (const auto& [strategy, diag] : result.seams) {
      for (const auto& r : diag.rows) {
        out << strategy << ',' << r.lead_time << ',' << format_real(r.mean_abs_mu_step) << ','
            << format_real(r.mean_abs_sigma_step) << ',' << format_real(r.mean_crps) << ','
            << r.cases << '\n';
      }
    }
  }
}

ElevationGrid synthetic_topography(const ScenarioSpec& spec) {
  // Covers the station area with 0.02 degree cells.
  constexpr double kCell = 0.02;
  constexpr int kCols = 250;
  constexpr int kRows = 115;
  constexpr double kX0 = 5.8;
  constexpr double kY0 = 45.7;
  std::seed_seq seq{static_cast<std::uint64_t>(spec.seed), std::uint64_t{400}};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> wave(4.0, 20.0);
  struct Ridge {
    double kx, ky, phase, amplitude;
  };
  std::vector<Ridge> ridges;
  for (int k = 0; k < 6; ++k) {
    ridges.push_back({wave(rng), wave(rng), phase(rng), 500.0 / (k + 1)});
  }
  std::vector<double> values(static_cast<std::size_t>(kRows) * kCols);
  for (int r = 0; r < kRows; ++r) {
    const double y = kY0 + (kRows - r - 0.5) * kCell;
    for (int c = 0; c < kCols; ++c) {
      const double x = kX0 + (c + 0.5) * kCell;
      double z = 0.5 * (spec.station_elevation_min + spec.station_elevation_max);
      for (const auto& rd : ridges) {
        z += rd.amplitude * std::sin(rd.kx * x + rd.phase) * std::cos(rd.ky * y - rd.phase);
      }
      values[static_cast<std::size_t>(r) * kCols + c] = std::round(std::max(z, 0.0) * 10.0) / 10.0;
    }
  }
  return ElevationGrid(kRows, kCols, kCell, kX0, kY0, std::move(values), -9999.0);
}

void simulate(const RunConfig& config) {
  const ScenarioSpec& spec = config.scenario;
  spec.validate();
  std::vector<StationScenario> generated(static_cast<std::size_t>(spec.n_stations));
  parallel_for(generated.size(),
               [&](std::size_t i) { generated[i] = generate_station(spec, static_cast<int>(i)); },
               config.threads);

  std::vector<StationMetadata> stations;
  std::vector<ObservationSeries> observations;
  for (const auto& g : generated) {
    stations.push_back(g.station);
    observations.push_back(g.observations);
  }
  std::vector<ModelId> ids;
  for (const auto& m : spec.models) ids.push_back(m.id);
  {
    auto out = create(config.stations_file());
    io::write_stations(out, stations, ids);
  }
  {
    auto out = create(config.observations_file());
    io::write_observations(out, observations);
  }
  for (std::size_t m = 0; m < spec.models.size(); ++m) {
    auto out = create(config.forecasts_file(spec.models[m].id));
    out << io::kForecastsHeader << '\n';
    for (const auto& g : generated) {
      std::ostringstream part;
      io::write_forecasts(part, g.forecasts[m]);
      const std::string text = part.str();
      out << text.substr(text.find('\n') + 1);
    }
  }
  {
    auto out = create(config.topography_file());
    write_esri_ascii(out, synthetic_topography(spec));
  }
}

bool TrainSummary::converged() const {
  return std::all_of(problems.begin(), problems.end(),
                     [](const KeyOutcome& o) { return o.record.converged; });
}

std::vector<StationData> load_stations_data(const RunConfig& config,
                                            const std::vector<StationId>& selected) {
  config.validate();
  const auto models = config.model_list();
  require_file(config.stations_file(), "station table");
  require_file(config.observations_file(), "observations");
  for (const auto& m : models) require_file(config.forecasts_file(m), "forecasts");

  auto table = io::load_stations(config.stations_file());
  std::set<StationId> known;
  for (const auto& s : table) known.insert(s.station_id);
  for (const auto& id : selected) {
    if (!known.count(id)) throw InvalidInput("unknown station " + id);
  }
  if (!selected.empty()) {
    const std::set<StationId> keep(selected.begin(), selected.end());
    std::erase_if(table, [&](const StationMetadata& s) { return !keep.count(s.station_id); });
  }

  std::map<StationId, ObservationSeries> obs;
  for (auto& s : io::load_observations(config.observations_file())) {
    const StationId id = s.station_id();
    obs.emplace(id, std::move(s));
  }
  std::map<StationId, std::map<ModelId, std::vector<EnsembleForecast>>> fcs;
  for (const auto& m : models) {
    const auto path = config.forecasts_file(m);
    for (auto& f : io::load_forecasts(path, m)) {
      if (!known.count(f.station_id)) {
        throw InvalidInput(path + ": forecast for unknown station " + f.station_id);
      }
      fcs[f.station_id][m].push_back(std::move(f));
    }
  }

  std::vector<StationData> out(table.size());
  parallel_for(table.size(), [&](std::size_t i) {
    const auto& st = table[i];
    auto o = obs.find(st.station_id);
    ObservationSeries series = o == obs.end() ? ObservationSeries(st.station_id, {}, {}) : o->second;
    const auto f = fcs.find(st.station_id);
    static const std::map<ModelId, std::vector<EnsembleForecast>> kNone;
    out[i] = prepare_station(st, std::move(series), f == fcs.end() ? kNone : f->second, config);
  }, config.threads);
  return out;
}

TrainSummary train(const RunConfig& config, const std::vector<StationId>& stations) {
  const auto data = load_stations_data(config, stations);
  std::vector<StationTraining> trained(data.size());
  parallel_for(data.size(), [&](std::size_t i) { trained[i] = train_station(data[i], config); },
               config.threads);
  CoefficientStore store;
  TrainSummary summary;
  for (auto& t : trained) {
    for (const auto& [key, rec] : t.store.records()) store.put(key, rec);
    summary.fresh_fits += t.fresh_fits;
    summary.fallbacks += t.fallbacks;
    summary.problems.insert(summary.problems.end(), t.problems.begin(), t.problems.end());
  }
  summary.keys = store.size();
  auto out = create(config.store_file());
  store.write(out);
  return summary;
}

namespace {

CoefficientStore load_store(const RunConfig& config) {
  require_file(config.store_file(), "coefficient store");
  std::ifstream in(config.store_file());
  return CoefficientStore::read(in, config.store_file());
}

}  // namespace

void predict(const RunConfig& config, const std::vector<StationId>& stations) {
  const auto data = load_stations_data(config, stations);
  const auto store = load_store(config);
  std::vector<std::vector<io::PredictionRow>> parts(data.size());
  parallel_for(data.size(), [&](std::size_t i) { parts[i] = predict_station(data[i], store, config); },
               config.threads);
  std::vector<io::PredictionRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());
  auto out = create(config.predictions_file());
  io::write_predictions(out, rows);
}

void transition(const RunConfig& config, TransitionScheme scheme) {
  config.validate();
  require_file(config.predictions_file(), "predictions");
  const auto rows = seamless_predictions(io::load_predictions(config.predictions_file()), config,
                                         scheme);
  auto out = create(config.seamless_file(scheme));
  io::write_predictions(out, rows);
}

VerifyResult verify(const RunConfig& config, const std::vector<StationId>& stations) {
  const auto data = load_stations_data(config, stations);
  const auto store = load_store(config);
  require_file(config.predictions_file(), "predictions");
  auto rows = io::load_predictions(config.predictions_file());
  for (const auto scheme : {TransitionScheme::none, TransitionScheme::t1, TransitionScheme::t2}) {
    const auto path = config.seamless_file(scheme);
    if (!fs::is_regular_file(path)) continue;
    auto extra = io::load_predictions(path);
    rows.insert(rows.end(), extra.begin(), extra.end());
  }
  auto result = verify(data, rows, store, config);
  write_report(result, config.strata, config.report_dir());
  return result;
}

void tpi(const RunConfig& config, const std::vector<StationId>& stations) {
  require_file(config.topography_file(), "topography grid");
  require_file(config.stations_file(), "station table");
  const auto grid = load_esri_ascii(config.topography_file());
  auto table = io::load_stations(config.stations_file());
  if (!stations.empty()) {
    const std::set<StationId> keep(stations.begin(), stations.end());
    for (const auto& id : stations) {
      if (std::none_of(table.begin(), table.end(),
                       [&](const StationMetadata& s) { return s.station_id == id; })) {
        throw InvalidInput("unknown station " + id);
      }
    }
    std::erase_if(table, [&](const StationMetadata& s) { return !keep.count(s.station_id); });
  }
  auto out = create((fs::path(config.output_dir) / "tpi.csv").string());
  out << "station_id,lon,lat,elev_m,tpi\n";
  for (const auto& s : table) {
    double value = std::numeric_limits<double>::quiet_NaN();
    try {
      value = tpi_at_station(grid, s);
    } catch (const UndefinedTpi&) {
      // Border cells, nodata neighbours and stations outside the grid stay NaN.
    }
    out << s.station_id << ',' << format_real(s.longitude) << ',' << format_real(s.latitude) << ','
        << format_real(s.elevation) << ',' << format_real(value) << '\n';
  }
}

}  // namespace emos::pipeline
