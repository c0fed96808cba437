#include "emos/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>

#include "emos/error.hpp"
#include "emos/terrain.hpp"

namespace emos {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Independent stream per (station, purpose) so that stations and models can be
// generated in any order and still reproduce.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t station, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(station), static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

enum Purpose : std::uint64_t {
  kStations = 0,
  kTruth = 1,
  kCommonError = 2,
  kPredictability = 3,
  kModelBase = 100,     // + model index: model error and members
  kRegimeBase = 200,    // + model index: day-to-day bias variability
};

double diurnal_cos(int hour, int peak_hour) {
  return std::cos(kTwoPi * static_cast<double>(hour - peak_hour) / 24.0);
}

}  // namespace

void TruthSpec::validate() const {
  if (!(ar_coefficient > -1.0 && ar_coefficient < 1.0)) {
    throw InvalidInput("scenario: AR(1) coefficient must lie in (-1, 1)");
  }
  if (innovation_std < 0.0) throw InvalidInput("scenario: innovation std must be non-negative");
}

void ModelSpec::validate() const {
  if (id.empty()) throw InvalidInput("scenario: model without id");
  if (member_count < 2) throw InvalidInput("scenario: model " + id + " needs at least 2 members");
  if (!(dispersion > 0.0)) throw InvalidInput("scenario: model " + id + " dispersion must be > 0");
  if (horizon < 0 || coarse_step < 1) throw InvalidInput("scenario: model " + id + " lead setup");
  if (error_std < 0.0 || error_growth < 0.0 || station_bias_std < 0.0 ||
      grid_elevation_std < 0.0 || bias_variability < 0.0) {
    throw InvalidInput("scenario: model " + id + " has a negative spread parameter");
  }
  if (!(error_lead_correlation > -1.0 && error_lead_correlation < 1.0)) {
    throw InvalidInput("scenario: model " + id + " lead correlation must lie in (-1, 1)");
  }
}

bool ModelSpec::native_lead(int lead) const {
  if (lead < 0 || lead > horizon) return false;
  return lead <= hourly_until || (lead - hourly_until) % coarse_step == 0;
}

void ScenarioSpec::validate() const {
  if (n_stations < 1 || n_days < 1) throw InvalidInput("scenario: need stations and days");
  if (models.empty()) throw InvalidInput("scenario: no models");
  truth.validate();
  for (const auto& m : models) m.validate();
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t j = i + 1; j < models.size(); ++j)
      if (models[i].id == models[j].id) throw InvalidInput("scenario: duplicate model id");
  for (int l : lead_hours)
    if (l < 0) throw InvalidInput("scenario: negative lead hour");
  if (common_error_std < 0.0 || common_error_growth < 0.0 || predictability_variability < 0.0) {
    throw InvalidInput("scenario: negative error parameter");
  }
  if (!(common_lead_correlation > -1.0 && common_lead_correlation < 1.0)) {
    throw InvalidInput("scenario: common lead correlation must lie in (-1, 1)");
  }
  if (station_elevation_max < station_elevation_min) {
    throw InvalidInput("scenario: station elevation range is empty");
  }
}

int ScenarioSpec::max_lead() const {
  int h = 0;
  for (const auto& m : models) h = std::max(h, m.horizon);
  return h;
}

std::vector<int> ScenarioSpec::leads() const {
  if (!lead_hours.empty()) {
    std::vector<int> l = lead_hours;
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    return l;
  }
  std::vector<int> l(static_cast<std::size_t>(max_lead() + 1));
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = static_cast<int>(i);
  return l;
}

const ModelSpec& ScenarioSpec::model(const ModelId& id) const {
  for (const auto& m : models)
    if (m.id == id) return m;
  throw InvalidInput("scenario: unknown model '" + id + "'");
}

ScenarioSpec paper_like_preset(std::uint64_t seed, int n_stations, int n_days) {
  ScenarioSpec s;
  s.seed = seed;
  s.n_stations = n_stations;
  s.n_days = n_days;
  s.common_error_std = 0.5;
  s.common_error_growth = 0.008;
  s.common_lead_correlation = 0.97;
  s.predictability_variability = 0.15;
  s.truth.innovation_std = 1.0;  // day-to-day anomaly std near 4 degC

  ModelSpec hires;
  hires.id = "hires";
  hires.member_count = 21;
  hires.horizon = 120;
  hires.hourly_until = 120;
  hires.bias_mean = -0.4;
  hires.bias_amplitude = -0.6;  // cold days, near-neutral nights
  hires.bias_variability = 0.8;
  hires.error_std = 0.5;
  hires.error_growth = 0.006;
  hires.error_lead_correlation = 0.95;
  hires.dispersion = 0.4;
  hires.station_bias_std = 0.5;
  hires.grid_elevation_std = 150.0;

  ModelSpec global;
  global.id = "global";
  global.member_count = 51;
  global.horizon = 150;
  global.hourly_until = 90;
  global.coarse_step = 3;
  global.bias_mean = -0.5;
  global.bias_amplitude = 0.9;  // cold nights, warm days
  global.bias_variability = 0.8;
  global.error_std = 0.6;
  global.error_growth = 0.006;
  global.error_lead_correlation = 0.95;
  global.dispersion = 0.6;
  global.station_bias_std = 0.8;
  global.grid_elevation_std = 400.0;

  s.models = {hires, global};
  return s;
}

std::vector<StationMetadata> generate_stations(const ScenarioSpec& spec) {
  spec.validate();
  auto rng = stream(spec.seed, 0, kStations);
  std::uniform_real_distribution<double> lat(45.8, 47.8), lon(5.9, 10.5),
      elev(spec.station_elevation_min, spec.station_elevation_max);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<StationMetadata> out;
  for (int i = 0; i < spec.n_stations; ++i) {
    StationMetadata st;
    char id[16];
    std::snprintf(id, sizeof id, "S%03d", i + 1);
    st.station_id = id;
    st.latitude = lat(rng);
    st.longitude = lon(rng);
    st.elevation = elev(rng);
    for (const auto& m : spec.models) {
      st.grid_elevation[m.id] = st.elevation + m.grid_elevation_std * normal(rng);
    }
    out.push_back(std::move(st));
  }
  return out;
}

ObservationSeries generate_truth(const ScenarioSpec& spec, const StationMetadata& station,
                                 int station_index) {
  spec.validate();
  const auto& t = spec.truth;
  auto rng = stream(spec.seed, static_cast<std::uint64_t>(station_index), kTruth);
  std::normal_distribution<double> normal(0.0, 1.0);

  const HourStamp first{spec.start_date};
  const auto hours = static_cast<std::size_t>(spec.n_days) * 24 +
                     static_cast<std::size_t>(spec.max_lead()) + 1;
  const HourStamp jan15{Date{std::chrono::year{1970} / 1 / 15}};
  const double level = t.level - t.elevation_gradient * (station.elevation - 500.0);

  std::vector<HourStamp> times(hours);
  std::vector<double> values(hours);
  const double stationary = t.innovation_std / std::sqrt(1.0 - t.ar_coefficient * t.ar_coefficient);
  double anomaly = stationary * normal(rng);
  for (std::size_t i = 0; i < hours; ++i) {
    const HourStamp now = first + std::chrono::hours{static_cast<long>(i)};
    if (i > 0) anomaly = t.ar_coefficient * anomaly + t.innovation_std * normal(rng);
    const double days = static_cast<double>((now - jan15).count()) / 24.0;
    times[i] = now;
    values[i] = level - t.seasonal_amplitude * std::cos(kTwoPi * days / 365.25) +
                t.diurnal_amplitude * diurnal_cos(hour_of_day(now), t.diurnal_peak_hour) + anomaly;
  }
  return ObservationSeries(station.station_id, std::move(times), std::move(values));
}

std::vector<ObservationSeries> generate_truth(const ScenarioSpec& spec) {
  const auto stations = generate_stations(spec);
  std::vector<ObservationSeries> out;
  for (int i = 0; i < spec.n_stations; ++i) {
    out.push_back(generate_truth(spec, stations[static_cast<std::size_t>(i)], i));
  }
  return out;
}

namespace {

// AR(1) across lead hours with unit marginal variance.
void unit_ar_path(std::mt19937_64& rng, double rho, std::vector<double>& path) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double innov = std::sqrt(1.0 - rho * rho);
  for (std::size_t l = 0; l < path.size(); ++l) {
    path[l] = l == 0 ? normal(rng) : rho * path[l - 1] + innov * normal(rng);
  }
}

}  // namespace

std::vector<EnsembleForecast> generate_model_ensemble(const ScenarioSpec& spec,
                                                      std::size_t model_index,
                                                      const StationMetadata& station,
                                                      int station_index,
                                                      const ObservationSeries& truth) {
  spec.validate();
  if (model_index >= spec.models.size()) throw InvalidInput("scenario: model index out of range");
  const ModelSpec& m = spec.models[model_index];
  const auto st = static_cast<std::uint64_t>(station_index);
  auto model_rng = stream(spec.seed, st, kModelBase + model_index);
  auto regime_rng = stream(spec.seed, st, kRegimeBase + model_index);
  auto common_rng = stream(spec.seed, st, kCommonError);
  auto predict_rng = stream(spec.seed, st, kPredictability);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double station_bias = m.station_bias_std * normal(model_rng);
  const auto grid_it = station.grid_elevation.find(m.id);
  const double grid_elevation =
      grid_it == station.grid_elevation.end() ? station.elevation : grid_it->second;
  const double elevation_shift = -kLapseRatePer100m / 100.0 * (grid_elevation - station.elevation);

  const int max_lead = spec.max_lead();
  const int regime_days = spec.n_days + max_lead / 24 + 2;
  std::vector<double> regime(static_cast<std::size_t>(regime_days));
  for (auto& r : regime) r = normal(regime_rng);

  std::vector<int> leads;
  for (int l : spec.leads())
    if (m.native_lead(l)) leads.push_back(l);

  std::vector<double> common(static_cast<std::size_t>(max_lead + 1));
  std::vector<double> own(static_cast<std::size_t>(m.horizon + 1));
  const double pv = spec.predictability_variability;

  std::vector<EnsembleForecast> out;
  for (int day = 0; day < spec.n_days; ++day) {
    const HourStamp init{spec.start_date + std::chrono::days{day}};
    const double factor = std::exp(pv * normal(predict_rng) - 0.5 * pv * pv);
    unit_ar_path(common_rng, spec.common_lead_correlation, common);
    unit_ar_path(model_rng, m.error_lead_correlation, own);

    for (int lead : leads) {
      const HourStamp valid = init + std::chrono::hours{lead};
      const auto y = truth.at(valid);
      if (!y) throw InvalidInput("scenario: truth does not cover valid time " + format_time(valid));
      const auto l = static_cast<std::size_t>(lead);
      const double common_std = spec.common_error_std + spec.common_error_growth * lead;
      const double own_std = m.error_std + m.error_growth * lead;
      const double shared =
          factor * (common_std * common[l] + own_std * own[l]);
      const auto valid_day = static_cast<std::size_t>((date_of(valid) - spec.start_date).count());
      const double bias =
          (m.bias_mean + m.bias_amplitude * diurnal_cos(hour_of_day(valid), m.bias_peak_hour)) *
          (1.0 + m.bias_variability * regime[valid_day]);
      const double spread =
          m.dispersion * factor * std::sqrt(common_std * common_std + own_std * own_std);
      const double center = *y + elevation_shift + bias + station_bias + shared;

      EnsembleForecast f;
      f.station_id = station.station_id;
      f.model_id = m.id;
      f.init_time = init;
      f.lead_time = lead;
      f.members.resize(static_cast<std::size_t>(m.member_count));
      for (auto& x : f.members) x = center + spread * normal(model_rng);
      out.push_back(std::move(f));
    }
  }
  return out;
}

StationScenario generate_station(const ScenarioSpec& spec, int station_index) {
  const auto stations = generate_stations(spec);
  if (station_index < 0 || station_index >= spec.n_stations) {
    throw InvalidInput("scenario: station index out of range");
  }
  StationScenario s;
  s.station = stations[static_cast<std::size_t>(station_index)];
  s.observations = generate_truth(spec, s.station, station_index);
  for (std::size_t m = 0; m < spec.models.size(); ++m) {
    s.forecasts.push_back(
        generate_model_ensemble(spec, m, s.station, station_index, s.observations));
  }
  return s;
}

std::vector<EnsembleForecast> interpolate_leads(const std::vector<EnsembleForecast>& forecasts,
                                                int max_gap, int target_step) {
  if (target_step < 1 || max_gap < 1) throw InvalidInput("interpolate_leads: invalid step");
  // (station, model, init) -> forecasts sorted by lead
  std::map<std::tuple<StationId, ModelId, HourStamp>, std::vector<const EnsembleForecast*>> groups;
  for (const auto& f : forecasts) groups[{f.station_id, f.model_id, f.init_time}].push_back(&f);

  std::vector<EnsembleForecast> out;
  for (auto& [key, group] : groups) {
    std::sort(group.begin(), group.end(),
              [](const auto* a, const auto* b) { return a->lead_time < b->lead_time; });
    for (std::size_t i = 0; i < group.size(); ++i) {
      const EnsembleForecast& lo = *group[i];
      out.push_back(lo);
      if (i + 1 == group.size()) break;
      const EnsembleForecast& hi = *group[i + 1];
      const int gap = hi.lead_time - lo.lead_time;
      if (gap == 0) throw InvalidInput("interpolate_leads: duplicate lead time");
      if (gap > max_gap) {
        throw InvalidInput("interpolate_leads: gap of " + std::to_string(gap) + " h between leads " +
                           std::to_string(lo.lead_time) + " and " + std::to_string(hi.lead_time));
      }
      if (lo.members.size() != hi.members.size()) {
        throw InvalidInput("interpolate_leads: member counts differ between leads");
      }
      for (int lead = lo.lead_time + target_step; lead < hi.lead_time; lead += target_step) {
        const double w = static_cast<double>(lead - lo.lead_time) / gap;
        EnsembleForecast f = lo;
        f.lead_time = lead;
        for (std::size_t k = 0; k < f.members.size(); ++k) {
          f.members[k] = lo.members[k] + w * (hi.members[k] - lo.members[k]);
        }
        out.push_back(std::move(f));
      }
    }
  }
  return out;
}

}  // namespace emos
