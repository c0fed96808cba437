#include "emos/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "emos/error.hpp"

namespace emos {

void StationMetadata::validate() const {
  if (!(latitude >= -90.0 && latitude <= 90.0)) {
    throw InvalidInput("station " + station_id + ": latitude out of range");
  }
  if (!(longitude >= -180.0 && longitude <= 180.0)) {
    throw InvalidInput("station " + station_id + ": longitude out of range");
  }
  if (!std::isfinite(elevation)) {
    throw InvalidInput("station " + station_id + ": elevation not finite");
  }
  for (const auto& [model, h] : grid_elevation) {
    if (!std::isfinite(h)) {
      throw InvalidInput("station " + station_id + ": grid elevation for " + model +
                         " not finite");
    }
  }
}

void EnsembleForecast::validate() const {
  if (members.empty()) throw InvalidInput("ensemble forecast without members");
  if (lead_time < 0) throw InvalidInput("negative lead time");
  for (double v : members) {
    if (!std::isfinite(v)) throw InvalidInput("non-finite ensemble member");
  }
}

ObservationSeries::ObservationSeries(StationId station_id, std::vector<HourStamp> timestamps,
                                     std::vector<double> values)
    : station_id_(std::move(station_id)),
      timestamps_(std::move(timestamps)),
      values_(std::move(values)) {
  if (timestamps_.size() != values_.size()) {
    throw InvalidInput("observation timestamps and values differ in length");
  }
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    if (!(timestamps_[i - 1] < timestamps_[i])) {
      throw InvalidInput("observation timestamps not strictly increasing for " + station_id_);
    }
  }
  for (double v : values_) {
    if (std::isinf(v)) throw InvalidInput("infinite observation for " + station_id_);
  }
}

std::optional<double> ObservationSeries::at(HourStamp t) const {
  const auto it = std::lower_bound(timestamps_.begin(), timestamps_.end(), t);
  if (it == timestamps_.end() || *it != t) return std::nullopt;
  const double v = values_[static_cast<std::size_t>(it - timestamps_.begin())];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

const EnsembleStats& TrainingSample::stats(const ModelId& model) const {
  const auto it = stats_per_model.find(model);
  if (it == stats_per_model.end()) {
    throw InvalidInput("training sample has no statistics for model " + model);
  }
  return it->second;
}

EnsembleStats ensemble_stats(std::span<const double> members) {
  if (members.empty()) throw InvalidInput("ensemble_stats: empty member list");
  const auto m = static_cast<double>(members.size());
  double sum = 0.0;
  for (double v : members) sum += v;
  const double mean = sum / m;
  double ss = 0.0;
  for (double v : members) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / m), members.size()};
}

AlignResult align(std::span<const EnsembleForecast> forecasts, const ObservationSeries& obs,
                  int lead_time, std::span<const ModelId> models) {
  std::vector<ModelId> wanted(models.begin(), models.end());
  if (wanted.empty()) {
    std::set<ModelId> seen;
    for (const auto& f : forecasts) seen.insert(f.model_id);
    wanted.assign(seen.begin(), seen.end());
  }

  // init time -> model -> stats
  std::map<HourStamp, std::unordered_map<ModelId, EnsembleStats>> by_init;
  for (const auto& f : forecasts) {
    if (f.lead_time != lead_time) continue;
    if (f.station_id != obs.station_id()) {
      throw InvalidInput("align: forecast station " + f.station_id +
                         " does not match observations of " + obs.station_id());
    }
    if (std::find(wanted.begin(), wanted.end(), f.model_id) == wanted.end()) continue;
    by_init[f.init_time][f.model_id] = ensemble_stats(f.members);
  }

  AlignResult result;
  for (auto& [init, per_model] : by_init) {
    const HourStamp valid = init + std::chrono::hours{lead_time};
    const auto y = obs.at(valid);
    const bool complete = std::all_of(wanted.begin(), wanted.end(), [&](const ModelId& m) {
      return per_model.count(m) != 0;
    });
    if (!y || !complete) {
      ++result.dropped;
      continue;
    }
    TrainingSample s;
    s.init_time = init;
    s.valid_time = valid;
    s.observation = *y;
    for (const auto& m : wanted) s.stats_per_model.emplace(m, per_model.at(m));
    result.samples.push_back(std::move(s));
  }
  // Fixed lead time: init order equals valid-time order.
  return result;
}

}  // namespace emos
