#include "emos/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>

#include "emos/csv.hpp"
#include "emos/error.hpp"

namespace emos {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw InvalidInput(key + ": cannot parse '" + value + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) { return parse_number<int>(key, v); }
double to_real(const std::string& key, const std::string& v) { return parse_number<double>(key, v); }

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidInput(key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& item : csv::split(v, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

ModelSpec& model_spec(RunConfig& c, const ModelId& id) {
  for (auto& m : c.scenario.models) {
    if (m.id == id) return m;
  }
  ModelSpec m;
  m.id = id;
  c.scenario.models.push_back(m);
  return c.scenario.models.back();
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.seed = parse_number<std::uint64_t>(k, v);
       }},
      {"threads", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.threads = parse_number<unsigned>(k, v);
       }},
      {"models", [](RunConfig& c, const std::string&, const std::string& v) { c.models = to_list(v); }},
      {"strategies", [](RunConfig& c, const std::string&, const std::string& v) {
         c.strategies.clear();
         for (const auto& s : to_list(v)) c.strategies.push_back(Strategy::parse(s));
       }},
      {"reference", [](RunConfig& c, const std::string&, const std::string& v) { c.reference = v; }},
      {"leads", [](RunConfig& c, const std::string&, const std::string& v) {
         c.leads = parse_lead_list(v);
       }},
      {"paths.data", [](RunConfig& c, const std::string&, const std::string& v) { c.data_dir = v; }},
      {"paths.output", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"paths.observations",
       [](RunConfig& c, const std::string&, const std::string& v) { c.observations_path = v; }},
      {"paths.stations", [](RunConfig& c, const std::string&, const std::string& v) { c.stations_path = v; }},
      {"paths.topography",
       [](RunConfig& c, const std::string&, const std::string& v) { c.topography_path = v; }},
      {"paths.store", [](RunConfig& c, const std::string&, const std::string& v) { c.store_path = v; }},
      {"window.days", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.window.window_days = to_int(k, v);
       }},
      {"window.min_samples", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.window.min_samples = to_int(k, v);
       }},
      {"window.reuse_days", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.window.reuse_days = to_int(k, v);
       }},
      {"fit.max_iterations", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.fit.max_iterations = to_int(k, v);
       }},
      {"fit.tolerance", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.fit.objective_tolerance = to_real(k, v);
       }},
      {"fit.min_sigma", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.fit.min_sigma = to_real(k, v);
       }},
      {"transition.horizon", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.transition.horizon = to_int(k, v);
       }},
      {"transition.scheme", [](RunConfig& c, const std::string&, const std::string& v) {
         c.transition.scheme = parse_scheme(v);
       }},
      {"transition.weights", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.transition.weights.clear();
         for (const auto& w : to_list(v)) c.transition.weights.push_back(to_real(k, w));
       }},
      {"verify.season", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.strata.season = to_bool(k, v);
       }},
      {"verify.day_night", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.strata.day_night = to_bool(k, v);
       }},
      {"verify.lead_time", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.strata.lead_time = to_bool(k, v);
       }},
      {"verify.station", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.strata.station = to_bool(k, v);
       }},
      {"verify.burn_in_days", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.burn_in_days = to_int(k, v);
       }},
      {"verify.pit_bins", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.pit_bins = to_int(k, v);
       }},
      {"verify.alpha", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.alpha = to_real(k, v);
       }},
      {"interpolation.max_gap", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.interpolation_max_gap = to_int(k, v);
       }},
      {"lapse_rate", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.lapse_rate = to_real(k, v);
       }},
      {"scenario.stations", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.n_stations = to_int(k, v);
       }},
      {"scenario.days", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.n_days = to_int(k, v);
       }},
      {"scenario.start", [](RunConfig& c, const std::string&, const std::string& v) {
         c.scenario.start_date = parse_date(v);
       }},
      {"scenario.leads", [](RunConfig& c, const std::string&, const std::string& v) {
         c.scenario.lead_hours = parse_lead_list(v);
       }},
      {"scenario.common_error_std", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.common_error_std = to_real(k, v);
       }},
      {"scenario.common_error_growth", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.common_error_growth = to_real(k, v);
       }},
      {"scenario.common_lead_correlation",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.common_lead_correlation = to_real(k, v);
       }},
      {"scenario.predictability_variability",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.predictability_variability = to_real(k, v);
       }},
      {"scenario.elevation_min", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.station_elevation_min = to_real(k, v);
       }},
      {"scenario.elevation_max", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.station_elevation_max = to_real(k, v);
       }},
      {"truth.level", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.truth.level = to_real(k, v);
       }},
      {"truth.seasonal_amplitude", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.truth.seasonal_amplitude = to_real(k, v);
       }},
      {"truth.diurnal_amplitude", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.truth.diurnal_amplitude = to_real(k, v);
       }},
      {"truth.diurnal_peak_hour", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.truth.diurnal_peak_hour = to_int(k, v);
       }},
      {"truth.ar_coefficient", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.truth.ar_coefficient = to_real(k, v);
       }},
      {"truth.innovation_std", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.truth.innovation_std = to_real(k, v);
       }},
      {"truth.elevation_gradient", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.scenario.truth.elevation_gradient = to_real(k, v);
       }},
  };
  return table;
}

// model.<id>.<field>
void apply_model_setting(RunConfig& c, const std::string& key, const std::string& value) {
  const auto dot = key.find('.', 6);
  if (dot == std::string::npos || dot == 6 || dot + 1 == key.size()) {
    throw InvalidInput("unknown configuration key '" + key + "'");
  }
  const std::string id = key.substr(6, dot - 6);
  const std::string field = key.substr(dot + 1);
  static const std::map<std::string, std::function<void(ModelSpec&, const std::string&,
                                                        const std::string&)>>
      fields = {
          {"members", [](ModelSpec& m, auto& k, auto& v) { m.member_count = to_int(k, v); }},
          {"horizon", [](ModelSpec& m, auto& k, auto& v) { m.horizon = to_int(k, v); }},
          {"hourly_until", [](ModelSpec& m, auto& k, auto& v) { m.hourly_until = to_int(k, v); }},
          {"coarse_step", [](ModelSpec& m, auto& k, auto& v) { m.coarse_step = to_int(k, v); }},
          {"bias_mean", [](ModelSpec& m, auto& k, auto& v) { m.bias_mean = to_real(k, v); }},
          {"bias_amplitude", [](ModelSpec& m, auto& k, auto& v) { m.bias_amplitude = to_real(k, v); }},
          {"bias_peak_hour", [](ModelSpec& m, auto& k, auto& v) { m.bias_peak_hour = to_int(k, v); }},
          {"bias_variability",
           [](ModelSpec& m, auto& k, auto& v) { m.bias_variability = to_real(k, v); }},
          {"error_std", [](ModelSpec& m, auto& k, auto& v) { m.error_std = to_real(k, v); }},
          {"error_growth", [](ModelSpec& m, auto& k, auto& v) { m.error_growth = to_real(k, v); }},
          {"error_lead_correlation",
           [](ModelSpec& m, auto& k, auto& v) { m.error_lead_correlation = to_real(k, v); }},
          {"dispersion", [](ModelSpec& m, auto& k, auto& v) { m.dispersion = to_real(k, v); }},
          {"station_bias_std",
           [](ModelSpec& m, auto& k, auto& v) { m.station_bias_std = to_real(k, v); }},
          {"grid_elevation_std",
           [](ModelSpec& m, auto& k, auto& v) { m.grid_elevation_std = to_real(k, v); }},
      };
  const auto it = fields.find(field);
  if (it == fields.end()) throw InvalidInput("unknown configuration key '" + key + "'");
  it->second(model_spec(c, id), key, value);
}

}  // namespace

std::string RunConfig::observations_file() const {
  return observations_path.empty() ? join(data_dir, "observations.csv") : observations_path;
}

std::string RunConfig::stations_file() const {
  return stations_path.empty() ? join(data_dir, "stations.csv") : stations_path;
}

std::string RunConfig::topography_file() const {
  return topography_path.empty() ? join(data_dir, "topography.asc") : topography_path;
}

std::string RunConfig::forecasts_file(const ModelId& model) const {
  const auto it = forecast_paths.find(model);
  if (it != forecast_paths.end()) return it->second;
  return join(data_dir, "forecasts_" + model + ".csv");
}

std::string RunConfig::store_file() const {
  return store_path.empty() ? join(output_dir, "coefficients.csv") : store_path;
}

std::string RunConfig::predictions_file() const { return join(output_dir, "predictions.csv"); }

std::string RunConfig::seamless_file(TransitionScheme scheme) const {
  return join(output_dir, "seamless_" + to_string(scheme) + ".csv");
}

std::string RunConfig::report_dir() const { return join(output_dir, "report"); }

std::vector<ModelId> RunConfig::model_list() const {
  if (!models.empty()) return models;
  std::vector<ModelId> out;
  for (const auto& m : scenario.models) out.push_back(m.id);
  return out;
}

std::vector<Strategy> RunConfig::strategy_list() const {
  std::vector<Strategy> out = strategies;
  if (out.empty()) {
    const auto ms = model_list();
    for (const auto& m : ms) out.push_back(Strategy::single(m));
    if (ms.size() >= 2) out.push_back(Strategy::mixed(ms[0], ms[1]));
  }
  const std::size_t configured = out.size();
  for (std::size_t i = 0; i < configured; ++i) {
    if (out[i].kind != Strategy::Kind::mixed) continue;
    const auto t = Strategy::mixed_tapered(out[i].first, out[i].second);
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

std::string RunConfig::reference_strategy() const {
  if (!reference.empty()) return reference;
  const auto ms = model_list();
  return ms.empty() ? std::string{} : "raw:" + ms.front();
}

void RunConfig::validate() const {
  window.validate();
  fit.validate();
  transition.validate();
  const auto ms = model_list();
  if (ms.empty()) throw InvalidInput("config: no models");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i].empty() || ms[i].find_first_of(",:/") != std::string::npos) {
      throw InvalidInput("config: invalid model id '" + ms[i] + "'");
    }
    if (std::count(ms.begin(), ms.end(), ms[i]) > 1) {
      throw InvalidInput("config: model '" + ms[i] + "' listed twice");
    }
  }
  const auto strategies_used = strategy_list();
  if (strategies_used.empty()) throw InvalidInput("config: strategy list is empty");
  for (const auto& s : strategies_used) {
    for (const auto& m : {s.first, s.second}) {
      if (!m.empty() && std::find(ms.begin(), ms.end(), m) == ms.end()) {
        throw InvalidInput("config: strategy " + s.to_string() + " uses unknown model " + m);
      }
    }
  }
  for (const auto& s : strategies_used) {
    if (s.kind == Strategy::Kind::mixed_tapered &&
        std::find(strategies_used.begin(), strategies_used.end(),
                  Strategy::mixed(s.first, s.second)) == strategies_used.end()) {
      throw InvalidInput("config: " + s.to_string() + " needs " +
                         Strategy::mixed(s.first, s.second).to_string());
    }
  }
  if (interpolation_max_gap < 1) throw InvalidInput("config: interpolation.max_gap must be >= 1");
  if (pit_bins < 2) throw InvalidInput("config: verify.pit_bins must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("config: verify.alpha must lie in (0, 1)");
  for (int l : leads) {
    if (l < 0) throw InvalidInput("config: negative lead time");
  }
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  if (key.rfind("model.", 0) == 0) {
    apply_model_setting(config, key, value);
    return;
  }
  if (key.rfind("paths.forecasts.", 0) == 0 && key.size() > 16) {
    config.forecast_paths[key.substr(16)] = value;
    return;
  }
  const auto it = setters().find(key);
  if (it == setters().end()) throw InvalidInput("unknown configuration key '" + key + "'");
  it->second(config, key, value);
}

void apply_config(RunConfig& config, std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw SchemaError(source, line_no, 1, "expected 'key = value'");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw SchemaError(source, line_no, 1, "empty key");
    try {
      apply_setting(config, key, value);
    } catch (const InvalidInput& e) {
      throw SchemaError(source, line_no, eq + 2, e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open configuration file " + path);
  apply_config(config, in, path);
}

std::vector<int> parse_lead_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : to_list(text)) {
    const std::string key = "lead list";
    std::string range = item;
    int step = 1;
    if (const auto slash = item.find('/'); slash != std::string::npos) {
      range = item.substr(0, slash);
      step = to_int(key, item.substr(slash + 1));
      if (step < 1) throw InvalidInput("lead list: step must be positive in '" + item + "'");
    }
    if (const auto dash = range.find('-'); dash != std::string::npos && dash > 0) {
      const int lo = to_int(key, range.substr(0, dash));
      const int hi = to_int(key, range.substr(dash + 1));
      if (hi < lo) throw InvalidInput("lead list: empty range '" + item + "'");
      for (int l = lo; l <= hi; l += step) out.push_back(l);
    } else {
      out.push_back(to_int(key, range));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (int l : out) {
    if (l < 0) throw InvalidInput("lead list: negative lead");
  }
  return out;
}

}  // namespace emos
