#include "emos/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "emos/csv.hpp"
#include "emos/error.hpp"

namespace emos::io {

namespace {

using csv::format_real;

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  return in;
}

HourStamp time_field(const csv::Row& row, std::size_t col) {
  return row.parse<HourStamp>(col, [](const std::string& t) { return parse_time(t); });
}

}  // namespace

void write_observations(std::ostream& out, const std::vector<ObservationSeries>& series) {
  out << kObservationsHeader << '\n';
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.station_id() << ',' << format_time(s.timestamps()[i]) << ','
          << format_real(s.values()[i]) << '\n';
    }
  }
}

std::vector<ObservationSeries> read_observations(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source, kObservationsHeader);
  std::vector<StationId> order;
  struct Entry {
    HourStamp time;
    double value;
    std::size_t line;
  };
  std::map<StationId, std::vector<Entry>> rows;
  while (auto row = reader.next()) {
    const StationId id = row->text(0);
    if (id.empty()) row->fail(0, "empty station id");
    if (!rows.count(id)) order.push_back(id);
    rows[id].push_back({time_field(*row, 1), row->real_or_missing(2), row->line()});
  }
  std::vector<ObservationSeries> out;
  for (const auto& id : order) {
    auto& r = rows[id];
    std::stable_sort(r.begin(), r.end(),
                     [](const Entry& a, const Entry& b) { return a.time < b.time; });
    std::vector<HourStamp> times;
    std::vector<double> values;
    for (const auto& e : r) {
      // Stable sorting keeps file order, so the second of two equal times is reported.
      if (!times.empty() && times.back() == e.time) {
        throw SchemaError(source, e.line, 2,
                          "duplicate observation time " + format_time(e.time) + " for " + id);
      }
      times.push_back(e.time);
      values.push_back(e.value);
    }
    out.emplace_back(id, std::move(times), std::move(values));
  }
  return out;
}

void write_forecasts(std::ostream& out, const std::vector<EnsembleForecast>& forecasts) {
  out << kForecastsHeader << '\n';
  for (const auto& f : forecasts) {
    const std::string prefix =
        f.station_id + ',' + format_time(f.init_time) + ',' + std::to_string(f.lead_time) + ',';
    for (std::size_t k = 0; k < f.members.size(); ++k) {
      out << prefix << k << ',' << format_real(f.members[k]) << '\n';
    }
  }
}

std::vector<EnsembleForecast> read_forecasts(std::istream& in, const ModelId& model,
                                             const std::string& source) {
  csv::Reader reader(in, source, kForecastsHeader);
  std::vector<EnsembleForecast> out;
  std::vector<std::size_t> first_line;  // line of member 0 of each forecast
  while (auto row = reader.next()) {
    const StationId id = row->text(0);
    const HourStamp init = time_field(*row, 1);
    const auto lead = row->integer(2);
    if (lead < 0) row->fail(2, "negative lead time");
    const auto idx = row->integer(3);
    const double v = row->real(4);
    const bool continues = !out.empty() && out.back().station_id == id &&
                           out.back().init_time == init && out.back().lead_time == lead;
    if (idx == 0) {
      if (continues) row->fail(3, "member index 0 repeated within a forecast");
      out.push_back({id, model, init, static_cast<int>(lead), {v}});
      first_line.push_back(row->line());
    } else {
      if (!continues || static_cast<std::size_t>(idx) != out.back().members.size()) {
        row->fail(3, "member index out of sequence");
      }
      out.back().members.push_back(v);
    }
  }
  if (!out.empty()) {
    const std::size_t m = out.front().members.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].members.size() != m) {
        throw SchemaError(source, first_line[i], 4,
                          "forecast has " + std::to_string(out[i].members.size()) +
                              " members, expected " + std::to_string(m));
      }
    }
  }
  return out;
}

void write_stations(std::ostream& out, const std::vector<StationMetadata>& stations,
                    const std::vector<ModelId>& models) {
  out << "station_id,lat,lon,elev_m";
  for (const auto& m : models) out << ",grid_elev_" << m;
  out << '\n';
  for (const auto& s : stations) {
    out << s.station_id << ',' << format_real(s.latitude) << ',' << format_real(s.longitude)
        << ',' << format_real(s.elevation);
    for (const auto& m : models) {
      const auto it = s.grid_elevation.find(m);
      out << ',' << format_real(it == s.grid_elevation.end() ? s.elevation : it->second);
    }
    out << '\n';
  }
}

std::vector<StationMetadata> read_stations(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source, "");
  const auto& header = reader.header();
  const std::vector<std::string> fixed{"station_id", "lat", "lon", "elev_m"};
  if (header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin())) {
    throw SchemaError(source, 1, 1, "expected header starting with station_id,lat,lon,elev_m");
  }
  std::vector<ModelId> models;
  for (std::size_t i = fixed.size(); i < header.size(); ++i) {
    const std::string prefix = "grid_elev_";
    if (header[i].rfind(prefix, 0) != 0 || header[i].size() == prefix.size()) {
      throw SchemaError(source, 1, i + 1, "expected a grid_elev_<model> column");
    }
    models.push_back(header[i].substr(prefix.size()));
  }
  std::vector<StationMetadata> out;
  while (auto row = reader.next()) {
    StationMetadata s;
    s.station_id = row->text(0);
    s.latitude = row->real(1);
    s.longitude = row->real(2);
    s.elevation = row->real(3);
    for (std::size_t k = 0; k < models.size(); ++k) {
      s.grid_elevation[models[k]] = row->real(fixed.size() + k);
    }
    try {
      s.validate();
    } catch (const InvalidInput& e) {
      row->fail(0, e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_predictions(std::ostream& out, const std::vector<PredictionRow>& rows) {
  out << kPredictionsHeader << '\n';
  for (const auto& r : rows) {
    out << r.station_id << ',' << format_time(r.init_time) << ',' << r.lead_time << ','
        << r.strategy << ',' << format_real(r.prediction.mu) << ','
        << format_real(r.prediction.sigma) << '\n';
  }
}

std::vector<PredictionRow> read_predictions(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source, kPredictionsHeader);
  std::vector<PredictionRow> out;
  while (auto row = reader.next()) {
    PredictionRow r;
    r.station_id = row->text(0);
    r.init_time = time_field(*row, 1);
    r.lead_time = static_cast<int>(row->integer(2));
    r.strategy = row->text(3);
    if (r.strategy.empty()) row->fail(3, "empty strategy");
    r.prediction.mu = row->real(4);
    r.prediction.sigma = row->real(5);
    if (!(r.prediction.sigma > 0.0)) row->fail(5, "sigma must be positive");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ObservationSeries> load_observations(const std::string& path) {
  auto in = open(path);
  return read_observations(in, path);
}

std::vector<EnsembleForecast> load_forecasts(const std::string& path, const ModelId& model) {
  auto in = open(path);
  return read_forecasts(in, model, path);
}

std::vector<StationMetadata> load_stations(const std::string& path) {
  auto in = open(path);
  return read_stations(in, path);
}

std::vector<PredictionRow> load_predictions(const std::string& path) {
  auto in = open(path);
  return read_predictions(in, path);
}

}  // namespace emos::io
