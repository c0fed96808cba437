#include "emos/training.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "emos/csv.hpp"
#include "emos/error.hpp"
#include "emos/parallel.hpp"

namespace emos {

void RollingWindowSpec::validate() const {
  if (window_days < 1) throw InvalidInput("window: days must be at least 1");
  if (min_samples < 1 || min_samples > window_days) {
    throw InvalidInput("window: min_samples must lie in [1, window days]");
  }
  if (reuse_days < 0) throw InvalidInput("window: reuse days must be non-negative");
}

std::string Strategy::to_string() const {
  switch (kind) {
    case Kind::single: return "single:" + first;
    case Kind::mixed: return "mixed:" + first + ":" + second;
    case Kind::mixed_tapered: return "mixed-t1:" + first + ":" + second;
  }
  return {};
}

Strategy Strategy::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidInput("unknown strategy '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "single") {
    if (rest.empty() || rest.find(':') != std::string::npos) {
      throw InvalidInput("malformed strategy '" + text + "'");
    }
    return single(rest);
  }
  const auto sep = rest.find(':');
  if (sep == std::string::npos || sep == 0 || sep + 1 == rest.size() ||
      rest.find(':', sep + 1) != std::string::npos) {
    throw InvalidInput("malformed strategy '" + text + "'");
  }
  if (kind == "mixed") return mixed(rest.substr(0, sep), rest.substr(sep + 1));
  if (kind == "mixed-t1") return mixed_tapered(rest.substr(0, sep), rest.substr(sep + 1));
  throw InvalidInput("unknown strategy '" + text + "'");
}

bool operator==(const CoefficientRecord& x, const CoefficientRecord& y) {
  auto same = [](double p, double q) { return p == q || (std::isnan(p) && std::isnan(q)); };
  return x.coefficients == y.coefficients && x.n_samples == y.n_samples &&
         same(x.objective, y.objective) && x.converged == y.converged &&
         x.fallback == y.fallback;
}

AnyCoefficients identity_coefficients(const Strategy& s) {
  if (s.is_mixed()) return MixedEmosCoefficients::identity();
  return EmosCoefficients::identity();
}

void CoefficientStore::put(const CoefficientKey& key, CoefficientRecord record) {
  records_.insert_or_assign(key, std::move(record));
}

const CoefficientRecord* CoefficientStore::find(const CoefficientKey& key) const {
  const auto it = records_.find(key);
  return it == records_.end() ? nullptr : &it->second;
}

std::optional<std::pair<CoefficientKey, CoefficientRecord>> CoefficientStore::latest_fresh(
    const StationId& station, int lead_time, const Strategy& strategy, Date issue_date,
    int max_age_days) const {
  for (int age = 1; age <= max_age_days; ++age) {
    const CoefficientKey key{station, lead_time, strategy, issue_date - std::chrono::days{age}};
    const auto* rec = find(key);
    if (rec && !rec->fallback) return std::make_pair(key, *rec);
  }
  return std::nullopt;
}

void CoefficientStore::write(std::ostream& out) const {
  out << kCoefficientStoreHeader << '\n';
  for (const auto& [key, rec] : records_) {
    out << key.station_id << ',' << key.lead_time << ',' << key.strategy.to_string() << ','
        << format_date(key.issue_date) << ',';
    if (const auto* s = std::get_if<EmosCoefficients>(&rec.coefficients)) {
      out << csv::format_real(s->a) << ',' << csv::format_real(s->b) << ",," << csv::format_real(s->c)
          << ',' << csv::format_real(s->d) << ",,";
    } else {
      const auto& m = std::get<MixedEmosCoefficients>(rec.coefficients);
      out << csv::format_real(m.a) << ',' << csv::format_real(m.b1) << ','
          << csv::format_real(m.b2) << ',' << csv::format_real(m.c) << ','
          << csv::format_real(m.d1) << ',' << csv::format_real(m.d2) << ',';
    }
    out << rec.n_samples << ',' << csv::format_real(rec.objective) << ','
        << (rec.converged ? 1 : 0) << ',' << (rec.fallback ? 1 : 0) << '\n';
  }
}

CoefficientStore CoefficientStore::read(std::istream& in, const std::string& source) {
  CoefficientStore store;
  csv::Reader reader(in, source, kCoefficientStoreHeader);
  while (auto row = reader.next()) {
    CoefficientKey key;
    key.station_id = row->text(0);
    key.lead_time = static_cast<int>(row->integer(1));
    key.strategy = row->parse<Strategy>(2, [](const std::string& t) { return Strategy::parse(t); });
    key.issue_date = row->parse<Date>(3, [](const std::string& t) { return parse_date(t); });
    CoefficientRecord rec;
    if (key.strategy.is_mixed()) {
      rec.coefficients = MixedEmosCoefficients{row->real(4), row->real(5), row->real(6),
                                               row->real(7), row->real(8), row->real(9)};
    } else {
      row->require_empty(6);
      row->require_empty(9);
      rec.coefficients = EmosCoefficients{row->real(4), row->real(5), row->real(7), row->real(8)};
    }
    rec.n_samples = static_cast<std::size_t>(row->integer(10));
    rec.objective = row->real(11, /*allow_nan=*/true);
    rec.converged = row->flag(12);
    rec.fallback = row->flag(13);
    store.put(key, std::move(rec));
  }
  return store;
}

std::vector<TrainingSample> select_window(std::span<const TrainingSample> archive,
                                          Date issue_date, const RollingWindowSpec& spec) {
  const Date first = issue_date - std::chrono::days{spec.window_days};
  std::vector<TrainingSample> out;
  for (const auto& s : archive) {
    const Date init = date_of(s.init_time);
    if (init >= first && init < issue_date) out.push_back(s);
  }
  return out;
}

namespace {

const std::vector<TrainingSample>& samples_for(const Archive& archive, const CoefficientKey& key) {
  static const std::vector<TrainingSample> kEmpty;
  const auto it = archive.find({key.station_id, key.lead_time});
  return it == archive.end() ? kEmpty : it->second;
}

// Drops samples lacking statistics for a model the strategy needs.
std::vector<TrainingSample> usable(std::vector<TrainingSample> window, const Strategy& s) {
  std::erase_if(window, [&](const TrainingSample& t) {
    if (!t.stats_per_model.count(s.first)) return true;
    return s.is_mixed() && !t.stats_per_model.count(s.second);
  });
  return window;
}

KeyOutcome fallback_outcome(const CoefficientKey& key, std::size_t n_samples,
                            const CoefficientStore& store, const RollingWindowSpec& window,
                            std::string error) {
  KeyOutcome out{key, {}, std::move(error)};
  if (auto prior = store.latest_fresh(key.station_id, key.lead_time, key.strategy,
                                      key.issue_date, window.reuse_days)) {
    out.record = prior->second;
  } else {
    out.record.coefficients = identity_coefficients(key.strategy);
    out.record.converged = true;
  }
  out.record.objective = std::numeric_limits<double>::quiet_NaN();
  out.record.n_samples = n_samples;
  out.record.fallback = true;
  return out;
}

template <class Coefficients>
KeyOutcome fresh_outcome(const CoefficientKey& key, const FitResult<Coefficients>& r) {
  KeyOutcome out{key, {}, {}};
  out.record.coefficients = r.coefficients;
  out.record.n_samples = r.diagnostics.sample_count;
  out.record.objective = r.diagnostics.objective;
  out.record.converged = r.diagnostics.converged;
  out.record.fallback = false;
  if (!r.diagnostics.converged) out.error = "optimizer did not converge within max_iterations";
  return out;
}

}  // namespace

std::vector<KeyOutcome> fit_for_issue(const Archive& archive, Date issue_date,
                                      std::span<const CoefficientKey> keys,
                                      const IssueFitOptions& options, CoefficientStore& store) {
  options.window.validate();
  options.fit.validate();

  std::vector<std::size_t> singles, mixed;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i].issue_date != issue_date) {
      throw InvalidInput("fit_for_issue: key issue date differs from " + format_date(issue_date));
    }
    (keys[i].strategy.is_mixed() ? mixed : singles).push_back(i);
  }

  std::vector<KeyOutcome> outcomes(keys.size());
  auto fit_one = [&](std::size_t i, const std::map<CoefficientKey, EmosCoefficients>* fresh) {
    const CoefficientKey& key = keys[i];
    try {
      const auto window =
          usable(select_window(samples_for(archive, key), issue_date, options.window),
                 key.strategy);
      if (static_cast<int>(window.size()) < options.window.min_samples) {
        outcomes[i] = fallback_outcome(key, window.size(), store, options.window, {});
        return;
      }
      if (!key.strategy.is_mixed()) {
        outcomes[i] = fresh_outcome(key, try_fit_single(window, key.strategy.first, options.fit));
        return;
      }
      FitOptions fit = options.fit;
      if (const auto b = options.bounds.find(key); b != options.bounds.end()) fit.bounds = b->second;
      MixedStarts starts;
      if (fresh) {
        auto lookup = [&](const ModelId& m) -> std::optional<EmosCoefficients> {
          const auto it = fresh->find({key.station_id, key.lead_time, Strategy::single(m), issue_date});
          if (it == fresh->end()) return std::nullopt;
          return it->second;
        };
        starts.first = lookup(key.strategy.first);
        starts.second = lookup(key.strategy.second);
      }
      outcomes[i] = fresh_outcome(key, try_fit_mixed(window, key.strategy.models(), fit, starts));
    } catch (const std::exception& e) {
      outcomes[i] = fallback_outcome(key, 0, store, options.window, e.what());
    }
  };

  parallel_for(singles.size(), [&](std::size_t j) { fit_one(singles[j], nullptr); },
               options.threads);

  // Fresh single-model fits seed the mixed fits of the same station and lead time.
  std::map<CoefficientKey, EmosCoefficients> fresh_singles;
  for (auto i : singles) {
    const auto& o = outcomes[i];
    if (!o.record.fallback && o.record.converged) {
      fresh_singles.emplace(o.key, std::get<EmosCoefficients>(o.record.coefficients));
    }
  }
  parallel_for(mixed.size(), [&](std::size_t j) { fit_one(mixed[j], &fresh_singles); },
               options.threads);

  for (const auto& o : outcomes) store.put(o.key, o.record);
  return outcomes;
}

IssuePredictions predict_for_issue(const CoefficientStore& store, const IssueStats& stats,
                                   std::span<const CoefficientKey> keys, double min_sigma) {
  IssuePredictions out;
  for (const auto& key : keys) {
    const auto* rec = store.find(key);
    if (!rec) {
      out.errors.emplace_back(key, "no coefficients for " + key.station_id + " lead " +
                                       std::to_string(key.lead_time) + " " +
                                       key.strategy.to_string() + " " +
                                       format_date(key.issue_date));
      continue;
    }
    const auto st = stats.find({key.station_id, key.lead_time});
    auto model_stats = [&](const ModelId& m) -> const EnsembleStats* {
      if (st == stats.end()) return nullptr;
      const auto it = st->second.find(m);
      return it == st->second.end() ? nullptr : &it->second;
    };
    const EnsembleStats* s1 = model_stats(key.strategy.first);
    const EnsembleStats* s2 = key.strategy.is_mixed() ? model_stats(key.strategy.second) : nullptr;
    if (!s1 || (key.strategy.is_mixed() && !s2)) {
      out.errors.emplace_back(key, "no ensemble statistics for " + key.station_id + " lead " +
                                       std::to_string(key.lead_time) + " " +
                                       key.strategy.to_string());
      continue;
    }
    if (key.strategy.is_mixed()) {
      out.predictions.emplace(
          key, predict_mixed(std::get<MixedEmosCoefficients>(rec->coefficients), *s1, *s2,
                             min_sigma));
    } else {
      out.predictions.emplace(
          key, predict_single(std::get<EmosCoefficients>(rec->coefficients), *s1, min_sigma));
    }
  }
  return out;
}

}  // namespace emos
