#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "emos/error.hpp"
#include "emos/training.hpp"
#include "fixtures.hpp"

using namespace emos;

namespace {

Date issue(int day_index) { return date_of(fixture::day(day_index)); }

Archive archive_of(const std::vector<TrainingSample>& samples) {
  Archive a;
  a[{"S1", 24}] = samples;
  return a;
}

std::vector<TrainingSample> days(int first, int last, std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  auto all = fixture::two_model_set(rng, last + 1);
  return {all.begin() + first, all.end()};
}

std::vector<CoefficientKey> keys(Date d) {
  return {{"S1", 24, Strategy::single("A"), d},
          {"S1", 24, Strategy::single("B"), d},
          {"S1", 24, Strategy::mixed("A", "B"), d}};
}

}  // namespace

TEST_CASE("strategies round-trip through their names") {
  for (const std::string name : {"single:hires", "mixed:hires:global", "mixed-t1:a:b"}) {
    CHECK(Strategy::parse(name).to_string() == name);
  }
  CHECK(Strategy::parse("mixed:a:b").is_mixed());
  CHECK_FALSE(Strategy::parse("single:a").is_mixed());
  for (const std::string bad : {"single", "single:", "single:a:b", "mixed:a", "mixed::b",
                                "mixed:a:b:c", "blend:a:b"}) {
    CHECK_THROWS_AS(Strategy::parse(bad), InvalidInput);
  }
}

TEST_CASE("window selection") {
  RollingWindowSpec spec;
  CHECK(spec.window_days == 45);
  const auto archive = days(0, 59);
  SUBCASE("a full window holds the 45 prior days") {
    const auto w = select_window(archive, issue(50), spec);
    CHECK(w.size() == 45);
    CHECK(date_of(w.front().init_time) == issue(5));
    CHECK(date_of(w.back().init_time) == issue(49));
  }
  SUBCASE("a short archive gives what it has") {
    const auto w = select_window(days(40, 59), issue(50), spec);
    CHECK(w.size() == 10);
  }
  SUBCASE("the issue date itself is never used") {
    for (const auto& s : select_window(archive, issue(30), spec)) {
      CHECK(date_of(s.init_time) < issue(30));
    }
  }
}

TEST_CASE("fresh fits and the fallback chain") {
  IssueFitOptions opt;
  opt.threads = 1;

  SUBCASE("a full window gives a fresh fit") {
    CoefficientStore store;
    const auto k = keys(issue(50));
    const auto out = fit_for_issue(archive_of(days(0, 59)), issue(50), k, opt, store);
    for (const auto& o : out) {
      CHECK(o.error.empty());
      CHECK_FALSE(o.record.fallback);
      CHECK(o.record.n_samples == 45);
    }
    CHECK(store.size() == 3);
  }
  SUBCASE("a short window without history falls back to the identity") {
    CoefficientStore store;
    const auto k = keys(issue(50));
    const auto out = fit_for_issue(archive_of(days(40, 59)), issue(50), k, opt, store);
    for (const auto& o : out) {
      CHECK(o.record.fallback);
      CHECK(o.record.n_samples == 10);
      CHECK(o.record.coefficients == identity_coefficients(o.key.strategy));
    }
  }
  SUBCASE("a short window reuses coefficients from three days earlier") {
    CoefficientStore store;
    const EmosCoefficients earlier{1.0, 0.9, 0.4, 0.8};
    store.put({"S1", 24, Strategy::single("A"), issue(47)}, {earlier, 45, 0.5, true, false});
    // A fallback record is never reused, even when more recent.
    store.put({"S1", 24, Strategy::single("A"), issue(49)},
              {EmosCoefficients{9, 9, 9, 9}, 5, 0.0, true, true});
    const std::vector<CoefficientKey> k{{"S1", 24, Strategy::single("A"), issue(50)}};
    const auto out = fit_for_issue(archive_of(days(40, 59)), issue(50), k, opt, store);
    CHECK(out[0].record.fallback);
    CHECK(std::get<EmosCoefficients>(out[0].record.coefficients) == earlier);
  }
  SUBCASE("coefficients older than the reuse window are not reused") {
    CoefficientStore store;
    store.put({"S1", 24, Strategy::single("A"), issue(38)},
              {EmosCoefficients{1, 1, 1, 1}, 45, 0.5, true, false});
    const std::vector<CoefficientKey> k{{"S1", 24, Strategy::single("A"), issue(50)}};
    const auto out = fit_for_issue(archive_of(days(40, 59)), issue(50), k, opt, store);
    CHECK(out[0].record.coefficients == identity_coefficients(Strategy::single("A")));
  }
  SUBCASE("keys for another date are rejected") {
    CoefficientStore store;
    CHECK_THROWS_AS(fit_for_issue(archive_of(days(0, 59)), issue(50), keys(issue(51)), opt, store),
                    InvalidInput);
  }
}

TEST_CASE("future archive entries never change a fit") {
  IssueFitOptions opt;
  opt.threads = 1;
  CoefficientStore with_future, without;
  const auto k = keys(issue(50));
  fit_for_issue(archive_of(days(0, 59)), issue(50), k, opt, with_future);
  fit_for_issue(archive_of(days(0, 49)), issue(50), k, opt, without);
  CHECK(with_future == without);
}

TEST_CASE("parallel fitting matches sequential fitting") {
  Archive archive;
  for (int s = 0; s < 6; ++s) archive[{"S" + std::to_string(s), 24}] = days(0, 59, 100 + s);
  std::vector<CoefficientKey> k;
  for (int s = 0; s < 6; ++s) {
    for (auto key : keys(issue(50))) {
      key.station_id = "S" + std::to_string(s);
      k.push_back(key);
    }
  }
  IssueFitOptions seq, par;
  seq.threads = 1;
  par.threads = 4;
  CoefficientStore a, b, c;
  fit_for_issue(archive, issue(50), k, seq, a);
  fit_for_issue(archive, issue(50), k, par, b);
  fit_for_issue(archive, issue(50), k, par, c);
  CHECK(a == b);
  CHECK(b == c);
}

TEST_CASE("predictions from the store") {
  IssueStats stats;
  stats[{"S1", 24}]["A"] = {5.0, 2.0, 20};
  stats[{"S1", 24}]["B"] = {6.0, 1.0, 50};

  SUBCASE("identity coefficients reproduce the ensemble") {
    CoefficientStore store;
    const CoefficientKey key{"S1", 24, Strategy::single("A"), issue(1)};
    store.put(key, {EmosCoefficients::identity(), 0, 0.0, true, true});
    const auto p = predict_for_issue(store, stats, std::vector{key});
    REQUIRE(p.errors.empty());
    CHECK(p.predictions.at(key).mu == 5.0);
    CHECK(p.predictions.at(key).sigma == 2.0);
  }
  SUBCASE("fitted coefficients match a direct prediction exactly") {
    CoefficientStore store;
    IssueFitOptions opt;
    opt.threads = 1;
    const auto k = keys(issue(50));
    fit_for_issue(archive_of(days(0, 59)), issue(50), k, opt, store);
    IssueStats s50;
    s50[{"S1", 24}] = stats.at({"S1", 24});
    const auto p = predict_for_issue(store, s50, k);
    REQUIRE(p.errors.empty());
    const auto& mixed = std::get<MixedEmosCoefficients>(store.find(k[2])->coefficients);
    const auto direct = predict_mixed(mixed, {5.0, 2.0, 20}, {6.0, 1.0, 50});
    CHECK(p.predictions.at(k[2]).mu == direct.mu);
    CHECK(p.predictions.at(k[2]).sigma == direct.sigma);
  }
  SUBCASE("a missing key is reported by name") {
    const CoefficientKey key{"S1", 24, Strategy::single("A"), issue(1)};
    const auto p = predict_for_issue(CoefficientStore{}, stats, std::vector{key});
    REQUIRE(p.errors.size() == 1);
    CHECK(p.errors[0].first == key);
    CHECK(p.errors[0].second.find("S1") != std::string::npos);
    CHECK(p.errors[0].second.find("single:A") != std::string::npos);
  }
}

TEST_CASE("the coefficient store round-trips through CSV") {
  CoefficientStore store;
  IssueFitOptions opt;
  opt.threads = 1;
  fit_for_issue(archive_of(days(0, 59)), issue(50), keys(issue(50)), opt, store);
  fit_for_issue(archive_of(days(45, 59)), issue(51), keys(issue(51)), opt, store);
  std::ostringstream first;
  store.write(first);
  std::istringstream in(first.str());
  const auto back = CoefficientStore::read(in, "store.csv");
  CHECK(back.size() == store.size());
  std::ostringstream second;
  back.write(second);
  CHECK(second.str() == first.str());
  for (const auto& [key, rec] : store.records()) {
    const auto* r = back.find(key);
    REQUIRE(r);
    CHECK(r->fallback == rec.fallback);
    CHECK(r->n_samples == rec.n_samples);
  }

  std::istringstream bad(std::string(kCoefficientStoreHeader) +
                         "\nS1,24,single:A,2020-01-01,0,1,,0,1,,45,0.5,1,0\n"
                         "S1,24,single:A,2020-01-02,0,1,2,0,1,,45,0.5,1,0\n");
  try {
    (void)CoefficientStore::read(bad, "bad.csv");
    FAIL("malformed store accepted");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 3);
  }
}
