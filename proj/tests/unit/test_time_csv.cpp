#include <cmath>
#include <sstream>

#include "doctest.h"
#include "emos/csv.hpp"
#include "emos/error.hpp"
#include "emos/time.hpp"

using namespace emos;

TEST_CASE("timestamps round-trip through their text form") {
  const HourStamp t = make_hour(2019, 12, 31, 23);
  CHECK(format_time(t) == "2019-12-31T23:00:00Z");
  CHECK(parse_time("2019-12-31T23:00:00Z") == t);
  CHECK(format_date(date_of(t)) == "2019-12-31");
  CHECK(parse_date("2020-02-29") == date_of(make_hour(2020, 2, 29)));
  CHECK(hour_of_day(t) == 23);
  CHECK(month_of(t) == 12u);
}

TEST_CASE("timestamps off the whole hour or malformed are rejected") {
  CHECK_THROWS_AS(parse_time("2019-12-31T23:30:00Z"), InvalidInput);
  CHECK_THROWS_AS(parse_time("2019-12-31 23:00:00"), InvalidInput);
  CHECK_THROWS_AS(parse_time("2019-12-31T24:00:00Z"), InvalidInput);
  CHECK_THROWS_AS(parse_date("2019-02-30"), InvalidInput);
  CHECK_THROWS_AS(make_hour(2019, 13, 1), InvalidInput);
}

TEST_CASE("reals are written with nine significant digits") {
  CHECK(csv::format_real(1.0 / 3.0) == "0.333333333");
  CHECK(csv::format_real(-2.5) == "-2.5");
  CHECK(csv::format_real(std::nan("")) == "nan");
  const double v = 123.456789012;
  CHECK(std::stod(csv::format_real(v)) == doctest::Approx(v).epsilon(1e-9));
}

TEST_CASE("reader checks the header and the field count per line") {
  std::istringstream in("a,b\n1,2\n\n3\n");
  csv::Reader reader(in, "t.csv", "a,b");
  auto row = reader.next();
  REQUIRE(row);
  CHECK(row->integer(0) == 1);
  CHECK(row->real(1) == 2.0);
  try {
    (void)reader.next();
    FAIL("short row accepted");
  } catch (const SchemaError& e) {
    CHECK(e.file() == "t.csv");
    CHECK(e.line() == 4);
  }

  std::istringstream wrong("x,y\n");
  CHECK_THROWS_AS(csv::Reader(wrong, "w.csv", "a,b"), SchemaError);
  std::istringstream empty("");
  CHECK_THROWS_AS(csv::Reader(empty, "e.csv", "a,b"), SchemaError);
}

TEST_CASE("field parsers name the offending column") {
  std::istringstream in("a,b,c\n1,x,\n");
  csv::Reader reader(in, "f.csv", "");
  auto row = reader.next();
  REQUIRE(row);
  try {
    (void)row->real(1);
    FAIL("bad real accepted");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 2);
  }
  CHECK(std::isnan(row->real_or_missing(2)));
  CHECK_THROWS_AS((void)row->flag(1), SchemaError);
  CHECK_THROWS_AS(row->require_empty(0), SchemaError);
}
