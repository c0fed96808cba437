#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "emos/domain.hpp"
#include "emos/terrain.hpp"

using namespace emos;
using doctest::Approx;

namespace {

ElevationGrid grid_of(int rows, int cols, const std::function<double(int, int)>& f,
                      double cell = 1.0, double x0 = 0.0, double y0 = 0.0) {
  std::vector<double> v;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) v.push_back(f(r, c));
  return ElevationGrid(rows, cols, cell, x0, y0, std::move(v), -9999.0);
}

StationMetadata at(double lon, double lat) {
  StationMetadata s;
  s.station_id = "S";
  s.longitude = lon;
  s.latitude = lat;
  return s;
}

}  // namespace

TEST_CASE("lapse-rate correction") {
  CHECK(kLapseRatePer100m == 0.6);
  const std::vector<double> five{5.0};
  CHECK(lapse_correct(five, 1500.0, 1000.0)[0] == Approx(8.0).epsilon(1e-15));
  CHECK(lapse_correct(five, 700.0, 700.0)[0] == 5.0);
  CHECK(lapse_correct(five, 800.0, 1000.0)[0] == Approx(3.8).epsilon(1e-15));
  CHECK(lapse_correct(five, 1100.0, 1000.0, 0.65)[0] == Approx(5.65).epsilon(1e-15));
  CHECK_THROWS_AS(lapse_correct(five, NAN, 1000.0), InvalidInput);
}

TEST_CASE("lapse-rate correction shifts the mean and keeps the spread") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> t(5.0, 4.0);
  std::uniform_real_distribution<double> h(0.0, 3000.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs(21);
    for (auto& x : xs) x = t(rng);
    const double grid = h(rng), station = h(rng);
    const auto fwd = lapse_correct(xs, grid, station);
    const auto back = lapse_correct(fwd, station, grid);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(back[i] - xs[i]) < 1e-12);
    const auto a = ensemble_stats(xs), b = ensemble_stats(fwd);
    CHECK(b.mean - a.mean == Approx(0.006 * (grid - station)).epsilon(1e-9));
    CHECK(b.std == Approx(a.std).epsilon(1e-12));
  }
}

TEST_CASE("TPI at simple shapes") {
  const auto flat = grid_of(3, 3, [](int, int) { return 700.0; });
  CHECK(tpi(flat, 1, 1) == 0.0);
  const auto peak = grid_of(3, 3, [](int r, int c) { return r == 1 && c == 1 ? 1000.0 : 500.0; });
  CHECK(tpi(peak, 1, 1) == 500.0);
  const auto valley = grid_of(3, 3, [](int r, int c) { return r == 1 && c == 1 ? 500.0 : 1000.0; });
  CHECK(tpi(valley, 1, 1) == -500.0);
}

TEST_CASE("TPI is undefined at the border and next to nodata") {
  auto g = grid_of(4, 4, [](int r, int c) { return r == 0 && c == 0 ? -9999.0 : 100.0 * r; });
  CHECK_THROWS_AS(tpi(g, 0, 2), UndefinedTpi);
  CHECK_THROWS_AS(tpi(g, 3, 1), UndefinedTpi);
  CHECK_THROWS_AS(tpi(g, 1, 1), UndefinedTpi);
  CHECK_NOTHROW(tpi(g, 2, 2));
}

TEST_CASE("TPI of a plane vanishes") {
  const auto plane = grid_of(20, 30, [](int r, int c) { return 3.7 * c - 12.1 * r + 950.0; }, 25.0);
  for (int r = 1; r < 19; ++r)
    for (int c = 1; c < 29; ++c) CHECK(std::abs(tpi(plane, r, c)) < 1e-9);
}

TEST_CASE("summed TPI matches a brute-force neighbourhood loop") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 3000.0);
  const int rows = 15, cols = 11;
  std::vector<std::vector<double>> z(rows, std::vector<double>(cols));
  for (auto& row : z)
    for (auto& v : row) v = u(rng);
  const auto g = grid_of(rows, cols, [&](int r, int c) { return z[r][c]; });
  double sum_tpi = 0.0, sum_values = 0.0, sum_filter = 0.0;
  for (int r = 1; r < rows - 1; ++r) {
    for (int c = 1; c < cols - 1; ++c) {
      sum_tpi += tpi(g, r, c);
      sum_values += z[r][c];
      double ring = 0.0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc)
          if (dr || dc) ring += z[r + dr][c + dc];
      sum_filter += ring / 8.0;
    }
  }
  CHECK(sum_tpi == Approx(sum_values - sum_filter).epsilon(1e-12));
}

TEST_CASE("stations map to cells by half-open extents") {
  // 5 x 5 grid with unit cells and origin (10, 20); row 0 is the northern edge.
  const auto cone = grid_of(5, 5, [](int r, int c) {
    return 1000.0 - 100.0 * std::hypot(r - 2.0, c - 2.0);
  }, 1.0, 10.0, 20.0);
  CHECK(tpi_at_station(cone, at(12.5, 22.5)) > 0.0);
  const auto flat = grid_of(5, 5, [](int, int) { return 100.0; }, 1.0, 10.0, 20.0);
  CHECK(tpi_at_station(flat, at(12.5, 22.5)) == 0.0);

  CHECK(cone.cell_of(12.0, 22.0) == std::make_pair(2, 2));
  CHECK(cone.cell_of(11.999999, 21.999999) == std::make_pair(3, 1));
  CHECK(cone.cell_of(10.0, 20.0) == std::make_pair(4, 0));
  CHECK_FALSE(cone.cell_of(15.0, 22.0).has_value());
  CHECK_FALSE(cone.cell_of(9.99, 22.0).has_value());
  CHECK_THROWS_AS(tpi_at_station(cone, at(30.0, 22.0)), UndefinedTpi);

  // A point on an interior edge belongs to the cell starting at that edge.
  const auto fine = grid_of(10, 10, [](int, int) { return 0.0; }, 0.25, 0.0, 0.0);
  CHECK(fine.cell_of(0.5, 0.75) == std::make_pair(6, 2));
  CHECK(fine.cell_of(0.4999, 0.7499) == std::make_pair(7, 1));
}

TEST_CASE("ESRI ASCII grids round-trip") {
  const auto g = grid_of(3, 4, [](int r, int c) { return r == 1 && c == 2 ? -9999.0 : 10.5 * r + c; },
                         0.25, 5.5, 45.75);
  std::ostringstream out;
  write_esri_ascii(out, g);
  std::istringstream in(out.str());
  const auto back = read_esri_ascii(in);
  CHECK(back.rows() == 3);
  CHECK(back.cols() == 4);
  CHECK(back.cell_size() == 0.25);
  CHECK(back.x_origin() == 5.5);
  CHECK(back.y_origin() == 45.75);
  CHECK(back.nodata() == -9999.0);
  CHECK(back.is_nodata(1, 2));
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) CHECK(back.at(r, c) == g.at(r, c));
}

TEST_CASE("ESRI ASCII header variants and errors") {
  std::istringstream centered(
      "NCOLS 2\nNROWS 2\nXLLCENTER 0.5\nYLLCENTER 0.5\nCELLSIZE 1\n1 2\n3 4\n");
  const auto g = read_esri_ascii(centered);
  CHECK(g.x_origin() == 0.0);
  CHECK(g.y_origin() == 0.0);
  CHECK(g.at(1, 0) == 3.0);
  CHECK_FALSE(g.nodata().has_value());

  std::istringstream short_data("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3\n");
  CHECK_THROWS_AS(read_esri_ascii(short_data), SchemaError);
  std::istringstream bad_value("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 x\n");
  try {
    (void)read_esri_ascii(bad_value, "dem.asc");
    FAIL("bad value accepted");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 6);
    CHECK(e.column() == 2);
  }
  std::istringstream unknown("ncols 2\nnrows 1\nfoo 3\n");
  CHECK_THROWS_AS(read_esri_ascii(unknown), SchemaError);
  std::istringstream missing("ncols 2\nnrows 1\n1 2\n");
  CHECK_THROWS_AS(read_esri_ascii(missing), SchemaError);
}
