#include "emos/terrain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "emos/csv.hpp"

namespace emos {

std::vector<double> lapse_correct(std::span<const double> members, double grid_elevation,
                                  double station_elevation, double rate_per_100m) {
  if (!std::isfinite(grid_elevation) || !std::isfinite(station_elevation)) {
    throw InvalidInput("lapse_correct: elevations must be finite");
  }
  const double offset = rate_per_100m / 100.0 * (grid_elevation - station_elevation);
  std::vector<double> out(members.begin(), members.end());
  for (double& v : out) v += offset;
  return out;
}

ElevationGrid::ElevationGrid(int n_rows, int n_cols, double cell_size, double x_origin,
                             double y_origin, std::vector<double> values,
                             std::optional<double> nodata)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      cell_size_(cell_size),
      x_origin_(x_origin),
      y_origin_(y_origin),
      values_(std::move(values)),
      nodata_(nodata) {
  if (n_rows_ <= 0 || n_cols_ <= 0) throw InvalidInput("elevation grid: empty dimensions");
  if (!(cell_size_ > 0.0)) throw InvalidInput("elevation grid: cell size must be positive");
  if (values_.size() != static_cast<std::size_t>(n_rows_) * static_cast<std::size_t>(n_cols_)) {
    throw InvalidInput("elevation grid: value count does not match nrows * ncols");
  }
}

bool ElevationGrid::is_nodata(int row, int col) const {
  const double v = at(row, col);
  return std::isnan(v) || (nodata_ && v == *nodata_);
}

std::optional<std::pair<int, int>> ElevationGrid::cell_of(double x, double y) const {
  auto locate = [this](double coord, double origin, int count) -> std::optional<int> {
    auto k = static_cast<long long>(std::floor((coord - origin) / cell_size_));
    // Division rounding can put a point sitting on an edge into the wrong cell.
    if (origin + static_cast<double>(k + 1) * cell_size_ <= coord) ++k;
    if (origin + static_cast<double>(k) * cell_size_ > coord) --k;
    if (k < 0 || k >= count) return std::nullopt;
    return static_cast<int>(k);
  };
  const auto col = locate(x, x_origin_, n_cols_);
  const auto row_from_bottom = locate(y, y_origin_, n_rows_);
  if (!col || !row_from_bottom) return std::nullopt;
  return std::make_pair(n_rows_ - 1 - *row_from_bottom, *col);
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

ElevationGrid read_esri_ascii(std::istream& in, const std::string& source) {
  int ncols = -1, nrows = -1;
  std::optional<double> xll, yll, cellsize, nodata;
  bool x_center = false, y_center = false;
  std::size_t line_no = 0;
  std::string line;
  std::streampos data_start = in.tellg();

  // Header lines start with a keyword; the first numeric line begins the data.
  while (true) {
    data_start = in.tellg();
    if (!std::getline(in, line)) break;
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-' || key[0] == '+' ||
        key[0] == '.') {
      --line_no;
      in.clear();
      in.seekg(data_start);
      break;
    }
    double value = 0.0;
    if (!(ls >> value)) throw SchemaError(source, line_no, 2, "header value missing for " + key);
    const std::string k = lower(key);
    if (k == "ncols") ncols = static_cast<int>(value);
    else if (k == "nrows") nrows = static_cast<int>(value);
    else if (k == "xllcorner") xll = value;
    else if (k == "xllcenter") { xll = value; x_center = true; }
    else if (k == "yllcorner") yll = value;
    else if (k == "yllcenter") { yll = value; y_center = true; }
    else if (k == "cellsize") cellsize = value;
    else if (k == "nodata_value") nodata = value;
    else throw SchemaError(source, line_no, 1, "unknown header key '" + key + "'");
  }
  if (ncols <= 0 || nrows <= 0 || !xll || !yll || !cellsize) {
    throw SchemaError(source, line_no, 1, "incomplete ESRI ASCII header");
  }
  if (!(*cellsize > 0.0)) throw SchemaError(source, line_no, 1, "cellsize must be positive");
  if (x_center) *xll -= 0.5 * *cellsize;
  if (y_center) *yll -= 0.5 * *cellsize;

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows));
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    std::size_t col = 0;
    while (ls >> tok) {
      ++col;
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) {
        throw SchemaError(source, line_no, col, "expected a number, found '" + tok + "'");
      }
      values.push_back(v);
    }
  }
  if (values.size() != static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows)) {
    throw SchemaError(source, line_no, 1,
                      "expected " + std::to_string(ncols * nrows) + " values, found " +
                          std::to_string(values.size()));
  }
  return ElevationGrid(nrows, ncols, *cellsize, *xll, *yll, std::move(values), nodata);
}

ElevationGrid load_esri_ascii(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open grid file " + path);
  return read_esri_ascii(in, path);
}

void write_esri_ascii(std::ostream& out, const ElevationGrid& grid) {
  out << "ncols " << grid.cols() << '\n'
      << "nrows " << grid.rows() << '\n'
      << "xllcorner " << csv::format_real(grid.x_origin()) << '\n'
      << "yllcorner " << csv::format_real(grid.y_origin()) << '\n'
      << "cellsize " << csv::format_real(grid.cell_size()) << '\n';
  if (grid.nodata()) out << "NODATA_value " << csv::format_real(*grid.nodata()) << '\n';
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      if (c) out << ' ';
      out << csv::format_real(grid.at(r, c));
    }
    out << '\n';
  }
}

double tpi(const ElevationGrid& grid, int row, int col) {
  if (row < 1 || col < 1 || row >= grid.rows() - 1 || col >= grid.cols() - 1) {
    throw UndefinedTpi("TPI undefined at border cell (" + std::to_string(row) + ", " +
                       std::to_string(col) + ")");
  }
  if (grid.is_nodata(row, col)) throw UndefinedTpi("TPI undefined at a nodata cell");
  double sum = 0.0;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      if (grid.is_nodata(row + dr, col + dc)) {
        throw UndefinedTpi("TPI undefined next to a nodata cell");
      }
      sum += grid.at(row + dr, col + dc);
    }
  }
  return grid.at(row, col) - sum / 8.0;
}

double tpi_at_point(const ElevationGrid& grid, double x, double y) {
  const auto cell = grid.cell_of(x, y);
  if (!cell) throw UndefinedTpi("point lies outside the elevation grid");
  return tpi(grid, cell->first, cell->second);
}

double tpi_at_station(const ElevationGrid& grid, const StationMetadata& station) {
  try {
    return tpi_at_point(grid, station.longitude, station.latitude);
  } catch (const UndefinedTpi& e) {
    throw UndefinedTpi("station " + station.station_id + ": " + e.what());
  }
}

}  // namespace emos
