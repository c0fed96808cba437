#pragma once

// Elevation-aware utilities: vertical correction of model output and the
// topographic position index (TPI) on an elevation raster.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emos/domain.hpp"
#include "emos/error.hpp"

namespace emos {

/// Constant temperature lapse rate, degC per 100 m.
inline constexpr double kLapseRatePer100m = 0.6;

/// Shifts each member by rate/100 * (grid_elevation - station_elevation): a grid
/// point above the station warms the forecast.
std::vector<double> lapse_correct(std::span<const double> members, double grid_elevation,
                                  double station_elevation,
                                  double rate_per_100m = kLapseRatePer100m);

/// Raised when the TPI is undefined (border cell, nodata neighbour, outside grid).
class UndefinedTpi : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Row-major raster; row 0 is the northern edge as in ESRI ASCII grids. The
/// origin is the lower-left corner of the lower-left cell.
class ElevationGrid {
 public:
  ElevationGrid() = default;
  ElevationGrid(int n_rows, int n_cols, double cell_size, double x_origin, double y_origin,
                std::vector<double> values, std::optional<double> nodata = std::nullopt);

  int rows() const noexcept { return n_rows_; }
  int cols() const noexcept { return n_cols_; }
  double cell_size() const noexcept { return cell_size_; }
  double x_origin() const noexcept { return x_origin_; }
  double y_origin() const noexcept { return y_origin_; }
  std::optional<double> nodata() const noexcept { return nodata_; }
  std::span<const double> values() const noexcept { return values_; }

  double at(int row, int col) const { return values_[index(row, col)]; }
  bool is_nodata(int row, int col) const;

  /// Cell whose half-open extent [x0 + j cs, x0 + (j+1) cs) x [y, y + cs)
  /// contains the point, or nullopt when it lies outside the grid.
  std::optional<std::pair<int, int>> cell_of(double x, double y) const;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(n_cols_) +
           static_cast<std::size_t>(col);
  }

  int n_rows_ = 0;
  int n_cols_ = 0;
  double cell_size_ = 1.0;
  double x_origin_ = 0.0;
  double y_origin_ = 0.0;
  std::vector<double> values_;
  std::optional<double> nodata_;
};

/// Reads the ESRI ASCII grid format (ncols, nrows, xllcorner|xllcenter,
/// yllcorner|yllcenter, cellsize, optional NODATA_value, then values).
ElevationGrid read_esri_ascii(std::istream& in, const std::string& source = "<stream>");
ElevationGrid load_esri_ascii(const std::string& path);
void write_esri_ascii(std::ostream& out, const ElevationGrid& grid);

/// Elevation of the cell minus the mean of its eight neighbours.
double tpi(const ElevationGrid& grid, int row, int col);

/// TPI of the cell containing (x, y).
double tpi_at_point(const ElevationGrid& grid, double x, double y);

/// TPI at the station's (longitude, latitude); the grid must use the same
/// coordinate reference as the station table.
double tpi_at_station(const ElevationGrid& grid, const StationMetadata& station);

}  // namespace emos
