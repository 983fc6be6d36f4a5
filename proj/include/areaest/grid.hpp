#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "areaest/geo.hpp"

namespace areaest {

/// Raised by the ESRI ASCII grid reader; the message names the line.
class GridParseError : public std::runtime_error {
 public:
  GridParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CellIndex {
  int row = 0;
  int col = 0;
};

/// Georeferencing for a north-up raster with square cells. Row 0 is the
/// northernmost row; (xll, yll) is the lower-left corner of the raster.
struct GridHeader {
  int ncols = 1;
  int nrows = 1;
  double xll = 0.0;
  double yll = 0.0;
  double cellsize = 1.0;
  double nodata = -9999.0;

  std::size_t size() const { return static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows); }
  GeoPoint cell_center(int row, int col) const;
  GeoPoint cell_center(std::size_t index) const;
  /// Cell containing p, or nullopt if p lies outside the raster extent.
  std::optional<CellIndex> locate(const GeoPoint& p) const;
  void validate() const;

  friend bool operator==(const GridHeader&, const GridHeader&) = default;
};

template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(GridHeader header, std::vector<T> cells) : header_(header), cells_(std::move(cells)) {
    header_.validate();
    if (cells_.size() != header_.size())
      throw std::invalid_argument("grid cell count does not match header dimensions");
  }
  Grid(GridHeader header, T fill) : Grid(header, std::vector<T>(header.size(), fill)) {}

  const GridHeader& header() const { return header_; }
  const std::vector<T>& cells() const { return cells_; }
  std::vector<T>& mutable_cells() { return cells_; }

  std::size_t size() const { return cells_.size(); }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(header_.ncols) +
           static_cast<std::size_t>(col);
  }
  const T& at(int row, int col) const { return cells_[index(row, col)]; }
  T& at(int row, int col) { return cells_[index(row, col)]; }

  T nodata_value() const { return static_cast<T>(header_.nodata); }
  bool is_nodata(std::size_t i) const { return cells_[i] == nodata_value(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  GridHeader header_;
  std::vector<T> cells_;
};

/// Small non-negative class codes (< 256) or the nodata sentinel.
using ClassGrid = Grid<std::int32_t>;
/// Finite reals or the nodata sentinel.
using RealGrid = Grid<double>;

/// Checks the ClassGrid code range and integral nodata.
void validate(const ClassGrid& grid);
/// Checks that every non-nodata value is finite.
void validate(const RealGrid& grid);

ClassGrid read_class_grid(const std::string& path);
RealGrid read_real_grid(const std::string& path);

// Class cells are written as integers (bit-exact round trip); real cells
// with 6 significant digits. Header reals use the shortest representation
// that round-trips.
void write_grid(const ClassGrid& grid, const std::string& path);
void write_grid(const RealGrid& grid, const std::string& path);

/// Membership test evaluated at pixel centers. An empty function admits all.
using PointPredicate = std::function<bool(const GeoPoint&)>;

/// Counts per class over non-nodata cells whose center satisfies `mask`.
/// Every class present anywhere in the grid gets an entry, possibly zero.
std::map<std::int32_t, std::int64_t> class_pixel_counts(const ClassGrid& grid,
                                                        const PointPredicate& mask = {});

/// Per-pixel area model in hectares.
struct PixelArea {
  enum class Mode { constant, latitude_corrected };

  Mode mode = Mode::latitude_corrected;
  double hectares_per_pixel = 0.01;
  double meters_per_degree = kMetersPerDegree;

  static PixelArea constant(double hectares) { return {Mode::constant, hectares, kMetersPerDegree}; }
  static PixelArea latitude_corrected(double meters_per_degree = kMetersPerDegree) {
    return {Mode::latitude_corrected, 0.0, meters_per_degree};
  }

  /// Area of a pixel in `row` of a raster with this header.
  double hectares(const GridHeader& header, int row) const;
};

/// Mapped area (ha) per class over in-mask, non-nodata cells.
std::map<std::int32_t, double> stratum_areas(const ClassGrid& grid, const PixelArea& pixel_area,
                                             const PointPredicate& mask = {});

}  // namespace areaest
