#include "areaest/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace areaest {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string six_digits(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  return std::string(buf, ptr);
}

struct RawGrid {
  GridHeader header;
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> row_lines;
  std::string text;
};

// Reads the header and tokenizes the data rows. Token views point into
// `text`, so the returned object must not be copied.
void read_raw(const std::string& path, RawGrid& raw) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  raw.text = ss.str();

  std::vector<std::pair<std::size_t, std::string_view>> lines;
  {
    std::string_view all(raw.text);
    std::size_t line_no = 1;
    std::size_t pos = 0;
    while (pos < all.size()) {
      std::size_t end = all.find('\n', pos);
      if (end == std::string_view::npos) end = all.size();
      std::string_view line = all.substr(pos, end - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.emplace_back(line_no++, line);
      pos = end + 1;
    }
  }

  std::optional<int> ncols, nrows;
  std::optional<double> xll, yll, cellsize, nodata;
  bool xcenter = false, ycenter = false;
  std::size_t li = 0;
  for (; li < lines.size(); ++li) {
    const auto [line_no, line] = lines[li];
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (!std::isalpha(static_cast<unsigned char>(tokens[0][0]))) break;
    if (tokens.size() != 2) throw GridParseError(path, line_no, "malformed header line");
    const std::string key = lower(tokens[0]);
    double value = 0.0;
    if (!parse_number(tokens[1], value))
      throw GridParseError(path, line_no, "malformed header value for '" + std::string(tokens[0]) + "'");
    auto as_int = [&](std::optional<int>& slot) {
      if (value != std::floor(value) || value < 1 || value > 1e9)
        throw GridParseError(path, line_no, "'" + key + "' must be a positive integer");
      slot = static_cast<int>(value);
    };
    if (key == "ncols") {
      as_int(ncols);
    } else if (key == "nrows") {
      as_int(nrows);
    } else if (key == "xllcorner") {
      xll = value;
    } else if (key == "yllcorner") {
      yll = value;
    } else if (key == "xllcenter") {
      xll = value;
      xcenter = true;
    } else if (key == "yllcenter") {
      yll = value;
      ycenter = true;
    } else if (key == "cellsize") {
      cellsize = value;
    } else if (key == "nodata_value") {
      nodata = value;
    } else {
      throw GridParseError(path, line_no, "unknown header key '" + std::string(tokens[0]) + "'");
    }
  }
  const std::size_t header_end_line = li < lines.size() ? lines[li].first : lines.size() + 1;
  if (!ncols || !nrows || !xll || !yll || !cellsize)
    throw GridParseError(path, header_end_line, "incomplete header");
  if (!(*cellsize > 0.0) || !std::isfinite(*cellsize))
    throw GridParseError(path, header_end_line, "cellsize must be positive");

  GridHeader& h = raw.header;
  h.ncols = *ncols;
  h.nrows = *nrows;
  h.cellsize = *cellsize;
  h.xll = xcenter ? *xll - *cellsize / 2.0 : *xll;
  h.yll = ycenter ? *yll - *cellsize / 2.0 : *yll;
  h.nodata = nodata.value_or(-9999.0);

  for (; li < lines.size(); ++li) {
    const auto [line_no, line] = lines[li];
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (raw.rows.size() == static_cast<std::size_t>(h.nrows))
      throw GridParseError(path, line_no, "more data rows than nrows");
    if (tokens.size() != static_cast<std::size_t>(h.ncols)) {
      throw GridParseError(path, line_no,
                           "row " + std::to_string(raw.rows.size()) + " has " +
                               std::to_string(tokens.size()) + " values, expected " +
                               std::to_string(h.ncols));
    }
    raw.rows.push_back(std::move(tokens));
    raw.row_lines.push_back(line_no);
  }
  if (raw.rows.size() != static_cast<std::size_t>(h.nrows)) {
    throw GridParseError(path, lines.size() + 1,
                         "expected " + std::to_string(h.nrows) + " data rows, found " +
                             std::to_string(raw.rows.size()));
  }
}

template <typename T, typename Format>
void write_impl(const Grid<T>& grid, const std::string& path, std::string nodata_token, Format fmt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write grid file: " + path);
  const GridHeader& h = grid.header();
  out << "ncols " << h.ncols << '\n'
      << "nrows " << h.nrows << '\n'
      << "xllcorner " << shortest(h.xll) << '\n'
      << "yllcorner " << shortest(h.yll) << '\n'
      << "cellsize " << shortest(h.cellsize) << '\n'
      << "NODATA_value " << nodata_token << '\n';
  std::string line;
  for (int r = 0; r < h.nrows; ++r) {
    line.clear();
    for (int c = 0; c < h.ncols; ++c) {
      if (c) line += ' ';
      const std::size_t i = grid.index(r, c);
      line += grid.is_nodata(i) ? nodata_token : fmt(grid.cells()[i]);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("error while writing grid file: " + path);
}

}  // namespace

GeoPoint GridHeader::cell_center(int row, int col) const {
  return {xll + (col + 0.5) * cellsize, yll + (nrows - 1 - row + 0.5) * cellsize};
}

GeoPoint GridHeader::cell_center(std::size_t index) const {
  const auto n = static_cast<std::size_t>(ncols);
  return cell_center(static_cast<int>(index / n), static_cast<int>(index % n));
}

std::optional<CellIndex> GridHeader::locate(const GeoPoint& p) const {
  const double fx = (p.lon - xll) / cellsize;
  const double fy = (yll + nrows * cellsize - p.lat) / cellsize;
  if (!(fx >= 0.0) || !(fy >= 0.0) || fx >= ncols || fy >= nrows) return std::nullopt;
  return CellIndex{static_cast<int>(fy), static_cast<int>(fx)};
}

void GridHeader::validate() const {
  if (ncols < 1 || nrows < 1) throw std::invalid_argument("grid dimensions must be positive");
  if (!(cellsize > 0.0) || !std::isfinite(cellsize)) throw std::invalid_argument("cellsize must be positive");
  if (!std::isfinite(xll) || !std::isfinite(yll)) throw std::invalid_argument("grid origin must be finite");
}

void validate(const ClassGrid& grid) {
  const double nd = grid.header().nodata;
  if (nd != std::floor(nd) || std::abs(nd) > 2147483647.0)
    throw std::invalid_argument("class grid nodata must be an integer");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.is_nodata(i)) continue;
    const auto v = grid.cells()[i];
    if (v < 0 || v > 255) throw std::invalid_argument("class code out of range [0,255]: " + std::to_string(v));
  }
}

void validate(const RealGrid& grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.is_nodata(i) && !std::isfinite(grid.cells()[i]))
      throw std::invalid_argument("real grid contains a non-finite value");
  }
}

ClassGrid read_class_grid(const std::string& path) {
  RawGrid raw;
  read_raw(path, raw);
  const GridHeader& h = raw.header;
  if (h.nodata != std::floor(h.nodata))
    throw GridParseError(path, 6, "class grid nodata must be an integer");
  const auto nodata = static_cast<std::int32_t>(h.nodata);
  std::vector<std::int32_t> cells;
  cells.reserve(h.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    for (auto tok : raw.rows[r]) {
      std::int32_t v = 0;
      if (!parse_number(tok, v)) {
        double d = 0.0;
        if (!parse_number(tok, d) || d != std::floor(d))
          throw GridParseError(path, raw.row_lines[r], "non-integer cell value '" + std::string(tok) + "'");
        v = static_cast<std::int32_t>(d);
      }
      if (v != nodata && (v < 0 || v > 255))
        throw GridParseError(path, raw.row_lines[r], "class code out of range: " + std::string(tok));
      cells.push_back(v);
    }
  }
  return ClassGrid(h, std::move(cells));
}

RealGrid read_real_grid(const std::string& path) {
  RawGrid raw;
  read_raw(path, raw);
  std::vector<double> cells;
  cells.reserve(raw.header.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    for (auto tok : raw.rows[r]) {
      double v = 0.0;
      if (!parse_number(tok, v) || !std::isfinite(v))
        throw GridParseError(path, raw.row_lines[r], "non-numeric cell value '" + std::string(tok) + "'");
      cells.push_back(v);
    }
  }
  return RealGrid(raw.header, std::move(cells));
}

void write_grid(const ClassGrid& grid, const std::string& path) {
  validate(grid);
  const std::string nodata = std::to_string(static_cast<long long>(grid.header().nodata));
  write_impl(grid, path, nodata, [](std::int32_t v) { return std::to_string(v); });
}

void write_grid(const RealGrid& grid, const std::string& path) {
  validate(grid);
  write_impl(grid, path, shortest(grid.header().nodata), six_digits);
}

std::map<std::int32_t, std::int64_t> class_pixel_counts(const ClassGrid& grid, const PointPredicate& mask) {
  std::map<std::int32_t, std::int64_t> counts;
  const GridHeader& h = grid.header();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.is_nodata(i)) continue;
    auto& slot = counts[grid.cells()[i]];
    if (!mask || mask(h.cell_center(i))) ++slot;
  }
  return counts;
}

double PixelArea::hectares(const GridHeader& header, int row) const {
  if (mode == Mode::constant) return hectares_per_pixel;
  const double lat = header.cell_center(row, 0).lat;
  const double side = header.cellsize * meters_per_degree;
  return side * side * std::cos(lat * std::numbers::pi / 180.0) / 10'000.0;
}

std::map<std::int32_t, double> stratum_areas(const ClassGrid& grid, const PixelArea& pixel_area,
                                             const PointPredicate& mask) {
  if (pixel_area.mode == PixelArea::Mode::constant && !(pixel_area.hectares_per_pixel > 0.0))
    throw std::invalid_argument("pixel area must be positive");
  std::map<std::int32_t, double> areas;
  if (pixel_area.mode == PixelArea::Mode::constant) {
    for (const auto& [code, n] : class_pixel_counts(grid, mask))
      areas[code] = static_cast<double>(n) * pixel_area.hectares_per_pixel;
    return areas;
  }
  const GridHeader& h = grid.header();
  // Pixel area varies only by row: count per row, then weight.
  std::map<std::int32_t, std::int64_t> row_counts;
  for (int r = 0; r < h.nrows; ++r) {
    row_counts.clear();
    for (int c = 0; c < h.ncols; ++c) {
      const std::size_t i = grid.index(r, c);
      if (grid.is_nodata(i)) continue;
      auto& slot = row_counts[grid.cells()[i]];
      if (!mask || mask(h.cell_center(r, c))) ++slot;
    }
    if (row_counts.empty()) continue;
    const double pixel = pixel_area.hectares(h, r);
    for (const auto& [code, n] : row_counts) areas[code] += static_cast<double>(n) * pixel;
  }
  return areas;
}

}  // namespace areaest
