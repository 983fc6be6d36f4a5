#include <doctest.h>

#include <cmath>

#include "areaest/grid.hpp"
#include "support.hpp"

using namespace areaest;
using testing::TempDir;

namespace {

const char* kTwoByTwo =
    "ncols 2\n"
    "nrows 2\n"
    "xllcorner 39\n"
    "yllcorner 13\n"
    "cellsize 0.5\n"
    "NODATA_value -9999\n"
    "1 0\n"
    "0 1\n";

ClassGrid two_by_two() {
  GridHeader h{2, 2, 39.0, 13.0, 0.5, -9999};
  return ClassGrid(h, std::vector<std::int32_t>{1, 0, 0, 1});
}

}  // namespace

TEST_CASE("read a 2x2 class grid") {
  TempDir dir;
  testing::write_text(dir.file("g.asc"), kTwoByTwo);
  auto g = read_class_grid(dir.file("g.asc"));
  CHECK(g.header().ncols == 2);
  CHECK(g.header().nrows == 2);
  CHECK(g.cells() == std::vector<std::int32_t>{1, 0, 0, 1});
  CHECK(g == two_by_two());
}

TEST_CASE("header keys are case-insensitive and centers are accepted") {
  TempDir dir;
  testing::write_text(dir.file("g.asc"),
                      "NCOLS 1\nNROWS 1\nXLLCENTER 0.5\nYLLCENTER 0.5\nCELLSIZE 1\nnodata_value -1\n7\n");
  auto g = read_class_grid(dir.file("g.asc"));
  CHECK(g.header().xll == 0.0);
  CHECK(g.header().yll == 0.0);
  CHECK(g.header().nodata == -1);
  CHECK(g.at(0, 0) == 7);
}

TEST_CASE("a short row is reported at its line") {
  TempDir dir;
  testing::write_text(dir.file("g.asc"),
                      "ncols 3\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n"
                      "1 1 1\n1 1 1\n1 1\n");
  try {
    read_class_grid(dir.file("g.asc"));
    FAIL("expected a parse error");
  } catch (const GridParseError& e) {
    CHECK(e.line() == 9);
    CHECK(std::string(e.what()).find(":9:") != std::string::npos);
  }
}

TEST_CASE("malformed input is rejected") {
  TempDir dir;
  const std::string head = "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n";
  testing::write_text(dir.file("a.asc"), head + "1 x\n");
  CHECK_THROWS_AS(read_class_grid(dir.file("a.asc")), GridParseError);
  testing::write_text(dir.file("b.asc"), "ncols two\n");
  CHECK_THROWS_AS(read_class_grid(dir.file("b.asc")), GridParseError);
  testing::write_text(dir.file("c.asc"), head + "1 300\n");
  CHECK_THROWS(read_class_grid(dir.file("c.asc")));
  testing::write_text(dir.file("d.asc"), head);
  CHECK_THROWS_AS(read_class_grid(dir.file("d.asc")), GridParseError);
  CHECK_THROWS(read_class_grid(dir.file("missing.asc")));
}

TEST_CASE("write then read is the identity for class grids") {
  TempDir dir;
  testing::Gen gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = testing::random_class_grid(gen, 5, 0.2);
    write_grid(g, dir.file("g.asc"));
    auto back = read_class_grid(dir.file("g.asc"));
    REQUIRE(back == g);
  }
}

TEST_CASE("reals are written with 6 significant digits") {
  TempDir dir;
  GridHeader h{2, 1, 0.0, 0.0, 1.0, -9999};
  RealGrid g(h, std::vector<double>{0.123456789, -9999});
  write_grid(g, dir.file("r.asc"));
  auto back = read_real_grid(dir.file("r.asc"));
  CHECK(back.cells()[0] == 0.123457);
  CHECK(back.is_nodata(1));
}

TEST_CASE("an all-nodata row is written as sentinels") {
  TempDir dir;
  GridHeader h{3, 2, 0.0, 0.0, 1.0, -9999};
  ClassGrid g(h, std::vector<std::int32_t>{1, 2, 3, -9999, -9999, -9999});
  write_grid(g, dir.file("g.asc"));
  auto text = testing::read_text(dir.file("g.asc"));
  CHECK(text.find("\n-9999 -9999 -9999\n") != std::string::npos);
}

TEST_CASE("header reals survive the round trip bit-exactly") {
  TempDir dir;
  GridHeader h{1, 1, 38.123456789012345, 12.987654321098765, 8.983152841195214e-05, -9999};
  ClassGrid g(h, 0);
  write_grid(g, dir.file("g.asc"));
  CHECK(read_class_grid(dir.file("g.asc")).header() == h);
}

TEST_CASE("cell centers and locate agree") {
  GridHeader h{4, 3, 10.0, 20.0, 0.5, -9999};
  auto c = h.cell_center(0, 0);
  CHECK(c.lon == 10.25);
  CHECK(c.lat == 21.25);
  CHECK(h.cell_center(2, 3).lat == 20.25);
  for (int r = 0; r < h.nrows; ++r)
    for (int col = 0; col < h.ncols; ++col) {
      auto at = h.locate(h.cell_center(r, col));
      REQUIRE(at.has_value());
      CHECK(at->row == r);
      CHECK(at->col == col);
    }
  CHECK_FALSE(h.locate({9.9, 20.5}).has_value());
  CHECK_FALSE(h.locate({10.5, 21.6}).has_value());
}

TEST_CASE("pixel counts with and without a mask") {
  auto g = two_by_two();
  auto all = class_pixel_counts(g);
  CHECK(all == std::map<std::int32_t, std::int64_t>{{0, 2}, {1, 2}});
  const double top_lat = g.header().cell_center(0, 0).lat;
  auto top = class_pixel_counts(g, [&](const GeoPoint& p) { return p.lat == top_lat; });
  CHECK(top == std::map<std::int32_t, std::int64_t>{{0, 1}, {1, 1}});
}

TEST_CASE("planted fraction is counted exactly") {
  GridHeader h{100, 100, 0.0, 0.0, 0.001, -9999};
  ClassGrid g(h, 0);
  testing::Gen gen(3);
  std::vector<std::size_t> idx(g.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), gen);
  for (std::size_t k = 0; k < 3000; ++k) g.mutable_cells()[idx[k]] = 1;
  std::int64_t brute = 0;
  for (auto v : g.cells()) brute += v == 1;
  REQUIRE(brute == 3000);
  CHECK(class_pixel_counts(g).at(1) == 3000);
}

TEST_CASE("count conservation and mask monotonicity") {
  testing::Gen gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = testing::random_class_grid(gen, 4, 0.15);
    const auto& h = g.header();
    const double cut1 = testing::uniform_real(gen, h.yll, h.yll + h.nrows * h.cellsize);
    const double cut2 = testing::uniform_real(gen, h.yll, cut1);
    auto wide = [&](const GeoPoint& p) { return p.lat >= cut2; };
    auto narrow = [&](const GeoPoint& p) { return p.lat >= cut1; };

    std::int64_t in_mask = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!g.is_nodata(i) && wide(h.cell_center(i))) ++in_mask;
    auto cw = class_pixel_counts(g, wide);
    std::int64_t sum = 0;
    for (auto [c, n] : cw) sum += n;
    REQUIRE(sum == in_mask);

    auto cn = class_pixel_counts(g, narrow);
    for (auto [c, n] : cn) REQUIRE(n <= cw[c]);
  }
}

TEST_CASE("constant pixel area") {
  auto areas = stratum_areas(two_by_two(), PixelArea::constant(0.01));
  CHECK(areas.at(0) == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(areas.at(1) == doctest::Approx(0.02).epsilon(1e-15));
  auto none = stratum_areas(two_by_two(), PixelArea::constant(0.01), [](const GeoPoint&) { return false; });
  for (auto [c, a] : none) CHECK(a == 0.0);
}

TEST_CASE("latitude-corrected area of a 10 m pixel at the equator") {
  // A pixel whose side spans 10 m of meridian arc, centered on the equator.
  const double m_per_deg = 2.0 * 3.14159265358979323846 * 6371008.8 / 360.0;
  const double cs = 10.0 / m_per_deg;
  GridHeader h{1, 1, 0.0, -cs / 2, cs, -9999};
  ClassGrid g(h, 1);
  const double expected = (cs * m_per_deg) * (cs * m_per_deg * std::cos(0.0)) / 10000.0;
  CHECK(stratum_areas(g, PixelArea::latitude_corrected()).at(1) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(std::abs(stratum_areas(g, PixelArea::latitude_corrected()).at(1) - 0.01) < 1e-6);
}

TEST_CASE("latitude-corrected areas shrink with latitude") {
  GridHeader h{1, 2, 0.0, 60.0, 0.01, -9999};
  ClassGrid g(h, std::vector<std::int32_t>{1, 2});
  auto a = stratum_areas(g, PixelArea::latitude_corrected());
  CHECK(a.at(1) < a.at(2));
  const double row_lat = h.cell_center(0, 0).lat;
  const double side = 0.01 * kMetersPerDegree;
  CHECK(a.at(1) == doctest::Approx(side * side * std::cos(row_lat * M_PI / 180) / 1e4).epsilon(1e-12));
}
