#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "areaest/crops.hpp"
#include "support.hpp"

using namespace areaest;

namespace {

GridHeader header(int cols, int rows) { return GridHeader{cols, rows, 39.0, 13.0, 0.001, -9999}; }

// Crop map of all-crop pixels with the given peak NDVI values.
std::pair<ClassGrid, RealGrid> peak_fixture(const std::vector<double>& peaks) {
  auto h = header(static_cast<int>(peaks.size()), 1);
  return {ClassGrid(h, 1), RealGrid(h, peaks)};
}

std::vector<LabeledPoint> random_labels(testing::Gen& gen, const GridHeader& h, int n) {
  std::vector<LabeledPoint> out;
  for (int i = 0; i < n; ++i) {
    auto c = h.cell_center(testing::uniform_int(gen, 0, h.nrows - 1), testing::uniform_int(gen, 0, h.ncols - 1));
    out.push_back({c, testing::uniform_real(gen, 0, 1) < 0.5});
  }
  return out;
}

}  // namespace

TEST_CASE("change truth table") {
  CHECK(change_class(false, false) == ChangeClass::stable_noncrop);
  CHECK(change_class(true, true) == ChangeClass::stable_crop);
  CHECK(change_class(false, true) == ChangeClass::gain);
  CHECK(change_class(true, false) == ChangeClass::loss);
  for (bool a : {false, true})
    for (bool b : {false, true}) {
      CHECK(crop_in_first_year(change_class(a, b)) == a);
      CHECK(crop_in_second_year(change_class(a, b)) == b);
    }
  CHECK(change_class_name(ChangeClass::loss) == "loss");
}

TEST_CASE("compose on a 2x2 fixture yields every class") {
  auto h = header(2, 2);
  ClassGrid first(h, std::vector<std::int32_t>{0, 1, 0, 1});
  ClassGrid second(h, std::vector<std::int32_t>{0, 1, 1, 0});
  auto change = compose_change(first, second);
  CHECK(change.grid.cells() == std::vector<std::int32_t>{0, 1, 2, 3});
  CHECK(change.counts == std::array<std::int64_t, 4>{1, 1, 1, 1});
}

TEST_CASE("compose recovers both years on random maps") {
  testing::Gen gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto h = header(50, 50);
    auto a = testing::random_binary(gen, h, 0.4);
    auto b = testing::random_binary(gen, h, 0.6);
    a.mutable_cells()[testing::uniform_int(gen, 0, 2499)] = -9999;
    auto change = compose_change(a, b);
    std::array<std::int64_t, 4> recount{};
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (a.is_nodata(i)) {
        REQUIRE(change.grid.is_nodata(i));
        continue;
      }
      auto c = static_cast<ChangeClass>(change.grid.cells()[i]);
      REQUIRE(crop_in_first_year(c) == (a.cells()[i] == 1));
      REQUIRE(crop_in_second_year(c) == (b.cells()[i] == 1));
      ++recount[change.grid.cells()[i]];
    }
    REQUIRE(recount == change.counts);
  }
}

TEST_CASE("compose rejects mismatched or non-binary maps") {
  ClassGrid a(header(2, 2), 0), b(header(3, 2), 0), c(header(2, 2), 2);
  CHECK_THROWS(compose_change(a, b));
  CHECK_THROWS(compose_change(a, c));
}

TEST_CASE("peak statistics and filter on the outlier population") {
  std::vector<double> peaks(99, 0.8);
  peaks.push_back(0.1);
  auto [crop, ndvi] = peak_fixture(peaks);
  auto stats = peak_stats(crop, ndvi);
  CHECK(stats.count == 100);
  CHECK(stats.mu == doctest::Approx(0.793).epsilon(1e-12));
  CHECK(stats.sigma == doctest::Approx(0.06964912059746341).epsilon(1e-12));

  auto result = apply_ndvi_filter(crop, ndvi, {3.5});
  CHECK(result.reclassified == 1);
  CHECK(result.filtered.cells().back() == 0);
  for (std::size_t i = 0; i + 1 < peaks.size(); ++i) CHECK(result.filtered.cells()[i] == 1);
}

TEST_CASE("uniform peaks are never filtered") {
  auto [crop, ndvi] = peak_fixture(std::vector<double>(20, 0.6));
  auto result = apply_ndvi_filter(crop, ndvi, {0.0});
  CHECK(result.stats.sigma == 0.0);
  CHECK(result.reclassified == 0);
}

TEST_CASE("filter leaves noncrop pixels alone and needs crop") {
  auto h = header(3, 1);
  ClassGrid crop(h, std::vector<std::int32_t>{0, 1, 1});
  RealGrid ndvi(h, std::vector<double>{0.0, 0.5, 0.7});
  auto r = apply_ndvi_filter(crop, ndvi, {0.5});
  CHECK(r.filtered.cells()[0] == 0);
  CHECK(r.stats.count == 2);
  CHECK_THROWS_AS(peak_stats(ClassGrid(h, 0), ndvi), EmptyStatisticsError);
  CHECK_THROWS(apply_ndvi_filter(crop, ndvi, {-1.0}));
}

TEST_CASE("peak over a monthly stack") {
  testing::TempDir dir;
  auto h = header(2, 1);
  nlohmann::json paths = nlohmann::json::array();
  for (int m = 0; m < 12; ++m) {
    RealGrid g(h, std::vector<double>{0.05 * m, m == 5 ? 0.9 : -9999});
    auto name = "m" + std::to_string(m) + ".asc";
    write_grid(g, dir.file(name));
    paths.push_back(name);
  }
  testing::write_text(dir.file("stack.json"), nlohmann::json{{"months", paths}}.dump());
  auto peaks = peak_ndvi(load_ndvi_stack(dir.file("stack.json")));
  CHECK(peaks.cells()[0] == doctest::Approx(0.55));
  CHECK(peaks.cells()[1] == doctest::Approx(0.9));

  paths.erase(paths.begin());
  testing::write_text(dir.file("short.json"), paths.dump());
  CHECK_THROWS(load_ndvi_stack(dir.file("short.json")));
}

TEST_CASE("binary map scoring") {
  auto h = header(2, 2);
  ClassGrid map(h, std::vector<std::int32_t>{1, 1, 0, 0});
  std::vector<LabeledPoint> pts = {
      {h.cell_center(0, 0), true}, {h.cell_center(0, 1), false}, {h.cell_center(1, 0), true},
      {h.cell_center(1, 1), false}, {h.cell_center(1, 1), false}};
  auto c = score_binary_map(map, pts);
  CHECK(c == BinaryCounts{1, 1, 1, 2});
  CHECK_THROWS(score_binary_map(map, {{{0.0, 0.0}, true}}));
}

TEST_CASE("sweep rates are non-decreasing in the threshold") {
  testing::Gen gen(41);
  for (int trial = 0; trial < 30; ++trial) {
    auto h = header(testing::uniform_int(gen, 5, 40), testing::uniform_int(gen, 5, 40));
    auto crop = testing::random_binary(gen, h, 0.5);
    std::vector<double> v(h.size());
    for (auto& x : v) x = testing::uniform_real(gen, 0, 1) < 0.1 ? testing::uniform_real(gen, 0, 0.3)
                                                                  : testing::uniform_real(gen, 0.5, 0.9);
    RealGrid peaks(h, v);
    auto labels = random_labels(gen, h, 80);
    auto sweep = threshold_sweep(crop, peaks, labels, kDefaultSweepThresholds);
    REQUIRE(sweep.size() == kDefaultSweepThresholds.size());
    for (std::size_t i = 1; i < sweep.size(); ++i) {
      REQUIRE(sweep[i].reclassified <= sweep[i - 1].reclassified);
      REQUIRE(sweep[i].tpr >= sweep[i - 1].tpr);
      REQUIRE(sweep[i].fpr >= sweep[i - 1].fpr);
    }
  }
}
