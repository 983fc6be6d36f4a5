#include <doctest.h>

#include <cmath>
#include <numeric>

#include "areaest/estimate.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace areaest;

namespace {

// Crop stratum (code 1) covers 30% of 1000 ha, noncrop (code 0) 70%.
ConfusionMatrix hand_fixture() {
  return ConfusionMatrix::from_counts({0, 1}, {0, 1}, {{15, 5}, {2, 28}}, {700.0, 300.0});
}

ConfusionMatrix random_square(testing::Gen& gen, std::size_t q) {
  std::vector<std::int32_t> codes(q);
  std::iota(codes.begin(), codes.end(), 0);
  std::vector<std::vector<std::int64_t>> counts(q, std::vector<std::int64_t>(q));
  std::vector<double> areas(q);
  for (std::size_t i = 0; i < q; ++i) {
    areas[i] = testing::uniform_real(gen, 1.0, 1000.0);
    for (std::size_t j = 0; j < q; ++j)
      counts[i][j] = i == j ? testing::uniform_int(gen, 1, 60) : testing::uniform_int(gen, 0, 15);
    counts[i][i] += 1;
  }
  return ConfusionMatrix::from_counts(codes, codes, counts, areas);
}

std::vector<double> weights(const ConfusionMatrix& cm) {
  std::vector<double> w;
  for (std::size_t i = 0; i < cm.rows(); ++i) w.push_back(cm.weight(i));
  return w;
}

std::vector<std::vector<double>> as_double(const ConfusionMatrix& cm) {
  std::vector<std::vector<double>> n;
  for (const auto& row : cm.counts) n.emplace_back(row.begin(), row.end());
  return n;
}

}  // namespace

TEST_CASE("hand fixture area and interval") {
  auto est = estimate_area(hand_fixture());
  const auto& crop = est.at(1);
  CHECK(crop.proportion == doctest::Approx(0.455).epsilon(1e-12));
  CHECK(crop.area_ha == doctest::Approx(455.0).epsilon(1e-12));
  CHECK(crop.se_proportion == doctest::Approx(0.0709128).epsilon(1e-6));
  CHECK(std::abs(crop.ci95_ha - 139.0) <= 1.0);
  CHECK(est.at(0).area_ha + crop.area_ha == doctest::Approx(1000.0));
  CHECK(est.n_samples == 50);
}

TEST_CASE("area estimates match the oracle") {
  testing::Gen gen(91);
  for (int trial = 0; trial < 200; ++trial) {
    auto cm = random_square(gen, static_cast<std::size_t>(testing::uniform_int(gen, 2, 5)));
    auto est = estimate_area(cm);
    auto ref = oracle::stratified(weights(cm), as_double(cm));
    for (std::size_t j = 0; j < cm.cols(); ++j) {
      REQUIRE(est.classes[j].proportion == doctest::Approx(ref.p[j]).epsilon(1e-12));
      REQUIRE(est.classes[j].se_proportion == doctest::Approx(ref.se[j]).epsilon(1e-10));
      REQUIRE(est.classes[j].ci95_ha == doctest::Approx(1.96 * cm.total_area_ha * ref.se[j]).epsilon(1e-10));
    }
  }
}

TEST_CASE("accuracy matches the oracle") {
  testing::Gen gen(92);
  for (int trial = 0; trial < 200; ++trial) {
    auto cm = random_square(gen, static_cast<std::size_t>(testing::uniform_int(gen, 2, 5)));
    auto acc = accuracy_report(cm);
    auto ref = oracle::accuracy(weights(cm), as_double(cm), cm.stratum_area_ha);
    REQUIRE(acc.overall.value == doctest::Approx(ref.oa).epsilon(1e-12));
    REQUIRE(acc.overall.se == doctest::Approx(std::sqrt(ref.v_oa)).epsilon(1e-10));
    for (std::size_t j = 0; j < cm.cols(); ++j) {
      const auto& c = acc.classes[j];
      REQUIRE(c.users->value == doctest::Approx(ref.ua[j]).epsilon(1e-12));
      REQUIRE(c.users->se == doctest::Approx(std::sqrt(ref.v_ua[j])).epsilon(1e-10));
      REQUIRE(c.producers->value == doctest::Approx(ref.pa[j]).epsilon(1e-12));
      REQUIRE(c.producers->se == doctest::Approx(std::sqrt(ref.v_pa[j])).epsilon(1e-9));
      // F1 recomputed from its parts.
      const double u = c.users->value, p = c.producers->value;
      REQUIRE(c.f1->value == doctest::Approx(2 * u * p / (u + p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("proportion matrix sums to one") {
  testing::Gen gen(93);
  for (int trial = 0; trial < 200; ++trial) {
    auto cm = random_square(gen, 4);
    double s = 0.0;
    for (const auto& row : proportion_matrix(cm))
      for (double v : row) s += v;
    REQUIRE(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("a perfect map is recovered exactly") {
  testing::Gen gen(94);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t q = 4;
    std::vector<std::int32_t> codes = {0, 1, 2, 3};
    std::vector<std::vector<std::int64_t>> counts(q, std::vector<std::int64_t>(q, 0));
    std::vector<double> areas(q);
    for (std::size_t i = 0; i < q; ++i) {
      counts[i][i] = testing::uniform_int(gen, 2, 100);
      areas[i] = testing::uniform_real(gen, 1, 1e6);
    }
    auto cm = ConfusionMatrix::from_counts(codes, codes, counts, areas);
    auto est = estimate_area(cm);
    for (std::size_t j = 0; j < q; ++j) {
      REQUIRE(est.classes[j].area_ha == doctest::Approx(cm.total_area_ha * cm.weight(j)).epsilon(1e-15));
      REQUIRE(est.classes[j].se_proportion == 0.0);
    }
  }
}

TEST_CASE("estimation needs two samples per stratum") {
  auto cm = ConfusionMatrix::from_counts({0, 1}, {0, 1}, {{5, 0}, {1, 0}}, {10.0, 10.0});
  try {
    estimate_area(cm);
    FAIL("expected infeasible");
  } catch (const EstimationInfeasibleError& e) {
    CHECK(e.stratum() == 1);
  }
  // A zero-area stratum is dropped instead.
  auto dropped = ConfusionMatrix::from_counts({0, 1}, {0, 1}, {{5, 0}, {1, 0}}, {10.0, 0.0});
  CHECK(dropped.rows() == 1);
  CHECK_NOTHROW(estimate_area(dropped));
}

TEST_CASE("confusion from sample records") {
  std::vector<SampleRecord> s;
  std::int64_t id = 1;
  // Stratum 1 (stable crop): 3 crop-crop, 1 loss. Stratum 3 (loss): 2 loss, 1 unresolved.
  for (int k = 0; k < 3; ++k) s.push_back(testing::sample(id++, 1, true, true));
  s.push_back(testing::sample(id++, 1, true, false));
  s.push_back(testing::sample(id++, 3, true, false));
  s.push_back(testing::sample(id++, 3, true, false));
  s.push_back(testing::sample(id++, 3, std::nullopt, false));
  std::map<std::int32_t, double> areas{{1, 80.0}, {3, 20.0}, {2, 0.0}};
  auto cm = build_confusion(s, Reference::change, areas);
  CHECK(cm.strata == std::vector<std::int32_t>{1, 3});
  CHECK(cm.sample_total() == 6);
  CHECK(cm.counts[0][*cm.class_index(1)] == 3);
  CHECK(cm.counts[0][*cm.class_index(3)] == 1);
  CHECK(cm.counts[1][*cm.class_index(3)] == 2);

  auto annual = estimate_annual(s, 2021, areas);
  CHECK(annual.at(1).area_ha == doctest::Approx(80.0 * 0.75));
  auto a2020 = estimate_annual(s, 2020, areas);
  CHECK(a2020.at(1).area_ha == doctest::Approx(100.0));
  CHECK_THROWS(estimate_annual(s, 2019, areas));

  auto restricted = build_confusion(s, Reference::change, {{1, 80.0}}, [](const SampleRecord& r) { return r.stratum == 1; });
  CHECK(restricted.sample_total() == 4);
}

TEST_CASE("an empty reference column gives no producer's accuracy") {
  auto cm = ConfusionMatrix::from_counts({0, 1}, {0, 1}, {{5, 0}, {3, 0}}, {10.0, 10.0});
  auto acc = accuracy_report(cm);
  CHECK_FALSE(acc.at(1).producers.has_value());
  CHECK_FALSE(acc.at(1).f1.has_value());
  CHECK(acc.at(1).users->value == 0.0);
}

TEST_CASE("round half up") {
  CHECK(round_half_up(0.575, 2) == 0.58);
  CHECK(round_half_up(0.125, 2) == 0.13);
  CHECK(round_half_up(0.124999, 2) == 0.12);
  CHECK(round_half_up(454.5, 0) == 455.0);
  CHECK(round_half_up(-0.575, 2) == -0.58);
}

TEST_CASE("binary metrics from counts") {
  auto acc = binary_accuracy({82, 28, 45, 270}, {200, 1});
  auto ref = oracle::binary(270, 28, 45, 82);
  CHECK(acc.precision.value == doctest::Approx(ref.precision));
  CHECK(acc.recall.value == doctest::Approx(ref.recall));
  CHECK(acc.f1.value == doctest::Approx(ref.f1));
  CHECK(acc.overall.value == doctest::Approx(ref.overall));
  CHECK(acc.fpr == doctest::Approx(ref.fpr));
  CHECK(acc.f1.half_width > 0.0);
  CHECK(acc.f1.half_width < 0.2);

  auto again = binary_accuracy({82, 28, 45, 270}, {200, 1});
  CHECK(again.f1.half_width == acc.f1.half_width);
  CHECK_THROWS(binary_accuracy({0, 0, 0, 0}));
  CHECK_THROWS(binary_accuracy({-1, 0, 0, 4}));
}

TEST_CASE("sample-proportional weights reduce to unweighted metrics") {
  testing::Gen gen(95);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t tp = testing::uniform_int(gen, 1, 200), fp = testing::uniform_int(gen, 1, 200);
    const std::int64_t fn = testing::uniform_int(gen, 1, 200), tn = testing::uniform_int(gen, 1, 200);
    auto cm = ConfusionMatrix::from_counts({0, 1}, {0, 1}, {{tn, fn}, {fp, tp}},
                                           {static_cast<double>(tn + fn), static_cast<double>(fp + tp)});
    auto acc = accuracy_report(cm);
    auto ref = oracle::binary(double(tn), double(fp), double(fn), double(tp));
    REQUIRE(acc.overall.value == doctest::Approx(ref.overall).epsilon(1e-12));
    REQUIRE(acc.at(1).users->value == doctest::Approx(ref.precision).epsilon(1e-12));
    REQUIRE(acc.at(1).producers->value == doctest::Approx(ref.recall).epsilon(1e-12));
    REQUIRE(acc.at(1).f1->value == doctest::Approx(ref.f1).epsilon(1e-12));
    REQUIRE(acc.at(1).tpr == doctest::Approx(ref.tpr).epsilon(1e-12));
    REQUIRE(acc.at(1).fpr == doctest::Approx(ref.fpr).epsilon(1e-12));
  }
}
