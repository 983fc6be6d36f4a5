#include "areaest/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "areaest/rng.hpp"

namespace areaest {

namespace {

template <typename T, typename F>
Outcome<T> attempt(F&& f) {
  Outcome<T> out;
  try {
    out.value = f();
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

SamplePredicate by_location(const PointPredicate& pred) {
  if (!pred) return {};
  return [pred](const SampleRecord& s) { return pred(s.location); };
}

std::int64_t count_samples(const std::vector<SampleRecord>& samples, const PointPredicate& pred) {
  if (!pred) return static_cast<std::int64_t>(samples.size());
  return std::count_if(samples.begin(), samples.end(), [&](const SampleRecord& s) { return pred(s.location); });
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

BufferSide estimate_side(const ClassGrid& change_map, const std::vector<SampleRecord>& samples,
                         const PointPredicate& pred, const PixelArea& pixel_area) {
  BufferSide side;
  side.pixel_counts = class_pixel_counts(change_map, pred);
  side.stratum_areas = stratum_areas(change_map, pixel_area, pred);
  for (const auto& [s, a] : side.stratum_areas) side.total_area_ha += a;
  side.n_samples = count_samples(samples, pred);
  auto cm = attempt<ConfusionMatrix>(
      [&] { return build_confusion(samples, Reference::change, side.stratum_areas, by_location(pred)); });
  if (!cm.ok()) {
    side.estimate.error = cm.error;
    side.accuracy.error = cm.error;
    return side;
  }
  side.estimate = attempt<AreaEstimate>([&] { return estimate_area(*cm.value); });
  side.accuracy = attempt<AccuracyReport>([&] { return accuracy_report(*cm.value); });
  if (side.estimate.ok()) {
    for (const auto& c : side.estimate.value->classes) {
      const auto [lo, hi] = percent_interval(c.area_ha, c.ci95_ha, side.total_area_ha);
      side.intervals.push_back({c.ref_class, c.area_ha, c.ci95_ha, lo, hi});
    }
  }
  return side;
}

}  // namespace

PointPredicate RegionSpec::predicate() const {
  return std::visit(
      [](const auto& m) -> PointPredicate {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, WholeMap>) {
          return {};
        } else if constexpr (std::is_same_v<M, MultiPolygon>) {
          return [m](const GeoPoint& p) { return in_polygon(p, m); };
        } else if constexpr (std::is_same_v<M, InsideBuffer>) {
          validate(m.buffer);
          return [m](const GeoPoint& p) { return in_polygon(p, m.region) && in_buffer(p, m.buffer); };
        } else {
          validate(m.buffer);
          return [m](const GeoPoint& p) { return region_minus_buffer(p, m.region, m.buffer); };
        }
      },
      membership);
}

std::vector<RegionEstimates> regional_estimates(const ClassGrid& change_map, const std::vector<SampleRecord>& samples,
                                                const std::vector<RegionSpec>& regions, const PixelArea& pixel_area) {
  std::vector<RegionEstimates> out;
  for (const auto& region : regions) {
    RegionEstimates r;
    r.name = region.name;
    const PointPredicate pred = region.predicate();
    r.pixel_counts = class_pixel_counts(change_map, pred);
    r.stratum_areas = stratum_areas(change_map, pixel_area, pred);
    r.n_samples = count_samples(samples, pred);
    const SamplePredicate keep = by_location(pred);
    auto cm = attempt<ConfusionMatrix>(
        [&] { return build_confusion(samples, Reference::change, r.stratum_areas, keep); });
    if (cm.ok()) {
      r.change = attempt<AreaEstimate>([&] { return estimate_area(*cm.value); });
      r.change_accuracy = attempt<AccuracyReport>([&] { return accuracy_report(*cm.value); });
    } else {
      r.change.error = r.change_accuracy.error = cm.error;
    }
    r.annual_2020 = attempt<AreaEstimate>([&] { return estimate_annual(samples, 2020, r.stratum_areas, keep); });
    r.annual_2021 = attempt<AreaEstimate>([&] { return estimate_annual(samples, 2021, r.stratum_areas, keep); });
    out.push_back(std::move(r));
  }
  return out;
}

std::pair<int, int> percent_interval(double area_ha, double ci95_ha, double side_area_ha) {
  if (!(side_area_ha > 0.0)) throw std::invalid_argument("percent interval needs a positive side area");
  const double lo = std::max(0.0, (area_ha - ci95_ha) / side_area_ha * 100.0);
  const double hi = std::max(0.0, (area_ha + ci95_ha) / side_area_ha * 100.0);
  return {static_cast<int>(std::lround(lo)), static_cast<int>(std::lround(hi))};
}

BufferComparison buffer_comparison(const ClassGrid& change_map, const std::vector<SampleRecord>& samples,
                                   const std::vector<GeoPoint>& events, double radius_m, const MultiPolygon& region,
                                   const PixelArea& pixel_area) {
  const BufferSet buffer{events, radius_m};
  validate(buffer);
  const RegionSpec inside{"inside", InsideBuffer{region, buffer}};
  const RegionSpec outside{"outside", OutsideBuffer{region, buffer}};
  return {estimate_side(change_map, samples, inside.predicate(), pixel_area),
          estimate_side(change_map, samples, outside.predicate(), pixel_area)};
}

SubsampleResult subsample_experiment(const std::vector<SampleRecord>& samples, std::size_t n_sub,
                                     const std::vector<std::uint64_t>& seeds,
                                     const std::map<std::int32_t, double>& stratum_areas, std::int32_t target_class) {
  if (n_sub > samples.size()) {
    throw std::invalid_argument("subsample size " + std::to_string(n_sub) + " exceeds the " +
                                std::to_string(samples.size()) + " available samples");
  }
  SubsampleResult result;
  std::vector<double> areas, cis;
  for (const auto seed : seeds) {
    SubsampleRow row;
    row.seed = seed;
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = substream(seed, "subsample");
    for (std::size_t k = 0; k < n_sub; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng.below(idx.size() - k));
      std::swap(idx[k], idx[j]);
    }
    std::vector<SampleRecord> subset;
    subset.reserve(n_sub);
    for (std::size_t k = 0; k < n_sub; ++k) subset.push_back(samples[idx[k]]);

    try {
      const auto cm = build_confusion(subset, Reference::change, stratum_areas);
      row.loss = estimate_area(cm).at(target_class);
      const auto acc = accuracy_report(cm);
      row.overall = acc.overall;
      row.users = acc.at(target_class).users;
      row.producers = acc.at(target_class).producers;
      areas.push_back(row.loss->area_ha);
      cis.push_back(row.loss->ci95_ha);
      ++result.feasible;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    result.rows.push_back(std::move(row));
  }
  result.median_area_ha = median(areas);
  result.median_ci95_ha = median(cis);
  result.mean_area_ha = mean(areas);
  result.mean_ci95_ha = mean(cis);
  return result;
}

std::vector<MapComparison> compare_maps(const std::vector<CandidateMap>& maps, const std::vector<LabeledPoint>& points,
                                        const BootstrapConfig& bootstrap) {
  std::vector<MapComparison> out;
  for (const auto& m : maps) {
    BinaryCounts counts;
    for (const auto& pt : points) {
      const auto cell = m.grid.header().locate(pt.location);
      if (!cell) throw std::invalid_argument(m.name + ": test point is off-grid");
      const std::size_t i = m.grid.index(cell->row, cell->col);
      if (m.grid.is_nodata(i)) throw std::invalid_argument(m.name + ": test point falls on nodata");
      const auto v = m.grid.cells()[i];
      bool predicted;
      if (m.crop_codes.count(v)) predicted = true;
      else if (m.noncrop_codes.count(v)) predicted = false;
      else throw std::invalid_argument(m.name + ": unmapped class code " + std::to_string(v));
      if (predicted && pt.crop) ++counts.tp;
      else if (predicted) ++counts.fp;
      else if (pt.crop) ++counts.fn;
      else ++counts.tn;
    }
    out.push_back({m.name, binary_accuracy(counts, bootstrap)});
  }
  std::stable_sort(out.begin(), out.end(), [](const MapComparison& a, const MapComparison& b) {
    const double fa = std::isnan(a.accuracy.f1.value) ? -1.0 : a.accuracy.f1.value;
    const double fb = std::isnan(b.accuracy.f1.value) ? -1.0 : b.accuracy.f1.value;
    return fa > fb;
  });
  return out;
}

}  // namespace areaest
