#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "areaest/estimate.hpp"
#include "areaest/geo.hpp"
#include "areaest/grid.hpp"

namespace areaest {

/// A value or the reason it could not be computed.
template <typename T>
struct Outcome {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

struct WholeMap {};
struct InsideBuffer {
  MultiPolygon region;
  BufferSet buffer;
};
struct OutsideBuffer {
  MultiPolygon region;
  BufferSet buffer;
};

struct RegionSpec {
  std::string name;
  std::variant<WholeMap, MultiPolygon, InsideBuffer, OutsideBuffer> membership;

  /// Empty predicate for the whole map.
  PointPredicate predicate() const;
};

struct RegionEstimates {
  std::string name;
  std::map<std::int32_t, std::int64_t> pixel_counts;
  std::map<std::int32_t, double> stratum_areas;
  std::int64_t n_samples = 0;
  Outcome<AreaEstimate> change;
  Outcome<AreaEstimate> annual_2020;
  Outcome<AreaEstimate> annual_2021;
  Outcome<AccuracyReport> change_accuracy;
};

/// Clips the map and filters samples to each region, then runs the change
/// and both annual estimates. Failures are recorded per region.
std::vector<RegionEstimates> regional_estimates(const ClassGrid& change_map, const std::vector<SampleRecord>& samples,
                                                const std::vector<RegionSpec>& regions, const PixelArea& pixel_area);

struct ClassInterval {
  std::int32_t ref_class = 0;
  double area_ha = 0.0;
  double ci95_ha = 0.0;
  int percent_low = 0;
  int percent_high = 0;
};

/// (area - ci) and (area + ci) as a whole percent of `side_area_ha`, the
/// lower end floored at 0.
std::pair<int, int> percent_interval(double area_ha, double ci95_ha, double side_area_ha);

struct BufferSide {
  std::map<std::int32_t, std::int64_t> pixel_counts;
  std::map<std::int32_t, double> stratum_areas;
  double total_area_ha = 0.0;
  std::int64_t n_samples = 0;
  Outcome<AreaEstimate> estimate;
  Outcome<AccuracyReport> accuracy;
  std::vector<ClassInterval> intervals;
};

struct BufferComparison {
  BufferSide inside;
  BufferSide outside;
};

/// Inside = in the region and within radius_m of an event; outside = in the
/// region and beyond it. Both sides are estimated independently.
BufferComparison buffer_comparison(const ClassGrid& change_map, const std::vector<SampleRecord>& samples,
                                   const std::vector<GeoPoint>& events, double radius_m, const MultiPolygon& region,
                                   const PixelArea& pixel_area);

struct SubsampleRow {
  std::uint64_t seed = 0;
  std::optional<ClassArea> loss;
  std::optional<Metric> overall;
  std::optional<Metric> users;
  std::optional<Metric> producers;
  std::string error;
};

struct SubsampleResult {
  std::vector<SubsampleRow> rows;
  std::int64_t feasible = 0;
  double median_area_ha = 0.0;
  double median_ci95_ha = 0.0;
  double mean_area_ha = 0.0;
  double mean_ci95_ha = 0.0;
};

/// Repeatedly draws `n_sub` records uniformly without replacement from the
/// pooled sample (one substream per seed) and estimates the loss class.
SubsampleResult subsample_experiment(const std::vector<SampleRecord>& samples, std::size_t n_sub,
                                     const std::vector<std::uint64_t>& seeds,
                                     const std::map<std::int32_t, double>& stratum_areas,
                                     std::int32_t target_class = code(ChangeClass::loss));

inline const std::vector<std::uint64_t> kDefaultSubsampleSeeds = {1, 10, 100, 1000, 10000, 100000, 2, 20, 200, 2000};

struct CandidateMap {
  std::string name;
  ClassGrid grid;
  std::set<std::int32_t> crop_codes;
  std::set<std::int32_t> noncrop_codes;
};

struct MapComparison {
  std::string name;
  BinaryAccuracy accuracy;
};

/// Scores each candidate map against the labeled test points; sorted by
/// descending F1 (stable for ties).
std::vector<MapComparison> compare_maps(const std::vector<CandidateMap>& maps, const std::vector<LabeledPoint>& points,
                                        const BootstrapConfig& bootstrap = {});

}  // namespace areaest
