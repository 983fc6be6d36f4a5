#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "areaest/grid.hpp"

namespace areaest {

enum class ChangeClass : std::int32_t {
  stable_noncrop = 0,
  stable_crop = 1,
  gain = 2,
  loss = 3,
};

inline constexpr std::array<ChangeClass, 4> kChangeClasses = {
    ChangeClass::stable_noncrop, ChangeClass::stable_crop, ChangeClass::gain, ChangeClass::loss};

constexpr std::int32_t code(ChangeClass c) { return static_cast<std::int32_t>(c); }

constexpr ChangeClass change_class(bool crop_first, bool crop_second) {
  if (crop_first) return crop_second ? ChangeClass::stable_crop : ChangeClass::loss;
  return crop_second ? ChangeClass::gain : ChangeClass::stable_noncrop;
}
constexpr bool crop_in_first_year(ChangeClass c) {
  return c == ChangeClass::stable_crop || c == ChangeClass::loss;
}
constexpr bool crop_in_second_year(ChangeClass c) {
  return c == ChangeClass::stable_crop || c == ChangeClass::gain;
}

std::string_view change_class_name(ChangeClass c);
bool is_change_code(std::int32_t code);

struct ChangeMap {
  ClassGrid grid;
  /// Pixel count per ChangeClass code.
  std::array<std::int64_t, 4> counts{};
};

/// Four-class transition map from two binary (0/1) crop maps. A nodata cell
/// in either year is nodata in the result.
ChangeMap compose_change(const ClassGrid& first_year, const ClassGrid& second_year);

/// Twelve monthly NDVI layers sharing one header.
struct NdviStack {
  std::vector<RealGrid> months;
  void validate() const;
};

/// Loads a stack from a JSON manifest: either a bare array of 12 grid paths
/// or an object with a "months" array. Relative paths resolve against the
/// manifest's directory.
NdviStack load_ndvi_stack(const std::string& manifest_path);

/// Per-pixel maximum over months, ignoring nodata; all-nodata stays nodata.
RealGrid peak_ndvi(const NdviStack& stack);

struct PeakStats {
  double mu = 0.0;
  double sigma = 0.0;  // population standard deviation
  std::int64_t count = 0;
};

class EmptyStatisticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PeakStats peak_stats(const ClassGrid& crop_map, const RealGrid& peaks);

struct FilterConfig {
  double n_sigma = 3.5;
};

struct FilterResult {
  ClassGrid filtered;
  std::int64_t reclassified = 0;
  PeakStats stats;
};

/// Reclassifies crop pixels whose peak NDVI is strictly below mu - n*sigma.
/// Statistics come from the input map in a single pass.
FilterResult apply_ndvi_filter(const ClassGrid& crop_map, const RealGrid& peaks, const FilterConfig& cfg);

struct LabeledPoint {
  GeoPoint location;
  bool crop = false;
};

struct BinaryCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const BinaryCounts&, const BinaryCounts&) = default;
};

struct SweepPoint {
  double n_sigma = 0.0;
  std::int64_t reclassified = 0;
  BinaryCounts counts;
  double tpr = 0.0;  // NaN when there are no positive labels
  double fpr = 0.0;  // NaN when there are no negative labels
};

inline const std::vector<double> kDefaultSweepThresholds = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};

/// Applies the filter at each threshold and scores the filtered map against
/// the labeled points. Throws if a label falls off-grid or on nodata.
std::vector<SweepPoint> threshold_sweep(const ClassGrid& crop_map, const RealGrid& peaks,
                                        const std::vector<LabeledPoint>& labels,
                                        const std::vector<double>& thresholds);

/// Confusion counts of a binary crop map (value 1 = crop) at labeled points.
BinaryCounts score_binary_map(const ClassGrid& crop_map, const std::vector<LabeledPoint>& labels);

}  // namespace areaest
