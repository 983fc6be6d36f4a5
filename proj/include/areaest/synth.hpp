#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "areaest/crops.hpp"
#include "areaest/grid.hpp"

namespace areaest {

using ClassVector = std::array<double, 4>;
using ErrorMatrix = std::array<ClassVector, 4>;

/// A synthetic landscape: truth drawn as square patches from `proportions`,
/// then each pixel mapped through row truth of `error_matrix`.
struct SynthSpec {
  int rows = 200;
  int cols = 200;
  ClassVector proportions = {0.55, 0.30, 0.08, 0.07};
  ErrorMatrix error_matrix = symmetric_confusion(0.10);
  std::uint64_t seed = 0;
  int patch_size = 5;
  double pixel_area_ha = 0.01;  // 10 m pixels

  void validate() const;
  GridHeader header() const;

  /// Diagonal 1 - rate, remaining mass spread evenly over the other classes.
  static ErrorMatrix symmetric_confusion(double rate);
};

struct SynthLandscape {
  ChangeMap truth;
  ChangeMap mapped;
};

SynthLandscape generate(const SynthSpec& spec);

struct CoverageConfig {
  std::int64_t total_n = 800;
  std::int64_t prealloc = 100;
  int reps = 500;
  std::uint64_t seed = 0;
};

struct RepEstimate {
  int rep = 0;
  bool feasible = false;
  ClassVector area_ha{};
  ClassVector ci95_ha{};
};

struct CoverageResult {
  ClassVector true_area_ha{};
  ClassVector mean_area_ha{};
  ClassVector bias_ha{};
  ClassVector relative_bias{};
  ClassVector coverage{};
  ClassVector mc_se_ha{};  // Monte Carlo standard error of the mean estimate
  int feasible_reps = 0;
  int infeasible_reps = 0;
  std::vector<RepEstimate> reps;
};

/// Repeats stratified sampling (strata = mapped classes, reference = truth)
/// and reports the bias and 95% interval coverage of the area estimator.
CoverageResult coverage_trial(const SynthSpec& spec, const CoverageConfig& cfg);

}  // namespace areaest
