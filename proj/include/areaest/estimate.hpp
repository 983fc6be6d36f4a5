#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "areaest/crops.hpp"
#include "areaest/sampling.hpp"

namespace areaest {

/// z for a two-sided 95% normal interval.
inline constexpr double kZ95 = 1.96;

/// Which reference label a confusion matrix is built from.
enum class Reference {
  change,     // four change classes from (ref_2020, ref_2021)
  crop_2020,  // binary: 0 = noncrop, 1 = crop
  crop_2021,
};

class EstimationInfeasibleError : public std::runtime_error {
 public:
  EstimationInfeasibleError(std::int32_t stratum, const std::string& what)
      : std::runtime_error(what), stratum_(stratum) {}
  std::int32_t stratum() const { return stratum_; }

 private:
  std::int32_t stratum_;
};

/// Sample counts n_ij with map strata as rows and reference classes as
/// columns, plus the mapped area of every stratum. Only strata with
/// positive mapped area appear as rows.
struct ConfusionMatrix {
  std::vector<std::int32_t> strata;
  std::vector<std::int32_t> ref_classes;
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<double> stratum_area_ha;
  double total_area_ha = 0.0;

  std::size_t rows() const { return strata.size(); }
  std::size_t cols() const { return ref_classes.size(); }
  std::int64_t row_total(std::size_t i) const;
  std::int64_t sample_total() const;
  double weight(std::size_t i) const { return stratum_area_ha[i] / total_area_ha; }
  std::optional<std::size_t> stratum_index(std::int32_t stratum) const;
  std::optional<std::size_t> class_index(std::int32_t ref_class) const;

  /// Builds a matrix from explicit counts; strata with zero area are dropped.
  static ConfusionMatrix from_counts(std::vector<std::int32_t> strata, std::vector<std::int32_t> ref_classes,
                                     std::vector<std::vector<std::int64_t>> counts,
                                     std::vector<double> stratum_area_ha);

  /// Throws EstimationInfeasibleError if a stratum has fewer than 2 samples.
  void require_estimable() const;
};

using SamplePredicate = std::function<bool(const SampleRecord&)>;

/// Reference class of a sample under `ref`, or nullopt if its label is
/// missing (unresolved).
std::optional<std::int32_t> reference_class(const SampleRecord& s, Reference ref);
std::vector<std::int32_t> reference_classes(Reference ref);

/// Counts included samples into a confusion matrix. Samples without the
/// needed reference label, outside `restrict`, or in zero-area strata are
/// skipped. `stratum_areas` must already be restricted the same way.
ConfusionMatrix build_confusion(const std::vector<SampleRecord>& samples, Reference ref,
                                const std::map<std::int32_t, double>& stratum_areas,
                                const SamplePredicate& restrict = {});

/// Cell (i, j) = W_i * n_ij / n_i.
std::vector<std::vector<double>> proportion_matrix(const ConfusionMatrix& cm);

struct ClassArea {
  std::int32_t ref_class = 0;
  double proportion = 0.0;
  double area_ha = 0.0;
  double se_proportion = 0.0;
  double ci95_ha = 0.0;  // half-width
};

struct AreaEstimate {
  std::vector<ClassArea> classes;
  double total_area_ha = 0.0;
  std::int64_t n_samples = 0;

  const ClassArea& at(std::int32_t ref_class) const;
};

/// Stratified estimator of class proportions and areas with standard errors.
AreaEstimate estimate_area(const ConfusionMatrix& cm);

/// Annual crop area using one year's reference labels over the change strata.
AreaEstimate estimate_annual(const std::vector<SampleRecord>& samples, int year,
                             const std::map<std::int32_t, double>& stratum_areas,
                             const SamplePredicate& restrict = {});

/// A rate with its standard error; half_width is the 95% interval half-width.
struct Metric {
  double value = 0.0;
  double se = 0.0;
  double half_width() const { return kZ95 * se; }
};

struct ClassAccuracy {
  std::int32_t ref_class = 0;
  std::optional<Metric> users;      // nullopt when the class has no stratum
  std::optional<Metric> producers;  // nullopt when the estimated class area is 0
  std::optional<Metric> f1;
  double tpr = 0.0;  // one-vs-rest on raw sample counts
  double fpr = 0.0;
};

struct AccuracyReport {
  Metric overall;
  std::vector<ClassAccuracy> classes;

  const ClassAccuracy& at(std::int32_t ref_class) const;
};

/// Area-weighted accuracy for a matrix whose strata are reference classes.
AccuracyReport accuracy_report(const ConfusionMatrix& cm);

/// A point value with a percentile-bootstrap 95% half-width.
struct BootstrapMetric {
  double value = 0.0;
  double half_width = 0.0;
};

struct BinaryAccuracy {
  BinaryCounts counts;
  BootstrapMetric precision;  // user's accuracy
  BootstrapMetric recall;     // producer's accuracy
  BootstrapMetric f1;
  BootstrapMetric overall;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct BootstrapConfig {
  int resamples = 1000;
  std::uint64_t seed = 0;
};

/// Unweighted binary metrics of a map against a test set.
BinaryAccuracy binary_accuracy(const BinaryCounts& counts, const BootstrapConfig& cfg = {});

/// Decimal round-half-up to `digits` places, robust to values like 0.575
/// that sit just below the half in binary.
double round_half_up(double x, int digits);

}  // namespace areaest
