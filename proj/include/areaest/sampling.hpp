#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "areaest/crops.hpp"
#include "areaest/grid.hpp"

namespace areaest {

/// Sample sizes per stratum (stratum = map class code).
struct AllocationPlan {
  std::int64_t total_n = 0;
  std::map<std::int32_t, std::int64_t> prealloc;
  std::map<std::int32_t, std::int64_t> per_stratum_n;
};

inline const std::set<std::int32_t> kChangeStrata = {code(ChangeClass::gain), code(ChangeClass::loss)};

/// Pre-allocates `prealloc_per_change` to each change stratum, then splits
/// the remainder over all strata in proportion to mapped area with
/// largest-remainder rounding (ties to the lower stratum code). Strata with
/// zero area get nothing; every stratum with area receives at least 2.
AllocationPlan allocate(std::int64_t total_n, std::int64_t prealloc_per_change,
                        const std::map<std::int32_t, double>& stratum_areas,
                        const std::set<std::int32_t>& change_strata = kChangeStrata);

enum class Consensus { unanimous, majority, adjudicated, unresolved };

std::string_view consensus_name(Consensus c);
Consensus parse_consensus(std::string_view s);

struct AnnotatorLabel {
  std::string annotator;
  int year = 0;
  bool crop = false;

  friend auto operator<=>(const AnnotatorLabel&, const AnnotatorLabel&) = default;
};

struct SampleRecord {
  std::int64_t id = 0;
  GeoPoint location;
  std::int32_t stratum = 0;
  std::optional<bool> ref_2020;
  std::optional<bool> ref_2021;
  std::vector<AnnotatorLabel> annotator_labels;
  Consensus consensus = Consensus::unanimous;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

class StratumDeficitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stratified simple random sample without replacement. Each stratum draws
/// from its own RNG substream keyed by (seed, stratum), so the result is
/// independent of stratum order. Records are ordered by stratum, then pixel
/// index, and numbered from 1.
std::vector<SampleRecord> draw_sample(const ClassGrid& strata_map, const AllocationPlan& plan,
                                      std::uint64_t seed);
inline std::vector<SampleRecord> draw_sample(const ChangeMap& change_map, const AllocationPlan& plan,
                                             std::uint64_t seed) {
  return draw_sample(change_map.grid, plan, seed);
}

struct AnnotationRow {
  std::int64_t sample_id = 0;
  std::string annotator;
  int year = 0;
  bool crop = false;
};

struct AdjudicationRow {
  std::int64_t sample_id = 0;
  int year = 0;
  bool crop = false;
};

class UnknownSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Consensus labels per (sample, year): unanimous agreement, else strict
/// majority, else unresolved. An adjudication entry settles any
/// non-unanimous (sample, year). Unresolved years carry no reference label.
/// The record status is the weakest of its two years.
std::vector<SampleRecord> merge_labels(std::vector<SampleRecord> samples,
                                       const std::vector<AnnotationRow>& annotations,
                                       const std::vector<AdjudicationRow>& adjudications);

}  // namespace areaest
