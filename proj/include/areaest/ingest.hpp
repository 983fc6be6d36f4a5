#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "areaest/crops.hpp"
#include "areaest/geo.hpp"
#include "areaest/sampling.hpp"

namespace areaest {

struct ConflictEvent {
  std::chrono::year_month_day date;
  std::string event_type;
  GeoPoint location;
  std::optional<std::string> admin_zone;
};

/// Inclusive on both ends.
struct DateRange {
  std::chrono::year_month_day first;
  std::chrono::year_month_day last;
};

struct SkippedRow {
  std::size_t line = 0;
  std::string reason;
};

struct EventLoad {
  std::vector<ConflictEvent> events;
  std::vector<SkippedRow> skipped;
  std::int64_t excluded = 0;  // rows dropped by type or date filter
  std::map<std::string, std::int64_t> tally;  // kept events per event_type
};

inline const std::set<std::string> kDefaultExcludedEventTypes = {"Peaceful protest", "Peaceful protests"};

/// Parses YYYY-MM-DD.
std::optional<std::chrono::year_month_day> parse_date(std::string_view s);

/// Loads an ACLED-style event CSV. Exclusions match event_type, or
/// sub_event_type when that column exists, case-insensitively. Malformed
/// rows are skipped and reported, never fatal.
EventLoad load_events(const std::string& path,
                      const std::set<std::string>& exclude_types = kDefaultExcludedEventTypes,
                      const std::optional<DateRange>& date_range = std::nullopt);

/// Counts events per zone by polygon membership; events in no zone are
/// tallied under "unassigned".
std::map<std::string, std::int64_t> events_per_zone(const std::vector<ConflictEvent>& events,
                                                    const std::vector<NamedRegion>& zones);

std::vector<GeoPoint> event_locations(const std::vector<ConflictEvent>& events);

// Sample, label and point files. Labels are "crop"/"noncrop" (1/0 also
// accepted); an empty reference field means no label.
std::vector<SampleRecord> read_samples_csv(const std::string& path);
void write_samples_csv(const std::vector<SampleRecord>& samples, const std::string& path);
std::vector<AnnotationRow> read_annotations_csv(const std::string& path);
std::vector<AdjudicationRow> read_adjudications_csv(const std::string& path);
/// `lon,lat,label` test points.
std::vector<LabeledPoint> read_points_csv(const std::string& path);

}  // namespace areaest
