#include "areaest/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "areaest/csv.hpp"

namespace areaest {

namespace {

bool parse_double(const std::string& s, double& out) {
  const std::string t = csv::trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc{} && ptr == t.data() + t.size() && std::isfinite(out);
}

template <typename Int>
Int parse_int(const std::string& s, const std::string& what, std::size_t line) {
  const std::string t = csv::trim(s);
  Int v{};
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw std::runtime_error("line " + std::to_string(line) + ": invalid " + what + " '" + s + "'");
  return v;
}

std::optional<bool> parse_label(const std::string& s, std::size_t line) {
  const std::string t = csv::lower(csv::trim(s));
  if (t.empty()) return std::nullopt;
  if (t == "crop" || t == "1") return true;
  if (t == "noncrop" || t == "non-crop" || t == "0") return false;
  throw std::runtime_error("line " + std::to_string(line) + ": invalid label '" + s + "'");
}

bool require_label(const std::string& s, std::size_t line) {
  auto v = parse_label(s, line);
  if (!v) throw std::runtime_error("line " + std::to_string(line) + ": missing label");
  return *v;
}

const std::string& field(const csv::Row& row, std::size_t idx) {
  static const std::string empty;
  return idx < row.fields.size() ? row.fields[idx] : empty;
}

std::vector<csv::Row> read_with_header(const std::string& path) {
  auto rows = csv::read_file(path);
  if (rows.empty()) throw csv::CsvError(path + ": empty CSV file");
  return rows;
}

std::string label_text(const std::optional<bool>& v) {
  if (!v) return "";
  return *v ? "crop" : "noncrop";
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::optional<std::chrono::year_month_day> parse_date(std::string_view s) {
  const std::string t = csv::trim(s);
  if (t.size() != 10 || t[4] != '-' || t[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto ok = [](auto r, const char* end) { return r.ec == std::errc{} && r.ptr == end; };
  if (!ok(std::from_chars(t.data(), t.data() + 4, y), t.data() + 4)) return std::nullopt;
  if (!ok(std::from_chars(t.data() + 5, t.data() + 7, m), t.data() + 7)) return std::nullopt;
  if (!ok(std::from_chars(t.data() + 8, t.data() + 10, d), t.data() + 10)) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

EventLoad load_events(const std::string& path, const std::set<std::string>& exclude_types,
                      const std::optional<DateRange>& date_range) {
  auto rows = read_with_header(path);
  const csv::Columns cols(rows.front());
  const std::size_t c_date = cols.require("event_date");
  const std::size_t c_type = cols.require("event_type");
  const std::size_t c_lat = cols.require("latitude");
  const std::size_t c_lon = cols.require("longitude");
  const auto c_sub = cols.find("sub_event_type");
  const auto c_zone = cols.find("admin2");

  std::set<std::string> excluded;
  for (const auto& t : exclude_types) excluded.insert(csv::lower(csv::trim(t)));

  EventLoad load;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != rows.front().fields.size()) {
      load.skipped.push_back({row.line, "expected " + std::to_string(rows.front().fields.size()) + " fields, found " +
                                            std::to_string(row.fields.size())});
      continue;
    }
    const auto date = parse_date(field(row, c_date));
    if (!date) {
      load.skipped.push_back({row.line, "unparseable event_date '" + field(row, c_date) + "'"});
      continue;
    }
    ConflictEvent ev;
    ev.date = *date;
    ev.event_type = csv::trim(field(row, c_type));
    if (ev.event_type.empty()) {
      load.skipped.push_back({row.line, "empty event_type"});
      continue;
    }
    if (!parse_double(field(row, c_lat), ev.location.lat) || !parse_double(field(row, c_lon), ev.location.lon) ||
        std::abs(ev.location.lat) > 90.0 || std::abs(ev.location.lon) > 180.0) {
      load.skipped.push_back({row.line, "invalid coordinates"});
      continue;
    }
    if (c_zone) {
      auto z = csv::trim(field(row, *c_zone));
      if (!z.empty()) ev.admin_zone = std::move(z);
    }
    const bool type_excluded =
        excluded.count(csv::lower(ev.event_type)) ||
        (c_sub && excluded.count(csv::lower(csv::trim(field(row, *c_sub)))));
    const bool date_excluded = date_range && (ev.date < date_range->first || ev.date > date_range->last);
    if (type_excluded || date_excluded) {
      ++load.excluded;
      continue;
    }
    ++load.tally[ev.event_type];
    load.events.push_back(std::move(ev));
  }
  return load;
}

std::map<std::string, std::int64_t> events_per_zone(const std::vector<ConflictEvent>& events,
                                                    const std::vector<NamedRegion>& zones) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& z : zones) counts[z.name];
  counts["unassigned"];
  for (const auto& ev : events) {
    auto it = std::find_if(zones.begin(), zones.end(),
                           [&](const NamedRegion& z) { return in_polygon(ev.location, z.geometry); });
    ++counts[it == zones.end() ? "unassigned" : it->name];
  }
  return counts;
}

std::vector<GeoPoint> event_locations(const std::vector<ConflictEvent>& events) {
  std::vector<GeoPoint> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.location);
  return out;
}

std::vector<SampleRecord> read_samples_csv(const std::string& path) {
  auto rows = read_with_header(path);
  const csv::Columns cols(rows.front());
  const auto c_id = cols.require("id");
  const auto c_lon = cols.require("lon");
  const auto c_lat = cols.require("lat");
  const auto c_stratum = cols.require("stratum");
  const auto c_r20 = cols.find("ref_2020");
  const auto c_r21 = cols.find("ref_2021");
  const auto c_status = cols.find("consensus_status");

  std::vector<SampleRecord> out;
  std::set<std::int64_t> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    try {
      SampleRecord rec;
      rec.id = parse_int<std::int64_t>(field(row, c_id), "id", row.line);
      if (!seen.insert(rec.id).second) throw std::runtime_error("duplicate sample id " + std::to_string(rec.id));
      if (!parse_double(field(row, c_lon), rec.location.lon) || !parse_double(field(row, c_lat), rec.location.lat))
        throw std::runtime_error("invalid coordinates");
      validate(rec.location);
      rec.stratum = parse_int<std::int32_t>(field(row, c_stratum), "stratum", row.line);
      if (c_r20) rec.ref_2020 = parse_label(field(row, *c_r20), row.line);
      if (c_r21) rec.ref_2021 = parse_label(field(row, *c_r21), row.line);
      if (c_status) rec.consensus = parse_consensus(csv::lower(csv::trim(field(row, *c_status))));
      out.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(row.line) + ": " + e.what());
    }
  }
  return out;
}

void write_samples_csv(const std::vector<SampleRecord>& samples, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "id,lon,lat,stratum,ref_2020,ref_2021,consensus_status\n";
  for (const auto& s : samples) {
    out << s.id << ',' << shortest(s.location.lon) << ',' << shortest(s.location.lat) << ',' << s.stratum << ','
        << label_text(s.ref_2020) << ',' << label_text(s.ref_2021) << ',' << consensus_name(s.consensus) << '\n';
  }
}

std::vector<AnnotationRow> read_annotations_csv(const std::string& path) {
  auto rows = read_with_header(path);
  const csv::Columns cols(rows.front());
  const auto c_id = cols.require("sample_id");
  const auto c_ann = cols.require("annotator");
  const auto c_year = cols.require("year");
  const auto c_label = cols.require("label");
  std::vector<AnnotationRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    try {
      out.push_back({parse_int<std::int64_t>(field(row, c_id), "sample_id", row.line), csv::trim(field(row, c_ann)),
                     parse_int<int>(field(row, c_year), "year", row.line), require_label(field(row, c_label), row.line)});
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
  }
  return out;
}

std::vector<AdjudicationRow> read_adjudications_csv(const std::string& path) {
  auto rows = read_with_header(path);
  const csv::Columns cols(rows.front());
  const auto c_id = cols.require("sample_id");
  const auto c_year = cols.require("year");
  const auto c_label = cols.require("label");
  std::vector<AdjudicationRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    try {
      out.push_back({parse_int<std::int64_t>(field(row, c_id), "sample_id", row.line),
                     parse_int<int>(field(row, c_year), "year", row.line), require_label(field(row, c_label), row.line)});
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
  }
  return out;
}

std::vector<LabeledPoint> read_points_csv(const std::string& path) {
  auto rows = read_with_header(path);
  const csv::Columns cols(rows.front());
  const auto c_lon = cols.require("lon");
  const auto c_lat = cols.require("lat");
  const auto c_label = cols.require("label");
  std::vector<LabeledPoint> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    LabeledPoint p;
    if (!parse_double(field(row, c_lon), p.location.lon) || !parse_double(field(row, c_lat), p.location.lat))
      throw std::runtime_error(path + ":" + std::to_string(row.line) + ": invalid coordinates");
    try {
      p.crop = require_label(field(row, c_label), row.line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace areaest
