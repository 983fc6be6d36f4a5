#include "areaest/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "areaest/crops.hpp"
#include "areaest/csv.hpp"
#include "areaest/estimate.hpp"
#include "areaest/experiments.hpp"
#include "areaest/geo.hpp"
#include "areaest/grid.hpp"
#include "areaest/ingest.hpp"
#include "areaest/report.hpp"
#include "areaest/sampling.hpp"
#include "areaest/synth.hpp"

#ifndef AREAEST_VERSION
#define AREAEST_VERSION "dev"
#endif

namespace areaest::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using report::full;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 unavailable");
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every option any subcommand may bind.
struct Options {
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::optional<double> pixel_area_ha;

  std::string map_2020, map_2021, change_map, crop_map, ndvi_manifest;
  std::string samples, labels, adjudication, events, zones, points;
  std::string reference = "change";
  std::vector<int> years;
  std::vector<std::string> maps;
  std::vector<std::string> exclude;
  std::string from, to;
  bool whole_map = false;
  std::string side = "outside";

  double radius_m = 5000.0;
  double n_sigma = 3.5;
  std::vector<double> thresholds = kDefaultSweepThresholds;
  std::int64_t total_n = 0;
  std::int64_t prealloc = 100;
  std::size_t n_sub = 219;
  std::vector<std::uint64_t> seeds = kDefaultSubsampleSeeds;
  int resamples = 1000;

  int rows = 200, cols = 200, reps = 500, patch_size = 5;
  double confusion = 0.10;
  std::vector<double> proportions = {0.55, 0.30, 0.08, 0.07};
  double synth_pixel_ha = 0.01;
};

// Tracks the inputs and outputs of one run and writes the manifest.
class Run {
 public:
  explicit Run(const Options& opts) : opts_(opts) {}

  const std::string& input(const std::string& path) {
    if (path.empty()) throw UsageError("missing required input path");
    if (!fs::is_regular_file(path)) throw UsageError("input not found: " + path);
    inputs_.push_back({{"path", path}, {"sha256", sha256_file(path)}});
    return path;
  }

  std::string path(const std::string& name) const { return (fs::path(opts_.out_dir) / name).string(); }

  void prepare() {
    std::error_code ec;
    fs::create_directories(opts_.out_dir, ec);
    if (ec) throw UsageError("cannot create output directory " + opts_.out_dir + ": " + ec.message());
  }

  void text(const std::string& name, const std::string& content) {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw UsageError("cannot write " + path(name));
    out << content;
    out.close();
    record(name);
  }

  void grid(const std::string& name, const ClassGrid& g) {
    write_grid(g, path(name));
    record(name);
  }
  void grid(const std::string& name, const RealGrid& g) {
    write_grid(g, path(name));
    record(name);
  }

  void manifest(const std::string& command, const std::vector<std::string>& args, const json& config) const {
    json m;
    m["command"] = command;
    m["argv"] = args;
    m["tool"] = "areaest";
    m["version"] = AREAEST_VERSION;
    m["seed"] = opts_.seed;
    m["config"] = config;
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    std::ofstream out(path("manifest.json"), std::ios::binary);
    if (!out) throw UsageError("cannot write manifest");
    out << m.dump(2) << '\n';
  }

  /// Registers an output that was written directly to path(name).
  void record(const std::string& name) { outputs_.push_back({{"path", name}, {"sha256", sha256_file(path(name))}}); }

 private:
  const Options& opts_;
  json inputs_ = json::array();
  json outputs_ = json::array();
};

PixelArea pixel_area(const Options& o) {
  if (o.pixel_area_ha) {
    if (!(*o.pixel_area_ha > 0)) throw UsageError("--pixel-area-ha must be positive");
    return PixelArea::constant(*o.pixel_area_ha);
  }
  return PixelArea::latitude_corrected();
}

Reference parse_reference(const std::string& s) {
  if (s == "change") return Reference::change;
  if (s == "2020") return Reference::crop_2020;
  if (s == "2021") return Reference::crop_2021;
  throw UsageError("--reference must be change, 2020 or 2021");
}

std::chrono::year_month_day date_flag(const std::string& s, const char* flag) {
  auto d = parse_date(s);
  if (!d) throw UsageError(std::string(flag) + " expects YYYY-MM-DD, got '" + s + "'");
  return *d;
}

EventLoad load_event_file(Run& run, const Options& o) {
  std::set<std::string> exclude(o.exclude.begin(), o.exclude.end());
  if (o.exclude.empty()) exclude = kDefaultExcludedEventTypes;
  if (exclude.size() == 1 && *exclude.begin() == "none") exclude.clear();
  std::optional<DateRange> range;
  if (!o.from.empty() || !o.to.empty()) {
    if (o.from.empty() || o.to.empty()) throw UsageError("--from and --to must be given together");
    range = DateRange{date_flag(o.from, "--from"), date_flag(o.to, "--to")};
  }
  return load_events(run.input(o.events), exclude, range);
}

MultiPolygon load_region(Run& run, const Options& o) {
  auto regions = read_geojson_regions(run.input(o.zones));
  if (regions.empty()) throw UsageError("no polygons in " + o.zones);
  return merge_regions(regions);
}

std::set<std::int32_t> parse_codes(const std::string& s) {
  std::set<std::int32_t> codes;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = csv::trim(tok);
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      codes.insert(v);
    } catch (const std::exception&) {
      throw UsageError("bad class code '" + tok + "'");
    }
  }
  return codes;
}

// NAME=PATH:CROP_CODES[:NONCROP_CODES]; without noncrop codes every other
// code present in the grid counts as noncrop.
CandidateMap parse_map_spec(Run& run, const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--map expects NAME=PATH:CROP[:NONCROP], got " + spec);
  std::vector<std::string> parts;
  std::stringstream ss(spec.substr(eq + 1));
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() < 2 || parts.size() > 3) throw UsageError("--map expects NAME=PATH:CROP[:NONCROP], got " + spec);
  CandidateMap m;
  m.name = spec.substr(0, eq);
  m.grid = read_class_grid(run.input(parts[0]));
  m.crop_codes = parse_codes(parts[1]);
  if (m.crop_codes.empty()) throw UsageError("--map " + m.name + " lists no crop codes");
  if (parts.size() == 3) {
    m.noncrop_codes = parse_codes(parts[2]);
  } else {
    for (const auto& [c, n] : class_pixel_counts(m.grid))
      if (!m.crop_codes.count(c)) m.noncrop_codes.insert(c);
  }
  return m;
}

std::string outcome_error(const std::string& error) { return error.empty() ? "ok" : error; }

// ---- subcommands -----------------------------------------------------------

void cmd_compose_change(Run& run, const Options& o, std::ostream& out) {
  auto first = read_class_grid(run.input(o.map_2020));
  auto second = read_class_grid(run.input(o.map_2021));
  auto change = compose_change(first, second);
  run.prepare();
  run.grid("change_map.asc", change.grid);
  std::ostringstream csv;
  csv << "class,code,pixels\n";
  for (auto c : kChangeClasses) csv << change_class_name(c) << ',' << code(c) << ',' << change.counts[code(c)] << '\n';
  run.text("change_counts.csv", csv.str());
  out << csv.str();
}

void cmd_ndvi_filter(Run& run, const Options& o, std::ostream& out) {
  auto crop = read_class_grid(run.input(o.crop_map));
  auto peaks = peak_ndvi(load_ndvi_stack(run.input(o.ndvi_manifest)));
  auto result = apply_ndvi_filter(crop, peaks, {o.n_sigma});
  run.prepare();
  run.grid("peak_ndvi.asc", peaks);
  run.grid("filtered_map.asc", result.filtered);
  std::ostringstream csv;
  csv << "mu,sigma,count,n_sigma,threshold,reclassified\n"
      << full(result.stats.mu) << ',' << full(result.stats.sigma) << ',' << result.stats.count << ','
      << full(o.n_sigma) << ',' << full(result.stats.mu - o.n_sigma * result.stats.sigma) << ','
      << result.reclassified << '\n';
  run.text("ndvi_filter.csv", csv.str());
  out << csv.str();
}

void cmd_sweep(Run& run, const Options& o, std::ostream& out) {
  auto crop = read_class_grid(run.input(o.crop_map));
  auto peaks = peak_ndvi(load_ndvi_stack(run.input(o.ndvi_manifest)));
  auto points = read_points_csv(run.input(o.points));
  auto sweep = threshold_sweep(crop, peaks, points, o.thresholds);
  std::ostringstream csv;
  csv << "n_sigma,reclassified,tp,fp,fn,tn,tpr,fpr\n";
  for (const auto& s : sweep)
    csv << full(s.n_sigma) << ',' << s.reclassified << ',' << s.counts.tp << ',' << s.counts.fp << ','
        << s.counts.fn << ',' << s.counts.tn << ',' << full(s.tpr) << ',' << full(s.fpr) << '\n';
  run.prepare();
  run.text("sweep.csv", csv.str());
  out << csv.str();
}

void cmd_design_sample(Run& run, const Options& o, std::ostream& out) {
  if (o.total_n <= 0) throw UsageError("--total-n must be positive");
  auto map = read_class_grid(run.input(o.change_map));
  auto areas = stratum_areas(map, pixel_area(o));
  auto counts = class_pixel_counts(map);
  auto plan = allocate(o.total_n, o.prealloc, areas);
  auto samples = draw_sample(map, plan, o.seed);
  std::ostringstream csv;
  csv << "stratum,pixels,area_ha,prealloc,n\n";
  for (const auto& [s, n] : plan.per_stratum_n) {
    auto pre = plan.prealloc.count(s) ? plan.prealloc.at(s) : 0;
    csv << s << ',' << counts[s] << ',' << full(areas[s]) << ',' << pre << ',' << n << '\n';
  }
  run.prepare();
  run.text("allocation.csv", csv.str());
  write_samples_csv(samples, run.path("samples.csv"));
  run.record("samples.csv");
  out << csv.str() << "drew " << samples.size() << " samples\n";
}

void cmd_merge_labels(Run& run, const Options& o, std::ostream& out) {
  auto samples = read_samples_csv(run.input(o.samples));
  auto annotations = read_annotations_csv(run.input(o.labels));
  std::vector<AdjudicationRow> adjudications;
  if (!o.adjudication.empty()) adjudications = read_adjudications_csv(run.input(o.adjudication));
  auto merged = merge_labels(std::move(samples), annotations, adjudications);
  std::map<Consensus, std::int64_t> tally;
  for (const auto& s : merged) ++tally[s.consensus];
  std::ostringstream csv;
  csv << "consensus_status,samples\n";
  for (auto c : {Consensus::unanimous, Consensus::majority, Consensus::adjudicated, Consensus::unresolved})
    csv << consensus_name(c) << ',' << tally[c] << '\n';
  run.prepare();
  write_samples_csv(merged, run.path("samples_merged.csv"));
  run.record("samples_merged.csv");
  run.text("consensus.csv", csv.str());
  out << csv.str();
}

bool strata_are_classes(const ConfusionMatrix& cm) {
  return std::all_of(cm.strata.begin(), cm.strata.end(), [&](auto s) { return cm.class_index(s).has_value(); });
}

void cmd_estimate_area(Run& run, const Options& o, std::ostream& out) {
  auto ref = parse_reference(o.reference);
  auto map = read_class_grid(run.input(o.change_map));
  auto samples = read_samples_csv(run.input(o.samples));
  auto areas = stratum_areas(map, pixel_area(o));
  auto cm = build_confusion(samples, ref, areas);
  auto est = estimate_area(cm);
  std::string md = "# Area estimate\n\n" + report::area_markdown("Estimated area", est, ref);
  run.prepare();
  run.text("area.csv", report::area_csv(est, ref));
  run.text("confusion.csv", report::confusion_csv(cm, ref));
  if (strata_are_classes(cm)) {
    auto acc = accuracy_report(cm);
    run.text("accuracy.csv", report::accuracy_csv(acc, ref));
    md += report::accuracy_markdown("Accuracy", acc, ref);
  }
  run.text("report.md", md);
  out << report::area_csv(est, ref);
}

void cmd_estimate_annual(Run& run, const Options& o, std::ostream& out) {
  auto map = read_class_grid(run.input(o.change_map));
  auto samples = read_samples_csv(run.input(o.samples));
  auto areas = stratum_areas(map, pixel_area(o));
  std::vector<int> years = o.years.empty() ? std::vector<int>{2020, 2021} : o.years;
  std::ostringstream csv;
  std::string md = "# Annual crop area\n\n";
  csv << "year,class,area_ha,ci95_ha,proportion,se_proportion\n";
  for (int year : years) {
    if (year != 2020 && year != 2021) throw UsageError("--year must be 2020 or 2021");
    auto est = estimate_annual(samples, year, areas);
    auto ref = year == 2020 ? Reference::crop_2020 : Reference::crop_2021;
    for (const auto& c : est.classes)
      csv << year << ',' << report::class_label(ref, c.ref_class) << ',' << full(c.area_ha) << ','
          << full(c.ci95_ha) << ',' << full(c.proportion) << ',' << full(c.se_proportion) << '\n';
    md += report::area_markdown(std::to_string(year), est, ref);
  }
  run.prepare();
  run.text("annual.csv", csv.str());
  run.text("report.md", md);
  out << csv.str();
}

void area_rows(std::ostringstream& csv, const std::string& prefix, const Outcome<AreaEstimate>& est, Reference ref) {
  if (!est.ok()) {
    csv << prefix << ",,,," << csv::escape(est.error) << '\n';
    return;
  }
  for (const auto& c : est.value->classes)
    csv << prefix << ',' << report::class_label(ref, c.ref_class) << ',' << full(c.area_ha) << ','
        << full(c.ci95_ha) << ",ok\n";
}

void cmd_subset(Run& run, const Options& o, std::ostream& out) {
  auto map = read_class_grid(run.input(o.change_map));
  auto samples = read_samples_csv(run.input(o.samples));
  auto zones = read_geojson_regions(run.input(o.zones));
  std::vector<RegionSpec> specs;
  if (o.whole_map) specs.push_back({"whole_map", WholeMap{}});
  for (const auto& z : zones) specs.push_back({z.name, z.geometry});
  auto results = regional_estimates(map, samples, specs, pixel_area(o));

  std::ostringstream csv, acc_csv;
  std::string md = "# Regional estimates\n\n";
  csv << "region,estimate,class,area_ha,ci95_ha,status\n";
  acc_csv << "region,class,users_accuracy,users_se,producers_accuracy,producers_se,f1,f1_se,tpr,fpr\n";
  for (const auto& r : results) {
    auto region = csv::escape(r.name);
    area_rows(csv, region + ",change", r.change, Reference::change);
    area_rows(csv, region + ",annual_2020", r.annual_2020, Reference::crop_2020);
    area_rows(csv, region + ",annual_2021", r.annual_2021, Reference::crop_2021);
    md += "## " + r.name + " (n = " + std::to_string(r.n_samples) + ")\n\n";
    if (r.change.ok()) md += report::area_markdown("Change", *r.change.value, Reference::change);
    else md += "Change estimate unavailable: " + r.change.error + "\n\n";
    if (r.annual_2020.ok()) md += report::area_markdown("Crop 2020", *r.annual_2020.value, Reference::crop_2020);
    if (r.annual_2021.ok()) md += report::area_markdown("Crop 2021", *r.annual_2021.value, Reference::crop_2021);
    if (r.change_accuracy.ok()) {
      md += report::accuracy_markdown("Change accuracy", *r.change_accuracy.value, Reference::change);
      std::istringstream lines(report::accuracy_csv(*r.change_accuracy.value, Reference::change));
      std::string line;
      std::getline(lines, line);
      while (std::getline(lines, line)) acc_csv << region << ',' << line << '\n';
    }
  }
  run.prepare();
  run.text("regions.csv", csv.str());
  run.text("regions_accuracy.csv", acc_csv.str());
  run.text("report.md", md);
  out << csv.str();
}

void cmd_buffer_compare(Run& run, const Options& o, std::ostream& out) {
  auto map = read_class_grid(run.input(o.change_map));
  auto samples = read_samples_csv(run.input(o.samples));
  auto events = load_event_file(run, o);
  auto region = load_region(run, o);
  auto cmp = buffer_comparison(map, samples, event_locations(events.events), o.radius_m, region, pixel_area(o));

  std::ostringstream csv, sides;
  std::string md = "# Buffer comparison (" + full(o.radius_m) + " m)\n\n";
  csv << "side,class,area_ha,ci95_ha,percent_low,percent_high\n";
  sides << "side,total_area_ha,n_samples,status\n";
  for (auto [name, side] : {std::pair<const char*, const BufferSide*>{"inside", &cmp.inside}, {"outside", &cmp.outside}}) {
    sides << name << ',' << full(side->total_area_ha) << ',' << side->n_samples << ','
          << csv::escape(outcome_error(side->estimate.error)) << '\n';
    for (const auto& iv : side->intervals)
      csv << name << ',' << report::class_label(Reference::change, iv.ref_class) << ',' << full(iv.area_ha) << ','
          << full(iv.ci95_ha) << ',' << iv.percent_low << ',' << iv.percent_high << '\n';
    md += "## " + std::string(name) + " (n = " + std::to_string(side->n_samples) + ")\n\n";
    if (!side->estimate.ok()) {
      md += "Estimate unavailable: " + side->estimate.error + "\n\n";
      continue;
    }
    md += "| Class | Area (kha) | Percent of side |\n|---|---|---|\n";
    for (const auto& iv : side->intervals)
      md += "| " + report::class_label(Reference::change, iv.ref_class) + " | " + report::kha(iv.area_ha) + " ± " +
            report::kha(iv.ci95_ha) + " | " + std::to_string(iv.percent_low) + "-" +
            std::to_string(iv.percent_high) + "% |\n";
    md += "\n";
    if (side->accuracy.ok()) md += report::accuracy_markdown("Accuracy", *side->accuracy.value, Reference::change);
  }
  run.prepare();
  run.text("buffer.csv", csv.str());
  run.text("buffer_sides.csv", sides.str());
  run.text("report.md", md);
  out << csv.str();
}

void cmd_subsample(Run& run, const Options& o, std::ostream& out) {
  if (o.side != "inside" && o.side != "outside") throw UsageError("--side must be inside or outside");
  auto map = read_class_grid(run.input(o.change_map));
  auto samples = read_samples_csv(run.input(o.samples));
  auto events = load_event_file(run, o);
  auto region = load_region(run, o);
  BufferSet buf{event_locations(events.events), o.radius_m};
  validate(buf);
  PointPredicate member = o.side == "inside"
                              ? PointPredicate([&](const GeoPoint& p) { return in_polygon(p, region) && in_buffer(p, buf); })
                              : PointPredicate([&](const GeoPoint& p) { return region_minus_buffer(p, region, buf); });
  std::vector<SampleRecord> pool;
  for (const auto& s : samples)
    if (member(s.location)) pool.push_back(s);
  auto areas = stratum_areas(map, pixel_area(o), member);
  auto result = subsample_experiment(pool, o.n_sub, o.seeds, areas);

  auto opt = [](const std::optional<Metric>& m) { return m ? full(m->value) + ',' + full(m->se) : std::string(","); };
  std::ostringstream csv, summary;
  csv << "seed,loss_area_ha,loss_ci95_ha,overall,overall_se,users,users_se,producers,producers_se,status\n";
  for (const auto& r : result.rows) {
    csv << r.seed << ',';
    if (r.loss) csv << full(r.loss->area_ha) << ',' << full(r.loss->ci95_ha);
    else csv << ',';
    csv << ',' << opt(r.overall) << ',' << opt(r.users) << ',' << opt(r.producers) << ','
        << csv::escape(outcome_error(r.error)) << '\n';
  }
  summary << "pool,n_sub,feasible,median_area_ha,median_ci95_ha,mean_area_ha,mean_ci95_ha\n"
          << pool.size() << ',' << o.n_sub << ',' << result.feasible << ',' << full(result.median_area_ha) << ','
          << full(result.median_ci95_ha) << ',' << full(result.mean_area_ha) << ',' << full(result.mean_ci95_ha)
          << '\n';
  std::string md = "# Subsample experiment\n\n| Statistic | Loss area (kha) |\n|---|---|\n";
  md += "| Median | " + report::kha(result.median_area_ha) + " ± " + report::kha(result.median_ci95_ha) + " |\n";
  md += "| Mean | " + report::kha(result.mean_area_ha) + " ± " + report::kha(result.mean_ci95_ha) + " |\n\n";
  md += std::to_string(result.feasible) + " of " + std::to_string(result.rows.size()) + " draws were estimable.\n";
  run.prepare();
  run.text("subsample.csv", csv.str());
  run.text("subsample_summary.csv", summary.str());
  run.text("report.md", md);
  out << summary.str();
}

void cmd_compare_maps(Run& run, const Options& o, std::ostream& out) {
  if (o.maps.empty()) throw UsageError("compare-maps needs at least one --map");
  auto points = read_points_csv(run.input(o.points));
  std::vector<CandidateMap> maps;
  for (const auto& spec : o.maps) maps.push_back(parse_map_spec(run, spec));
  auto results = compare_maps(maps, points, {o.resamples, o.seed});
  std::ostringstream csv;
  csv << "map,tn,fp,fn,tp,f1,f1_hw,overall,overall_hw,recall,recall_hw,precision,precision_hw,tpr,fpr\n";
  std::string md = "# Map comparison\n\n" + report::binary_markdown_header();
  for (const auto& r : results) {
    const auto& a = r.accuracy;
    csv << csv::escape(r.name) << ',' << a.counts.tn << ',' << a.counts.fp << ',' << a.counts.fn << ','
        << a.counts.tp << ',' << full(a.f1.value) << ',' << full(a.f1.half_width) << ',' << full(a.overall.value)
        << ',' << full(a.overall.half_width) << ',' << full(a.recall.value) << ',' << full(a.recall.half_width)
        << ',' << full(a.precision.value) << ',' << full(a.precision.half_width) << ',' << full(a.tpr) << ','
        << full(a.fpr) << '\n';
    md += report::binary_markdown_row(r.name, a);
  }
  run.prepare();
  run.text("compare_maps.csv", csv.str());
  run.text("report.md", md);
  out << csv.str();
}

std::string format_date(const std::chrono::year_month_day& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(d.year()), unsigned(d.month()), unsigned(d.day()));
  return buf;
}

void cmd_load_events(Run& run, const Options& o, std::ostream& out) {
  auto load = load_event_file(run, o);
  std::ostringstream events, types, skipped;
  events << "date,event_type,lon,lat,admin_zone\n";
  for (const auto& e : load.events)
    events << format_date(e.date) << ',' << csv::escape(e.event_type) << ',' << full(e.location.lon) << ','
           << full(e.location.lat) << ',' << csv::escape(e.admin_zone.value_or("")) << '\n';
  types << "event_type,events\n";
  for (const auto& [t, n] : load.tally) types << csv::escape(t) << ',' << n << '\n';
  skipped << "line,reason\n";
  for (const auto& s : load.skipped) skipped << s.line << ',' << csv::escape(s.reason) << '\n';
  run.prepare();
  run.text("events.csv", events.str());
  run.text("event_types.csv", types.str());
  run.text("skipped.csv", skipped.str());
  if (!o.zones.empty()) {
    auto zones = read_geojson_regions(run.input(o.zones));
    std::ostringstream per_zone;
    per_zone << "zone,events\n";
    for (const auto& [z, n] : events_per_zone(load.events, zones)) per_zone << csv::escape(z) << ',' << n << '\n';
    run.text("events_per_zone.csv", per_zone.str());
  }
  out << "kept " << load.events.size() << " events, excluded " << load.excluded << ", skipped "
      << load.skipped.size() << " malformed rows\n";
}

void cmd_simulate(Run& run, const Options& o, std::ostream& out) {
  if (o.proportions.size() != 4) throw UsageError("--proportions needs 4 values");
  SynthSpec spec;
  spec.rows = o.rows;
  spec.cols = o.cols;
  std::copy(o.proportions.begin(), o.proportions.end(), spec.proportions.begin());
  spec.error_matrix = SynthSpec::symmetric_confusion(o.confusion);
  spec.seed = o.seed;
  spec.patch_size = o.patch_size;
  spec.pixel_area_ha = o.synth_pixel_ha;
  CoverageConfig cfg;
  cfg.total_n = o.total_n > 0 ? o.total_n : 800;
  cfg.prealloc = o.prealloc;
  cfg.reps = o.reps;
  cfg.seed = o.seed;
  auto result = coverage_trial(spec, cfg);

  std::ostringstream reps, summary;
  reps << "rep,feasible,class,area_ha,ci95_ha\n";
  for (const auto& r : result.reps)
    for (auto c : kChangeClasses)
      reps << r.rep << ',' << (r.feasible ? 1 : 0) << ',' << change_class_name(c) << ','
           << full(r.area_ha[code(c)]) << ',' << full(r.ci95_ha[code(c)]) << '\n';
  summary << "class,true_area_ha,mean_area_ha,bias_ha,relative_bias,coverage,mc_se_ha\n";
  for (auto c : kChangeClasses) {
    auto k = code(c);
    summary << change_class_name(c) << ',' << full(result.true_area_ha[k]) << ',' << full(result.mean_area_ha[k])
            << ',' << full(result.bias_ha[k]) << ',' << full(result.relative_bias[k]) << ','
            << full(result.coverage[k]) << ',' << full(result.mc_se_ha[k]) << '\n';
  }
  summary << "# feasible_reps=" << result.feasible_reps << " infeasible_reps=" << result.infeasible_reps << '\n';
  run.prepare();
  run.text("simulate.csv", reps.str());
  run.text("simulate_summary.csv", summary.str());
  out << summary.str();
}

json option_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const auto* opt : sub->get_options()) {
    auto name = opt->get_name(false, true);
    if (name.empty() || name == "--help" || name == "-h") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      cfg[name] = res.size() == 1 ? json(res.front()) : json(res);
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Design-based area estimation from classified maps and reference samples", "areaest"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", AREAEST_VERSION);

  using Handler = std::function<void(Run&, const Options&, std::ostream&)>;
  std::map<CLI::App*, Handler> handlers;

  auto common = [&](CLI::App* sub, bool seeded) {
    sub->add_option("--out-dir", o.out_dir, "Directory for outputs and manifest.json")->capture_default_str();
    if (seeded) sub->add_option("--seed", o.seed, "Root seed for every random stream")->capture_default_str();
    return sub;
  };
  auto areas = [&](CLI::App* sub) { sub->add_option("--pixel-area-ha", o.pixel_area_ha, "Constant pixel area (default: latitude-corrected)"); };
  auto events = [&](CLI::App* sub) {
    sub->add_option("--events", o.events, "Conflict event CSV")->required();
    sub->add_option("--exclude", o.exclude, "Event types to drop ('none' keeps all)");
    sub->add_option("--from", o.from, "First event date, YYYY-MM-DD");
    sub->add_option("--to", o.to, "Last event date, YYYY-MM-DD");
  };

  auto* s = common(app.add_subcommand("compose-change", "Compose a four-class change map from two annual maps"), false);
  s->add_option("--map-2020", o.map_2020, "First-year binary crop map")->required();
  s->add_option("--map-2021", o.map_2021, "Second-year binary crop map")->required();
  handlers[s] = cmd_compose_change;

  s = common(app.add_subcommand("ndvi-filter", "Reclassify crop pixels with anomalously low peak NDVI"), false);
  s->add_option("--crop-map", o.crop_map, "Binary crop map")->required();
  s->add_option("--ndvi-manifest", o.ndvi_manifest, "JSON list of 12 monthly NDVI grids")->required();
  s->add_option("--n-sigma", o.n_sigma, "Threshold in standard deviations")->capture_default_str();
  handlers[s] = cmd_ndvi_filter;

  s = common(app.add_subcommand("sweep", "Score the NDVI filter over a grid of thresholds"), false);
  s->add_option("--crop-map", o.crop_map, "Binary crop map")->required();
  s->add_option("--ndvi-manifest", o.ndvi_manifest, "JSON list of 12 monthly NDVI grids")->required();
  s->add_option("--points", o.points, "Labeled points CSV (lon,lat,label)")->required();
  s->add_option("--thresholds", o.thresholds, "Thresholds in standard deviations")->capture_default_str();
  handlers[s] = cmd_sweep;

  s = common(app.add_subcommand("design-sample", "Allocate and draw a stratified random sample"), true);
  s->add_option("--change-map", o.change_map, "Stratification map")->required();
  s->add_option("--total-n", o.total_n, "Total sample size")->required();
  s->add_option("--prealloc", o.prealloc, "Samples pre-allocated to each change stratum")->capture_default_str();
  areas(s);
  handlers[s] = cmd_design_sample;

  s = common(app.add_subcommand("merge-labels", "Merge annotator labels into consensus reference labels"), false);
  s->add_option("--samples", o.samples, "Sample design CSV")->required();
  s->add_option("--labels", o.labels, "Annotations CSV (sample_id,annotator,year,label)")->required();
  s->add_option("--adjudication", o.adjudication, "Adjudications CSV (sample_id,year,label)");
  handlers[s] = cmd_merge_labels;

  s = common(app.add_subcommand("estimate-area", "Stratified area and accuracy estimates"), false);
  s->add_option("--change-map", o.change_map, "Stratification map")->required();
  s->add_option("--samples", o.samples, "Labeled samples CSV")->required();
  s->add_option("--reference", o.reference, "Reference classes: change, 2020 or 2021")->capture_default_str();
  areas(s);
  handlers[s] = cmd_estimate_area;

  s = common(app.add_subcommand("estimate-annual", "Annual crop area from one year's labels"), false);
  s->add_option("--change-map", o.change_map, "Change map used as strata")->required();
  s->add_option("--samples", o.samples, "Labeled samples CSV")->required();
  s->add_option("--year", o.years, "2020 and/or 2021 (default both)");
  areas(s);
  handlers[s] = cmd_estimate_annual;

  s = common(app.add_subcommand("subset", "Per-zone estimates over clipped maps and samples"), false);
  s->add_option("--change-map", o.change_map, "Change map")->required();
  s->add_option("--samples", o.samples, "Labeled samples CSV")->required();
  s->add_option("--zones", o.zones, "GeoJSON zones")->required();
  s->add_flag("--whole-map", o.whole_map, "Also estimate over the full map");
  areas(s);
  handlers[s] = cmd_subset;

  s = common(app.add_subcommand("buffer-compare", "Compare estimates inside and outside event buffers"), false);
  s->add_option("--change-map", o.change_map, "Change map")->required();
  s->add_option("--samples", o.samples, "Labeled samples CSV")->required();
  s->add_option("--zones", o.zones, "GeoJSON region (all features are merged)")->required();
  s->add_option("--radius-m", o.radius_m, "Buffer radius in meters")->capture_default_str();
  events(s);
  areas(s);
  handlers[s] = cmd_buffer_compare;

  s = common(app.add_subcommand("subsample-exp", "Repeated subsampling of one buffer side"), true);
  s->add_option("--change-map", o.change_map, "Change map")->required();
  s->add_option("--samples", o.samples, "Labeled samples CSV")->required();
  s->add_option("--zones", o.zones, "GeoJSON region (all features are merged)")->required();
  s->add_option("--radius-m", o.radius_m, "Buffer radius in meters")->capture_default_str();
  s->add_option("--n-sub", o.n_sub, "Subsample size")->capture_default_str();
  s->add_option("--seeds", o.seeds, "One subsample per seed")->capture_default_str();
  s->add_option("--side", o.side, "Pool to subsample: inside or outside")->capture_default_str();
  events(s);
  areas(s);
  handlers[s] = cmd_subsample;

  s = common(app.add_subcommand("compare-maps", "Rank candidate crop maps against labeled points"), true);
  s->add_option("--points", o.points, "Labeled points CSV (lon,lat,label)")->required();
  s->add_option("--map", o.maps, "NAME=PATH:CROP_CODES[:NONCROP_CODES], repeatable")->required();
  s->add_option("--resamples", o.resamples, "Bootstrap resamples")->capture_default_str();
  handlers[s] = cmd_compare_maps;

  s = common(app.add_subcommand("load-events", "Filter and tally a conflict event CSV"), false);
  events(s);
  s->add_option("--zones", o.zones, "GeoJSON zones for per-zone counts");
  handlers[s] = cmd_load_events;

  s = common(app.add_subcommand("simulate", "Monte Carlo bias and coverage on a synthetic landscape"), true);
  s->add_option("--rows", o.rows, "Landscape rows")->capture_default_str();
  s->add_option("--cols", o.cols, "Landscape columns")->capture_default_str();
  s->add_option("--reps", o.reps, "Repetitions")->capture_default_str();
  s->add_option("--total-n", o.total_n, "Sample size per repetition (default 800)");
  s->add_option("--prealloc", o.prealloc, "Samples pre-allocated to each change stratum")->capture_default_str();
  s->add_option("--confusion", o.confusion, "Symmetric map error rate")->capture_default_str();
  s->add_option("--proportions", o.proportions, "True class proportions (4 values)")->capture_default_str();
  s->add_option("--patch-size", o.patch_size, "Truth patch edge in pixels")->capture_default_str();
  s->add_option("--pixel-area-ha", o.synth_pixel_ha, "Hectares per pixel")->capture_default_str();
  handlers[s] = cmd_simulate;

  std::vector<const char*> argv{"areaest"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  auto* sub = app.get_subcommands().front();
  try {
    Run r(o);
    handlers.at(sub)(r, o, out);
    r.manifest(sub->get_name(), args, option_config(sub));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace areaest::cli
