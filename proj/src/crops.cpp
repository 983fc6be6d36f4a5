#include "areaest/crops.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace areaest {

namespace {

void require_same_header(const GridHeader& a, const GridHeader& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid headers differ");
}

void require_binary(const ClassGrid& g, const char* what) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_nodata(i)) continue;
    const auto v = g.cells()[i];
    if (v != 0 && v != 1)
      throw std::invalid_argument(std::string(what) + ": non-binary cell value " + std::to_string(v) +
                                  " at index " + std::to_string(i));
  }
}

std::size_t cell_for(const ClassGrid& grid, const GeoPoint& p) {
  const auto cell = grid.header().locate(p);
  if (!cell) {
    throw std::invalid_argument("label point (" + std::to_string(p.lon) + ", " + std::to_string(p.lat) +
                                ") is off-grid");
  }
  const std::size_t i = grid.index(cell->row, cell->col);
  if (grid.is_nodata(i)) {
    throw std::invalid_argument("label point (" + std::to_string(p.lon) + ", " + std::to_string(p.lat) +
                                ") falls on a nodata pixel");
  }
  return i;
}

double rate(std::int64_t num, std::int64_t den) {
  return den == 0 ? std::numeric_limits<double>::quiet_NaN()
                  : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::string_view change_class_name(ChangeClass c) {
  switch (c) {
    case ChangeClass::stable_noncrop: return "stable_noncrop";
    case ChangeClass::stable_crop: return "stable_crop";
    case ChangeClass::gain: return "gain";
    case ChangeClass::loss: return "loss";
  }
  return "unknown";
}

bool is_change_code(std::int32_t c) { return c >= 0 && c <= 3; }

ChangeMap compose_change(const ClassGrid& first_year, const ClassGrid& second_year) {
  require_same_header(first_year.header(), second_year.header(), "compose_change");
  require_binary(first_year, "compose_change (first year)");
  require_binary(second_year, "compose_change (second year)");

  GridHeader h = first_year.header();
  ChangeMap out{ClassGrid(h, static_cast<std::int32_t>(h.nodata)), {}};
  validate(out.grid);
  auto& cells = out.grid.mutable_cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (first_year.is_nodata(i) || second_year.is_nodata(i)) continue;
    const ChangeClass c = change_class(first_year.cells()[i] == 1, second_year.cells()[i] == 1);
    cells[i] = code(c);
    ++out.counts[static_cast<std::size_t>(code(c))];
  }
  return out;
}

void NdviStack::validate() const {
  if (months.size() != 12)
    throw std::invalid_argument("NDVI stack must have 12 monthly layers, got " + std::to_string(months.size()));
  for (std::size_t m = 1; m < months.size(); ++m) require_same_header(months[0].header(), months[m].header(), "NDVI stack");
  for (const auto& g : months) areaest::validate(g);
}

NdviStack load_ndvi_stack(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open NDVI manifest: " + manifest_path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("NDVI manifest parse error: " + std::string(e.what()));
  }
  const nlohmann::json& list = doc.is_array() ? doc : doc.at("months");
  const auto base = std::filesystem::path(manifest_path).parent_path();
  NdviStack stack;
  for (const auto& entry : list) {
    std::filesystem::path p = entry.get<std::string>();
    if (p.is_relative()) p = base / p;
    stack.months.push_back(read_real_grid(p.string()));
  }
  stack.validate();
  return stack;
}

RealGrid peak_ndvi(const NdviStack& stack) {
  stack.validate();
  const GridHeader& h = stack.months[0].header();
  RealGrid out(h, h.nodata);
  auto& cells = out.mutable_cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    bool any = false;
    double best = 0.0;
    for (const auto& month : stack.months) {
      if (month.is_nodata(i)) continue;
      const double v = month.cells()[i];
      if (!any || v > best) best = v;
      any = true;
    }
    if (any) cells[i] = best;
  }
  return out;
}

PeakStats peak_stats(const ClassGrid& crop_map, const RealGrid& peaks) {
  require_same_header(crop_map.header(), peaks.header(), "peak_stats");
  PeakStats s;
  double sum = 0.0;
  for (std::size_t i = 0; i < crop_map.size(); ++i) {
    if (crop_map.is_nodata(i) || crop_map.cells()[i] != 1 || peaks.is_nodata(i)) continue;
    sum += peaks.cells()[i];
    ++s.count;
  }
  if (s.count == 0) throw EmptyStatisticsError("no crop pixels with a valid peak NDVI");
  const auto n = static_cast<double>(s.count);
  s.mu = sum / n;
  // Corrected two-pass: the residual sum removes rounding left in the mean.
  double ss = 0.0;
  double resid = 0.0;
  for (std::size_t i = 0; i < crop_map.size(); ++i) {
    if (crop_map.is_nodata(i) || crop_map.cells()[i] != 1 || peaks.is_nodata(i)) continue;
    const double d = peaks.cells()[i] - s.mu;
    ss += d * d;
    resid += d;
  }
  s.mu += resid / n;
  s.sigma = std::sqrt(std::max(0.0, ss - resid * resid / n) / n);
  return s;
}

FilterResult apply_ndvi_filter(const ClassGrid& crop_map, const RealGrid& peaks, const FilterConfig& cfg) {
  if (!std::isfinite(cfg.n_sigma) || cfg.n_sigma < 0.0)
    throw std::invalid_argument("n_sigma must be finite and non-negative");
  require_binary(crop_map, "apply_ndvi_filter");
  FilterResult result{crop_map, 0, peak_stats(crop_map, peaks)};
  const double threshold = result.stats.mu - cfg.n_sigma * result.stats.sigma;
  auto& cells = result.filtered.mutable_cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (crop_map.is_nodata(i) || cells[i] != 1 || peaks.is_nodata(i)) continue;
    if (peaks.cells()[i] < threshold) {
      cells[i] = 0;
      ++result.reclassified;
    }
  }
  return result;
}

BinaryCounts score_binary_map(const ClassGrid& crop_map, const std::vector<LabeledPoint>& labels) {
  BinaryCounts c;
  for (const auto& label : labels) {
    const bool predicted = crop_map.cells()[cell_for(crop_map, label.location)] == 1;
    if (predicted && label.crop) ++c.tp;
    else if (predicted) ++c.fp;
    else if (label.crop) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::vector<SweepPoint> threshold_sweep(const ClassGrid& crop_map, const RealGrid& peaks,
                                        const std::vector<LabeledPoint>& labels,
                                        const std::vector<double>& thresholds) {
  for (const auto& label : labels) cell_for(crop_map, label.location);
  std::vector<SweepPoint> out;
  out.reserve(thresholds.size());
  for (double n : thresholds) {
    const FilterResult filtered = apply_ndvi_filter(crop_map, peaks, FilterConfig{n});
    SweepPoint pt;
    pt.n_sigma = n;
    pt.reclassified = filtered.reclassified;
    pt.counts = score_binary_map(filtered.filtered, labels);
    pt.tpr = rate(pt.counts.tp, pt.counts.tp + pt.counts.fn);
    pt.fpr = rate(pt.counts.fp, pt.counts.fp + pt.counts.tn);
    out.push_back(pt);
  }
  return out;
}

}  // namespace areaest
