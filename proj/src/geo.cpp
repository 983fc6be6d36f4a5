#include "areaest/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace areaest {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  const double dx = b.lon - a.lon;
  const double dy = b.lat - a.lat;
  const double cross = dx * (p.lat - a.lat) - dy * (p.lon - a.lon);
  const double len = std::hypot(dx, dy);
  if (std::abs(cross) > 1e-12 * std::max(1.0, len)) return false;
  return p.lon >= std::min(a.lon, b.lon) - 1e-12 && p.lon <= std::max(a.lon, b.lon) + 1e-12 &&
         p.lat >= std::min(a.lat, b.lat) - 1e-12 && p.lat <= std::max(a.lat, b.lat) + 1e-12;
}

// Ring without a repeated closing vertex.
std::size_t effective_size(const Ring& ring) {
  if (ring.size() > 1 && ring.front() == ring.back()) return ring.size() - 1;
  return ring.size();
}

bool on_ring(const GeoPoint& p, const Ring& ring) {
  const std::size_t n = effective_size(ring);
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (on_segment(p, ring[j], ring[i])) return true;
  }
  return false;
}

int crossings(const GeoPoint& p, const Ring& ring) {
  const std::size_t n = effective_size(ring);
  int count = 0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const GeoPoint& a = ring[i];
    const GeoPoint& b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
      if (p.lon < x) ++count;
    }
  }
  return count;
}

void validate_ring(const Ring& ring) {
  Ring distinct;
  for (const auto& v : ring) {
    validate(v);
    if (std::find(distinct.begin(), distinct.end(), v) == distinct.end()) distinct.push_back(v);
  }
  if (distinct.size() < 3) throw std::invalid_argument("polygon ring needs at least 3 distinct vertices");
}

Ring parse_ring(const nlohmann::json& coords) {
  Ring ring;
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2) throw std::runtime_error("GeoJSON: malformed position");
    ring.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

Polygon parse_polygon(const nlohmann::json& rings) {
  if (!rings.is_array() || rings.empty()) throw std::runtime_error("GeoJSON: polygon without rings");
  Polygon poly;
  poly.exterior = parse_ring(rings[0]);
  for (std::size_t i = 1; i < rings.size(); ++i) poly.holes.push_back(parse_ring(rings[i]));
  validate(poly);
  return poly;
}

MultiPolygon parse_geometry(const nlohmann::json& geom) {
  const auto type = geom.at("type").get<std::string>();
  MultiPolygon mp;
  if (type == "Polygon") {
    mp.parts.push_back(parse_polygon(geom.at("coordinates")));
  } else if (type == "MultiPolygon") {
    for (const auto& rings : geom.at("coordinates")) mp.parts.push_back(parse_polygon(rings));
  } else {
    throw std::runtime_error("GeoJSON: unsupported geometry type '" + type + "'");
  }
  return mp;
}

}  // namespace

void validate(const GeoPoint& p) {
  if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || p.lon < -180.0 || p.lon > 180.0 ||
      p.lat < -90.0 || p.lat > 90.0) {
    throw std::invalid_argument("coordinate out of range: (" + std::to_string(p.lon) + ", " +
                                std::to_string(p.lat) + ")");
  }
}

void validate(const Polygon& poly) {
  validate_ring(poly.exterior);
  for (const auto& hole : poly.holes) validate_ring(hole);
}

void validate(const BufferSet& buf) {
  if (buf.centers.empty()) throw std::invalid_argument("buffer set has no centers");
  if (!std::isfinite(buf.radius_m) || buf.radius_m <= 0.0)
    throw std::invalid_argument("buffer radius must be positive and finite");
  for (const auto& c : buf.centers) validate(c);
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

bool in_polygon(const GeoPoint& p, const Polygon& poly) {
  if (on_ring(p, poly.exterior)) return true;
  for (const auto& hole : poly.holes)
    if (on_ring(p, hole)) return true;
  int count = crossings(p, poly.exterior);
  for (const auto& hole : poly.holes) count += crossings(p, hole);
  return (count % 2) == 1;
}

bool in_polygon(const GeoPoint& p, const MultiPolygon& poly) {
  return std::any_of(poly.parts.begin(), poly.parts.end(),
                     [&](const Polygon& part) { return in_polygon(p, part); });
}

bool in_buffer(const GeoPoint& p, const BufferSet& buf) {
  // Meridional separation is a lower bound on great-circle distance.
  const double max_dlat = buf.radius_m / kMetersPerDegree * (1.0 + 1e-9);
  for (const auto& c : buf.centers) {
    if (std::abs(c.lat - p.lat) > max_dlat) continue;
    if (haversine_m(p, c) <= buf.radius_m) return true;
  }
  return false;
}

bool region_minus_buffer(const GeoPoint& p, const MultiPolygon& region, const BufferSet& buf) {
  return in_polygon(p, region) && !in_buffer(p, buf);
}

std::vector<NamedRegion> read_geojson_regions(const std::string& path,
                                              const std::string& name_property) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open GeoJSON file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("GeoJSON parse error in " + path + ": " + e.what());
  }

  std::vector<nlohmann::json> features;
  const auto type = doc.value("type", std::string{});
  if (type == "FeatureCollection") {
    for (const auto& f : doc.at("features")) features.push_back(f);
  } else if (type == "Feature") {
    features.push_back(doc);
  } else {
    features.push_back(nlohmann::json{{"type", "Feature"}, {"geometry", doc}});
  }

  std::vector<NamedRegion> regions;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    NamedRegion r;
    r.name = "feature_" + std::to_string(i);
    if (f.contains("properties") && f["properties"].is_object()) {
      const auto& props = f["properties"];
      if (props.contains(name_property) && props[name_property].is_string())
        r.name = props[name_property].get<std::string>();
    }
    r.geometry = parse_geometry(f.at("geometry"));
    regions.push_back(std::move(r));
  }
  return regions;
}

MultiPolygon merge_regions(const std::vector<NamedRegion>& regions) {
  MultiPolygon all;
  for (const auto& r : regions)
    all.parts.insert(all.parts.end(), r.geometry.parts.begin(), r.geometry.parts.end());
  return all;
}

}  // namespace areaest
