#pragma once

#include <numbers>
#include <string>
#include <vector>

namespace areaest {

/// Mean Earth radius (IUGG), meters.
inline constexpr double kEarthRadiusM = 6'371'008.8;
/// Length of one degree of arc on the sphere of radius kEarthRadiusM.
inline constexpr double kMetersPerDegree = 2.0 * std::numbers::pi * kEarthRadiusM / 360.0;

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Throws std::invalid_argument unless the point is finite and in range.
void validate(const GeoPoint& p);

/// A ring is implicitly closed; a repeated closing vertex is tolerated.
using Ring = std::vector<GeoPoint>;

struct Polygon {
  Ring exterior;
  std::vector<Ring> holes;
};

/// Union of polygon parts.
struct MultiPolygon {
  std::vector<Polygon> parts;
};

/// A dissolved set of circular buffers, represented by its centers.
struct BufferSet {
  std::vector<GeoPoint> centers;
  double radius_m = 5000.0;
};

struct NamedRegion {
  std::string name;
  MultiPolygon geometry;
};

void validate(const Polygon& poly);
void validate(const BufferSet& buf);

/// Great-circle distance on a sphere of radius kEarthRadiusM.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

// Even-odd rule on the lon/lat plane. Points on any ring edge count as inside.
bool in_polygon(const GeoPoint& p, const Polygon& poly);
bool in_polygon(const GeoPoint& p, const MultiPolygon& poly);

/// True iff the nearest center is within radius_m (inclusive).
bool in_buffer(const GeoPoint& p, const BufferSet& buf);

bool region_minus_buffer(const GeoPoint& p, const MultiPolygon& region, const BufferSet& buf);

/// Reads Polygon / MultiPolygon features from a GeoJSON FeatureCollection,
/// a single Feature, or a bare geometry. Region names come from the
/// `name_property` feature property, falling back to "feature_<index>".
std::vector<NamedRegion> read_geojson_regions(const std::string& path,
                                              const std::string& name_property = "name");

/// Union of every region's parts.
MultiPolygon merge_regions(const std::vector<NamedRegion>& regions);

}  // namespace areaest
