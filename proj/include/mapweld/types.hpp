#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mapweld {

enum class MapClass { kBoundary = 0, kDivider = 1, kCrosswalk = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<MapClass, kNumClasses> kAllClasses = {
    MapClass::kBoundary, MapClass::kDivider, MapClass::kCrosswalk};

inline constexpr std::size_t class_index(MapClass c) {
  return static_cast<std::size_t>(c);
}

std::string_view to_string(MapClass c);
// Throws ParseError naming the token on anything but boundary|divider|crosswalk.
MapClass parse_map_class(std::string_view token);

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Point2& a, const Point2& b) { return norm(a - b); }
inline double squared_distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}
inline bool is_finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
  Point2 xy() const { return {x, y}; }
};

// Axis-aligned rectangle, closed on all sides.
struct Rect {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  friend bool operator==(const Rect&, const Rect&) = default;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool degenerate() const { return !(xmax > xmin) || !(ymax > ymin); }
  bool contains(const Point2& p, double slack = 0.0) const {
    return p.x >= xmin - slack && p.x <= xmax + slack && p.y >= ymin - slack &&
           p.y <= ymax + slack;
  }
  bool intersects(const Rect& o) const {
    return xmin <= o.xmax && o.xmin <= xmax && ymin <= o.ymax && o.ymin <= ymax;
  }
  Rect expanded(double d) const { return {xmin - d, ymin - d, xmax + d, ymax + d}; }
};

// One vectorized map feature. Height is optional and stored alongside the
// planar geometry so every 2D operation works on `points` directly.
struct MapElement {
  std::string id;
  MapClass cls = MapClass::kBoundary;
  std::vector<Point2> points;
  std::vector<double> z;  // empty, or one height per point
  bool closed = false;
  std::optional<double> confidence;

  friend bool operator==(const MapElement&, const MapElement&) = default;

  bool has_z() const { return !z.empty(); }
  double score() const { return confidence.value_or(1.0); }
};

// Throws InvalidGeometry when the element breaks a structural invariant.
void validate(const MapElement& e);

struct VectorMap {
  std::string frame_id = "map";
  Rect bounds;
  std::vector<MapElement> elements;

  friend bool operator==(const VectorMap&, const VectorMap&) = default;
};

void validate(const VectorMap& m);

// Bounding box of all element points, grown by `pad` on every side.
Rect bounds_of(const std::vector<MapElement>& elements, double pad = 0.0);

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double t = 0.0;

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

struct PerceptionWindow {
  double forward = 30.0;
  double backward = 30.0;
  double left = 15.0;
  double right = 15.0;

  Rect rect() const { return {-backward, -right, forward, left}; }
  bool contains(const Point2& ego, double slack = 1e-9) const {
    return rect().contains(ego, slack);
  }
};

struct FramePrediction {
  Pose2 pose;
  std::vector<MapElement> elements;  // ego frame

  friend bool operator==(const FramePrediction&, const FramePrediction&) = default;
};

void validate(const FramePrediction& fp, const PerceptionWindow& window = {});

}  // namespace mapweld
