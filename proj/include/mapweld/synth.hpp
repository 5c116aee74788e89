#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mapweld/labeling.hpp"
#include "mapweld/types.hpp"

namespace mapweld {

enum class ScenarioKind { kStraightRoad, kIntersection, kLoop, kRoundabout, kMultiLane };

std::string_view to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(std::string_view token);

// Geometry in meters. Each kind reads the fields it needs; the defaults keep
// every scenario inside a 200 x 200 m area.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kStraightRoad;
  double half_width = 3.048;  // width of one lane
  int lanes_per_direction = 1;
  double length = 100.0;            // straight / multi-lane road length
  double arm_length = 45.0;         // intersection and roundabout approach arms
  double corner_radius = 5.0;       // intersection curb fillets
  double loop_straight = 60.0;      // loop: straight section length
  double loop_radius = 20.0;        // loop: end-turn radius at the center divider
  double radius = 15.0;             // roundabout ring radius at its divider
  double crosswalk_depth = 4.0;
  // Stations along a straight or multi-lane road; intersections and
  // roundabouts always get one crosswalk per arm.
  std::vector<double> crosswalk_stations;
  double heading = 0.0;  // rotation of the whole scenario about the origin
  Point2 origin;
};

void validate(const ScenarioSpec& spec);

struct Scenario {
  VectorMap gt;
  Centerline drive_path;
};

Scenario generate_scenario(const ScenarioSpec& spec);

struct NoiseSpec {
  double point_sigma = 0.0;
  double dropout_prob = 0.0;
  double spurious_rate = 0.0;
  std::uint64_t seed = 0;
};

void validate(const NoiseSpec& noise);

inline constexpr std::size_t kPointsPerElement = 20;

// Poses every `step` meters along the path, yaw along the path tangent,
// t advancing 0.5 s per frame.
std::vector<Pose2> poses_along(const Centerline& path, double step);

// Clips the map to the window around each pose, resamples every piece to 20
// points, then applies jitter, dropout and spurious elements. Frame k draws
// from its own generator seeded with seed ^ k.
std::vector<FramePrediction> simulate_frames(const VectorMap& gt, const Centerline& drive_path,
                                             const PerceptionWindow& window = {},
                                             double step = 2.0, const NoiseSpec& noise = {});

struct RemoveElement {
  std::string id;
};

struct ShiftElement {
  std::string id;
  double dx = 0.0;
  double dy = 0.0;
};

// Pulls the listed boundaries toward the axis a -> b by `amount` along the
// axis span, easing back to zero over `taper` meters past each end.
struct NarrowRoad {
  std::vector<std::string> boundary_ids;
  Point2 a;
  Point2 b;
  double amount = 1.0;
  double taper = 5.0;
};

using Change = std::variant<RemoveElement, ShiftElement, NarrowRoad>;

struct ChangeRecord {
  std::string kind;
  std::vector<std::string> element_ids;
  Rect region;  // covers the changed geometry before and after
};

struct ChangeResult {
  VectorMap map;
  ChangeRecord record;
};

ChangeResult inject_change(const VectorMap& gt, const Change& change);

struct CloudParams {
  double spacing = 1.0;
  double sigma = 0.0;
  double outlier_fraction = 0.0;
  double outlier_band = 5.0;
  double slope_x = 0.0;  // ground z = slope_x * x + slope_y * y + height
  double slope_y = 0.0;
  double height = 0.0;
  std::uint64_t seed = 0;
};

// Ground points on a lattice over `area` with optional noise and outliers
// lifted uniformly into a band above the surface.
std::vector<Point3> synthesize_ground_cloud(const Rect& area, const CloudParams& params);

}  // namespace mapweld
