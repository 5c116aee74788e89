#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mapweld/types.hpp"

namespace mapweld {

struct Centerline {
  std::vector<Point2> points;
  std::string source;
};

// Keeps each pose at least `dedup_distance` from the previously kept one,
// then smooths with a centered moving average over `smooth_window` kept
// points (ends padded by repetition). Smoothing can pull neighbours closer
// together, so the spacing rule is applied once more afterwards.
// Throws DegenerateTrace when fewer than two points survive.
Centerline extract_centerline(std::span<const Pose2> poses, double dedup_distance = 0.5,
                              int smooth_window = 5, std::string source = "");

struct LaneSpec {
  double half_width = 3.048;  // 10 ft
};

struct RoadEdges {
  MapElement left;
  MapElement right;
  MapElement divider;
};

// Signed perpendicular offset (+ is left of travel) with averaged-normal
// miter joins. Miters longer than 2 * |offset| are beveled and loops formed
// where the offset folds over itself are cut out.
std::vector<Point2> offset_polyline(std::span<const Point2> points, double offset);

RoadEdges offset_boundaries(const Centerline& center, const LaneSpec& spec = {});

struct RansacParams {
  double inlier_tol = 0.15;
  int iterations = 500;
  double max_slope_deg = 20.0;
  std::uint64_t seed = 0;
};

// z = a * x + b * y + c
struct PlaneFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  std::vector<std::size_t> inliers;  // indices into the input, ascending
  double rms = 0.0;                  // over inliers

  double z_at(double x, double y) const { return a * x + b * y + c; }
};

// Throws NoGroundFound when no sampled triple yields an admissible plane.
PlaneFit ransac_plane(std::span<const Point3> points, const RansacParams& params = {});

struct GroundParams {
  double tile_size = 20.0;
  std::size_t min_inliers = 50;
  RansacParams ransac;
};

struct GroundTile {
  int ti = 0;
  int tj = 0;
  bool has_plane = false;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  std::vector<Point3> inliers;

  std::size_t inlier_count() const { return inliers.size(); }
  double z_at(double x, double y) const { return a * x + b * y + c; }
};

struct GroundModel {
  Point2 origin;
  double tile_size = 20.0;
  int nx = 0;
  int ny = 0;
  std::vector<GroundTile> tiles;  // row-major, tj * nx + ti

  Rect tile_rect(int ti, int tj) const;
  // Tile index containing p, or -1 outside the lattice.
  long tile_of(const Point2& p) const;
  std::size_t non_empty() const;
};

GroundModel build_ground_model(std::span<const Point3> cloud, const GroundParams& params = {});

struct LiftParams {
  std::size_t k = 5;
  double radius = 2.0;
};

// Height of one point from the model, by the same rule lift_to_3d uses.
double ground_height(const GroundModel& model, const Point2& p, const LiftParams& params = {});

VectorMap lift_to_3d(const VectorMap& map2d, const GroundModel& model,
                     const LiftParams& params = {});

struct LabelParams {
  double dedup_distance = 0.5;
  int smooth_window = 5;
  LaneSpec lane;
  GroundParams ground;
  LiftParams lift;
};

// Centerline, offsets, ground fit, heights. Crosswalks are not produced.
VectorMap auto_label(std::span<const Pose2> poses, std::span<const Point3> cloud,
                     const LabelParams& params = {});

}  // namespace mapweld
