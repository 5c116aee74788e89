#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mapweld/types.hpp"

namespace mapweld {

// Rigid ego -> map transform: R(yaw) * p + (pose.x, pose.y).
Point2 ego_to_map(const Pose2& pose, const Point2& p);
Point2 map_to_ego(const Pose2& pose, const Point2& p);

// Moves every element of a frame into the map frame. Ids get an "@<t>"
// suffix so elements from different frames stay distinct.
std::vector<MapElement> transform_frame(const FramePrediction& fp);

MapElement transform_element(const MapElement& e, const Pose2& pose);
MapElement inverse_transform_element(const MapElement& e, const Pose2& pose);
MapElement translate(const MapElement& e, double dx, double dy);

double polyline_length(std::span<const Point2> points, bool closed = false);
inline double length(const MapElement& e) { return polyline_length(e.points, e.closed); }

// n points evenly spaced by arc length; the endpoints are kept exactly.
std::vector<Point2> resample_polyline(std::span<const Point2> points, std::size_t n);
// n points evenly spaced around a closed ring starting at points[0]; the
// start is not repeated at the end.
std::vector<Point2> resample_ring(std::span<const Point2> points, std::size_t n);

// Splits an element into maximal pieces inside `rect` (closed). Entry and
// exit points are inserted, heights interpolated. Pieces shorter than
// `min_length` are dropped. An element entirely inside comes back unchanged.
std::vector<MapElement> clip_to_rect(const MapElement& element, const Rect& rect,
                                     double min_length = 1.0);

// The complement of clip_to_rect over a union of rectangles: the parts of
// the element lying outside every rect. An element touching no rect comes
// back unchanged.
std::vector<MapElement> subtract_rects(const MapElement& element, std::span<const Rect> rects,
                                       double min_length = 0.0);

// Point set with spacing at most `step` along the polyline, vertices included.
std::vector<Point2> densify(std::span<const Point2> points, bool closed, double step);
inline std::vector<Point2> densify(const MapElement& e, double step) {
  return densify(e.points, e.closed, step);
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);
double point_polyline_distance(const Point2& p, std::span<const Point2> points,
                               bool closed = false);

// Douglas-Peucker. Rings are split at the first vertex and the vertex
// farthest from it, so the result is still a ring without a repeated start.
std::vector<Point2> simplify_polyline(std::span<const Point2> points, double tolerance);
std::vector<Point2> simplify_ring(std::span<const Point2> points, double tolerance);

struct SegmentHit {
  Point2 point;
  double t = 0.0;  // along the first segment
  double u = 0.0;  // along the second segment
};

// Proper or touching intersection of segments ab and cd; collinear overlap
// is reported as no hit.
std::optional<SegmentHit> intersect_segments(const Point2& a, const Point2& b, const Point2& c,
                                             const Point2& d);

// Drops consecutive points closer than `eps` (and a closing duplicate for rings).
std::vector<Point2> remove_duplicates(std::span<const Point2> points, bool closed,
                                      double eps = 1e-9);

}  // namespace mapweld
