#include "mapweld/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mapweld/error.hpp"

namespace mapweld {

namespace {

void require_finite(const Point2& p) {
  if (!is_finite(p)) fail(ErrorCode::kInvalidGeometry, "non-finite coordinate");
}

// Vertex list with the closing vertex appended for rings.
struct Chain {
  std::vector<Point2> points;
  std::vector<double> z;
};

Chain as_chain(const MapElement& e) {
  Chain c{e.points, e.z};
  if (e.closed && !e.points.empty()) {
    c.points.push_back(e.points.front());
    if (!c.z.empty()) c.z.push_back(e.z.front());
  }
  return c;
}

// Liang-Barsky against a closed rectangle.
bool clip_segment(const Point2& a, const Point2& b, const Rect& r, double& t0, double& t1) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - r.xmin, r.xmax - a.x, a.y - r.ymin, r.ymax - a.y};
  t0 = 0.0;
  t1 = 1.0;
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return false;
      continue;
    }
    const double t = q[k] / p[k];
    if (p[k] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
  }
  return t0 <= t1;
}

Point2 lerp(const Point2& a, const Point2& b, double t) {
  if (t <= 0.0) return a;
  if (t >= 1.0) return b;
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

Point2 clamp_to(const Point2& p, const Rect& r) {
  return {std::clamp(p.x, r.xmin, r.xmax), std::clamp(p.y, r.ymin, r.ymax)};
}

struct PieceBuilder {
  bool with_z = false;
  std::vector<Chain> done;
  Chain current;

  void add(const Point2& p, double z) {
    if (!current.points.empty() && distance(current.points.back(), p) <= 1e-9) return;
    current.points.push_back(p);
    if (with_z) current.z.push_back(z);
  }
  void close() {
    if (current.points.size() >= 2) done.push_back(std::move(current));
    current = Chain{};
  }
};

// Joins the last piece onto the first when a ring was cut somewhere in the
// middle, so the piece running through the ring start stays in one part.
void join_ring_wrap(std::vector<Chain>& pieces, bool starts_at_origin, bool ends_at_origin) {
  if (pieces.size() < 2 || !starts_at_origin || !ends_at_origin) return;
  Chain& last = pieces.back();
  Chain& first = pieces.front();
  if (distance(last.points.back(), first.points.front()) > 1e-9) return;
  for (std::size_t i = 1; i < first.points.size(); ++i) {
    last.points.push_back(first.points[i]);
    if (!last.z.empty()) last.z.push_back(first.z[i]);
  }
  pieces.front() = std::move(last);
  pieces.pop_back();
}

std::vector<MapElement> to_elements(const MapElement& source, std::vector<Chain> pieces,
                                    double min_length) {
  std::vector<MapElement> out;
  int k = 0;
  for (auto& piece : pieces) {
    if (polyline_length(piece.points) < min_length) continue;
    MapElement e;
    e.id = source.id + "#" + std::to_string(k++);
    e.cls = source.cls;
    e.points = std::move(piece.points);
    e.z = std::move(piece.z);
    e.confidence = source.confidence;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

Point2 ego_to_map(const Pose2& pose, const Point2& p) {
  require_finite(p);
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.yaw)) {
    fail(ErrorCode::kInvalidGeometry, "non-finite pose");
  }
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  return {c * p.x - s * p.y + pose.x, s * p.x + c * p.y + pose.y};
}

Point2 map_to_ego(const Pose2& pose, const Point2& p) {
  require_finite(p);
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  const double dx = p.x - pose.x;
  const double dy = p.y - pose.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

MapElement transform_element(const MapElement& e, const Pose2& pose) {
  MapElement out = e;
  for (auto& p : out.points) p = ego_to_map(pose, p);
  return out;
}

MapElement inverse_transform_element(const MapElement& e, const Pose2& pose) {
  MapElement out = e;
  for (auto& p : out.points) p = map_to_ego(pose, p);
  return out;
}

MapElement translate(const MapElement& e, double dx, double dy) {
  MapElement out = e;
  for (auto& p : out.points) p = {p.x + dx, p.y + dy};
  return out;
}

std::vector<MapElement> transform_frame(const FramePrediction& fp) {
  char suffix[48];
  std::snprintf(suffix, sizeof(suffix), "@%.3f", fp.pose.t);
  std::vector<MapElement> out;
  out.reserve(fp.elements.size());
  for (const auto& e : fp.elements) {
    MapElement m = transform_element(e, fp.pose);
    m.id += suffix;
    out.push_back(std::move(m));
  }
  return out;
}

double polyline_length(std::span<const Point2> points, bool closed) {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += distance(points[i - 1], points[i]);
  if (closed && points.size() > 2) total += distance(points.back(), points.front());
  return total;
}

std::vector<Point2> resample_polyline(std::span<const Point2> points, std::size_t n) {
  if (points.size() < 2 || n < 2) {
    fail(ErrorCode::kInvalidGeometry, "resampling needs at least 2 points in and out");
  }
  std::vector<double> cum(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    cum[i] = cum[i - 1] + distance(points[i - 1], points[i]);
  }
  const double total = cum.back();
  if (!(total > 1e-12)) fail(ErrorCode::kInvalidGeometry, "zero-length polyline");

  std::vector<Point2> out;
  out.reserve(n);
  out.push_back(points.front());
  std::size_t seg = 1;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 1 < points.size() && cum[seg] < s) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double t = len > 0.0 ? (s - cum[seg - 1]) / len : 0.0;
    out.push_back(lerp(points[seg - 1], points[seg], t));
  }
  out.push_back(points.back());
  return out;
}

std::vector<Point2> resample_ring(std::span<const Point2> points, std::size_t n) {
  if (points.size() < 3 || n < 3) {
    fail(ErrorCode::kInvalidGeometry, "ring resampling needs at least 3 points in and out");
  }
  std::vector<Point2> closed(points.begin(), points.end());
  closed.push_back(points.front());
  auto open = resample_polyline(closed, n + 1);
  open.pop_back();
  return open;
}

std::vector<MapElement> clip_to_rect(const MapElement& element, const Rect& rect,
                                     double min_length) {
  const Chain chain = as_chain(element);
  const bool with_z = !chain.z.empty();
  PieceBuilder builder{with_z, {}, {}};
  bool all_inside = true;
  bool starts_at_origin = false;
  bool ends_at_origin = false;
  const std::size_t nseg = chain.points.size() - 1;

  for (std::size_t k = 0; k < nseg; ++k) {
    const Point2& a = chain.points[k];
    const Point2& b = chain.points[k + 1];
    double t0 = 0.0, t1 = 1.0;
    if (!clip_segment(a, b, rect, t0, t1)) {
      all_inside = false;
      builder.close();
      continue;
    }
    if (t0 > 0.0 || t1 < 1.0) all_inside = false;
    if (k == 0 && t0 == 0.0) starts_at_origin = true;
    if (k + 1 == nseg && t1 == 1.0) ends_at_origin = true;
    if (t0 > 0.0) builder.close();
    const double za = with_z ? lerp(chain.z[k], chain.z[k + 1], t0) : 0.0;
    const double zb = with_z ? lerp(chain.z[k], chain.z[k + 1], t1) : 0.0;
    builder.add(clamp_to(lerp(a, b, t0), rect), za);
    builder.add(clamp_to(lerp(a, b, t1), rect), zb);
    if (t1 < 1.0) builder.close();
  }
  builder.close();

  if (all_inside) {
    if (length(element) < min_length) return {};
    return {element};
  }
  if (element.closed) join_ring_wrap(builder.done, starts_at_origin, ends_at_origin);
  return to_elements(element, std::move(builder.done), min_length);
}

std::vector<MapElement> subtract_rects(const MapElement& element, std::span<const Rect> rects,
                                       double min_length) {
  const Chain chain = as_chain(element);
  const bool with_z = !chain.z.empty();
  PieceBuilder builder{with_z, {}, {}};
  bool touched = false;
  bool starts_at_origin = false;
  bool ends_at_origin = false;
  const std::size_t nseg = chain.points.size() - 1;

  auto inside_any = [&](const Point2& p) {
    return std::any_of(rects.begin(), rects.end(), [&](const Rect& r) { return r.contains(p); });
  };

  for (std::size_t k = 0; k < nseg; ++k) {
    const Point2& a = chain.points[k];
    const Point2& b = chain.points[k + 1];
    std::vector<double> cuts = {0.0, 1.0};
    for (const auto& r : rects) {
      double t0 = 0.0, t1 = 1.0;
      if (!clip_segment(a, b, r, t0, t1)) continue;
      if (t0 > 0.0 && t0 < 1.0) cuts.push_back(t0);
      if (t1 > 0.0 && t1 < 1.0) cuts.push_back(t1);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double ta = cuts[c];
      const double tb = cuts[c + 1];
      const Point2 mid = lerp(a, b, 0.5 * (ta + tb));
      // A zero-length sub-segment carries no geometry; classify by the point.
      if (inside_any(mid)) {
        touched = true;
        builder.close();
        continue;
      }
      if (k == 0 && ta == 0.0) starts_at_origin = true;
      if (k + 1 == nseg && tb == 1.0) ends_at_origin = true;
      builder.add(lerp(a, b, ta), with_z ? lerp(chain.z[k], chain.z[k + 1], ta) : 0.0);
      builder.add(lerp(a, b, tb), with_z ? lerp(chain.z[k], chain.z[k + 1], tb) : 0.0);
    }
  }
  builder.close();

  if (!touched) return {element};
  if (element.closed) join_ring_wrap(builder.done, starts_at_origin, ends_at_origin);
  return to_elements(element, std::move(builder.done), min_length);
}

std::vector<Point2> densify(std::span<const Point2> points, bool closed, double step) {
  if (!(step > 0.0)) fail(ErrorCode::kInvalidGeometry, "densify step must be positive");
  std::vector<Point2> out;
  if (points.empty()) return out;
  const std::size_t nseg = closed && points.size() > 2 ? points.size() : points.size() - 1;
  for (std::size_t k = 0; k < nseg; ++k) {
    const Point2& a = points[k];
    const Point2& b = points[(k + 1) % points.size()];
    const double len = distance(a, b);
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step)));
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(lerp(a, b, static_cast<double>(i) / static_cast<double>(n)));
    }
  }
  if (!(closed && points.size() > 2)) out.push_back(points.back());
  return out;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

double point_polyline_distance(const Point2& p, std::span<const Point2> points, bool closed) {
  if (points.empty()) return std::numeric_limits<double>::infinity();
  if (points.size() == 1) return distance(p, points.front());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < points.size(); ++i) {
    best = std::min(best, point_segment_distance(p, points[i - 1], points[i]));
  }
  if (closed && points.size() > 2) {
    best = std::min(best, point_segment_distance(p, points.back(), points.front()));
  }
  return best;
}

std::vector<Point2> simplify_polyline(std::span<const Point2> points, double tolerance) {
  if (points.size() <= 2) return {points.begin(), points.end()};
  std::vector<bool> keep(points.size(), false);
  keep.front() = keep.back() = true;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, points.size() - 1}};
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    double worst = -1.0;
    std::size_t index = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const double d = point_segment_distance(points[i], points[lo], points[hi]);
      if (d > worst) {
        worst = d;
        index = i;
      }
    }
    if (worst > tolerance) {
      keep[index] = true;
      stack.push_back({lo, index});
      stack.push_back({index, hi});
    }
  }
  std::vector<Point2> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (keep[i]) out.push_back(points[i]);
  }
  return out;
}

std::vector<Point2> simplify_ring(std::span<const Point2> points, double tolerance) {
  if (points.size() <= 3) return {points.begin(), points.end()};
  std::size_t far = 0;
  double best = -1.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = squared_distance(points[i], points[0]);
    if (d > best) {
      best = d;
      far = i;
    }
  }
  std::vector<Point2> first(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(far) + 1);
  std::vector<Point2> second(points.begin() + static_cast<std::ptrdiff_t>(far), points.end());
  second.push_back(points[0]);
  auto a = simplify_polyline(first, tolerance);
  auto b = simplify_polyline(second, tolerance);
  a.pop_back();
  b.pop_back();
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::optional<SegmentHit> intersect_segments(const Point2& a, const Point2& b, const Point2& c,
                                             const Point2& d) {
  const Point2 r = b - a;
  const Point2 s = d - c;
  const double denom = cross(r, s);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = cross(c - a, s) / denom;
  const double u = cross(c - a, r) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return SegmentHit{a + r * t, t, u};
}

std::vector<Point2> remove_duplicates(std::span<const Point2> points, bool closed, double eps) {
  std::vector<Point2> out;
  for (const auto& p : points) {
    if (out.empty() || distance(out.back(), p) > eps) out.push_back(p);
  }
  if (closed) {
    while (out.size() > 1 && distance(out.back(), out.front()) <= eps) out.pop_back();
  }
  return out;
}

}  // namespace mapweld
