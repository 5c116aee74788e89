#include "mapweld/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mapweld/error.hpp"
#include "mapweld/geometry.hpp"

namespace mapweld {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kArcStep = 1.0;  // target vertex spacing along arcs, meters

// Arc from angle a0 to a1 (either direction), both ends included.
std::vector<Point2> arc(const Point2& c, double r, double a0, double a1) {
  const int n = std::max(4, static_cast<int>(std::ceil(std::abs(a1 - a0) * r / kArcStep)));
  std::vector<Point2> pts;
  for (int k = 0; k <= n; ++k) {
    const double a = a0 + (a1 - a0) * k / n;
    pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return pts;
}

void append(std::vector<Point2>& to, const std::vector<Point2>& from) {
  for (const auto& p : from) {
    if (to.empty() || distance(to.back(), p) > 1e-9) to.push_back(p);
  }
}

Point2 rotate(const Point2& p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

std::vector<Point2> rotated(std::vector<Point2> pts, double angle) {
  for (auto& p : pts) p = rotate(p, angle);
  return pts;
}

MapElement make(std::string id, MapClass cls, std::vector<Point2> pts, bool closed = false) {
  MapElement e;
  e.id = std::move(id);
  e.cls = cls;
  e.points = remove_duplicates(pts, closed);
  e.closed = closed;
  return e;
}

std::vector<Point2> rect_ring(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

// Lateral offsets of the lane dividers: the center line plus the lines
// between same-direction lanes.
std::vector<double> divider_offsets(const ScenarioSpec& s) {
  std::vector<double> out;
  for (int k = -(s.lanes_per_direction - 1); k <= s.lanes_per_direction - 1; ++k) {
    out.push_back(k * s.half_width);
  }
  return out;
}

void straight_road(const ScenarioSpec& s, Scenario& sc) {
  const double w = s.lanes_per_direction * s.half_width;
  const double L = s.length;
  auto& el = sc.gt.elements;
  el.push_back(make("boundary_left", MapClass::kBoundary, {{0, w}, {L, w}}));
  el.push_back(make("boundary_right", MapClass::kBoundary, {{0, -w}, {L, -w}}));

  // Dividers stop 1 m short of each crosswalk.
  std::vector<std::pair<double, double>> gaps;
  for (double st : s.crosswalk_stations) {
    gaps.emplace_back(st - s.crosswalk_depth / 2 - 1.0, st + s.crosswalk_depth / 2 + 1.0);
  }
  std::sort(gaps.begin(), gaps.end());
  int serial = 0;
  for (double off : divider_offsets(s)) {
    double start = 0.0;
    auto emit = [&](double x0, double x1) {
      if (x1 - x0 < 1.0) return;
      el.push_back(make("divider_" + std::to_string(serial++), MapClass::kDivider,
                        {{x0, off}, {x1, off}}));
    };
    for (const auto& [g0, g1] : gaps) {
      emit(start, std::min(g0, L));
      start = std::max(start, g1);
    }
    emit(start, L);
  }
  for (std::size_t k = 0; k < s.crosswalk_stations.size(); ++k) {
    const double st = s.crosswalk_stations[k];
    el.push_back(make("crosswalk_" + std::to_string(k), MapClass::kCrosswalk,
                      rect_ring(st - s.crosswalk_depth / 2, -w, st + s.crosswalk_depth / 2, w),
                      true));
  }
  const double h = s.half_width / 2;
  sc.drive_path.points = {{0, -h}, {L, -h}};
}

void intersection(const ScenarioSpec& s, Scenario& sc) {
  const double w = s.lanes_per_direction * s.half_width;
  const double A = s.arm_length;
  const double r = s.corner_radius;
  const double d = s.crosswalk_depth;
  auto& el = sc.gt.elements;
  for (int q = 0; q < 4; ++q) {
    std::vector<Point2> curb = {{A, w}, {w + r, w}};
    append(curb, arc({w + r, w + r}, r, -kPi / 2, -kPi));
    append(curb, {{w, A}});
    el.push_back(make("boundary_" + std::to_string(q), MapClass::kBoundary,
                      rotated(curb, q * kPi / 2)));
  }
  for (int q = 0; q < 4; ++q) {
    int serial = 0;
    for (double off : divider_offsets(s)) {
      el.push_back(make("divider_" + std::to_string(q) + "_" + std::to_string(serial++),
                        MapClass::kDivider,
                        rotated({{w + 1 + d + 1, off}, {A, off}}, q * kPi / 2)));
    }
  }
  for (int q = 0; q < 4; ++q) {
    el.push_back(make("crosswalk_" + std::to_string(q), MapClass::kCrosswalk,
                      rotated(rect_ring(w + 1, -w, w + 1 + d, w), q * kPi / 2), true));
  }
  // West to east, U-turn, back to the center and north, U-turn, then south
  // to the end of the south arm.
  const double h = s.half_width / 2;
  std::vector<Point2> path = {{-A, -h}, {A, -h}};
  append(path, arc({A, 0}, h, -kPi / 2, kPi / 2));
  append(path, {{h, h}, {h, A}});
  append(path, arc({0, A}, h, 0, kPi));
  append(path, {{-h, -A}});
  sc.drive_path.points = std::move(path);
}

// Stadium ring at distance rho from the two end-turn centers.
std::vector<Point2> stadium(double half_straight, double rho) {
  std::vector<Point2> ring;
  append(ring, arc({half_straight, 0}, rho, -kPi / 2, kPi / 2));
  append(ring, arc({-half_straight, 0}, rho, kPi / 2, 3 * kPi / 2));
  return remove_duplicates(ring, true);
}

// Walks `length` meters around a closed ring starting at ring[0].
std::vector<Point2> walk_ring(const std::vector<Point2>& ring, double length) {
  std::vector<Point2> out = {ring[0]};
  double done = 0.0;
  for (std::size_t k = 1; done < length; ++k) {
    const Point2& a = ring[(k - 1) % ring.size()];
    const Point2& b = ring[k % ring.size()];
    const double seg = distance(a, b);
    if (done + seg >= length) {
      out.push_back(a + (b - a) * ((length - done) / seg));
      break;
    }
    out.push_back(b);
    done += seg;
  }
  return remove_duplicates(out, false);
}

void loop(const ScenarioSpec& s, Scenario& sc) {
  const double w = s.lanes_per_direction * s.half_width;
  const double hs = s.loop_straight / 2;
  const double R = s.loop_radius;
  auto& el = sc.gt.elements;
  el.push_back(make("boundary_outer", MapClass::kBoundary, stadium(hs, R + w), true));
  el.push_back(make("boundary_inner", MapClass::kBoundary, stadium(hs, R - w), true));
  int serial = 0;
  for (double off : divider_offsets(s)) {
    el.push_back(make("divider_" + std::to_string(serial++), MapClass::kDivider,
                      stadium(hs, R + off), true));
  }
  // Counter-clockwise in the innermost lane, starting mid bottom straight.
  const double rho = R + s.half_width / 2;
  std::vector<Point2> ring = {{0, -rho}};
  append(ring, arc({hs, 0}, rho, -kPi / 2, kPi / 2));
  append(ring, arc({-hs, 0}, rho, kPi / 2, 3 * kPi / 2));
  append(ring, {{-hs, -rho}});
  ring = remove_duplicates(ring, true);
  sc.drive_path.points = walk_ring(ring, 1.1 * polyline_length(ring, true));
}

void roundabout(const ScenarioSpec& s, Scenario& sc) {
  const double w = s.lanes_per_direction * s.half_width;
  const double R = s.radius;
  const double Ro = R + w;
  const double E = Ro + s.arm_length;
  const double d = s.crosswalk_depth;
  const double phi = std::asin(w / Ro);
  const double xc = std::sqrt(Ro * Ro - w * w);
  auto& el = sc.gt.elements;

  el.push_back(make("boundary_inner", MapClass::kBoundary, arc({0, 0}, R - w, 0, 2 * kPi), true));
  std::vector<Point2> north = {{-E, w}, {-xc, w}};
  append(north, arc({0, 0}, Ro, kPi - phi, phi));
  append(north, {{E, w}});
  el.push_back(make("boundary_north", MapClass::kBoundary, north));
  std::vector<Point2> south = {{-E, -w}, {-xc, -w}};
  append(south, arc({0, 0}, Ro, kPi + phi, 2 * kPi - phi));
  append(south, {{E, -w}});
  el.push_back(make("boundary_south", MapClass::kBoundary, south));

  int serial = 0;
  for (double off : divider_offsets(s)) {
    el.push_back(make("divider_ring_" + std::to_string(serial++), MapClass::kDivider,
                      arc({0, 0}, R + off, 0, 2 * kPi), true));
  }
  serial = 0;
  for (double off : divider_offsets(s)) {
    el.push_back(make("divider_east_" + std::to_string(serial), MapClass::kDivider,
                      {{Ro + 2 + d + 1, off}, {E, off}}));
    el.push_back(make("divider_west_" + std::to_string(serial++), MapClass::kDivider,
                      {{-E, off}, {-(Ro + 2 + d + 1), off}}));
  }
  el.push_back(make("crosswalk_east", MapClass::kCrosswalk, rect_ring(Ro + 2, -w, Ro + 2 + d, w),
                    true));
  el.push_back(make("crosswalk_west", MapClass::kCrosswalk,
                    rect_ring(-(Ro + 2 + d), -w, -(Ro + 2), w), true));

  // In from the west, one and a half turns counter-clockwise, out east.
  const double h = s.half_width / 2;
  const double rd = R + h;
  const double delta = std::asin(h / rd);
  std::vector<Point2> path = {{-E, -h}};
  append(path, arc({0, 0}, rd, kPi + delta, 4 * kPi - delta));
  append(path, {{E, -h}});
  sc.drive_path.points = std::move(path);
}

}  // namespace

std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::kStraightRoad: return "straight";
    case ScenarioKind::kIntersection: return "intersection";
    case ScenarioKind::kLoop: return "loop";
    case ScenarioKind::kRoundabout: return "roundabout";
    case ScenarioKind::kMultiLane: return "multilane";
  }
  return "straight";
}

ScenarioKind parse_scenario_kind(std::string_view token) {
  for (auto k : {ScenarioKind::kStraightRoad, ScenarioKind::kIntersection, ScenarioKind::kLoop,
                 ScenarioKind::kRoundabout, ScenarioKind::kMultiLane}) {
    if (token == to_string(k)) return k;
  }
  fail(ErrorCode::kInvalidScenario, "unknown scenario kind '" + std::string(token) + "'");
}

void validate(const ScenarioSpec& s) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::kInvalidScenario, what);
  };
  require(s.half_width > 0 && std::isfinite(s.half_width), "half_width must be positive");
  require(s.lanes_per_direction >= 1, "lanes_per_direction must be at least 1");
  require(s.crosswalk_depth > 0, "crosswalk_depth must be positive");
  require(std::isfinite(s.heading) && is_finite(s.origin), "heading and origin must be finite");
  const double w = s.lanes_per_direction * s.half_width;
  switch (s.kind) {
    case ScenarioKind::kStraightRoad:
    case ScenarioKind::kMultiLane:
      require(s.length > 0, "length must be positive");
      for (double st : s.crosswalk_stations) {
        require(st - s.crosswalk_depth / 2 >= 0 && st + s.crosswalk_depth / 2 <= s.length,
                "crosswalk station outside the road");
      }
      break;
    case ScenarioKind::kIntersection:
      require(s.corner_radius > 0, "corner_radius must be positive");
      require(s.arm_length > w + s.corner_radius + s.crosswalk_depth + 3,
              "arm_length too short for the road width");
      break;
    case ScenarioKind::kLoop:
      require(s.loop_straight > 0, "loop_straight must be positive");
      require(s.loop_radius - w > 1.0, "loop_radius too small for the road width");
      break;
    case ScenarioKind::kRoundabout:
      require(s.radius - w > 1.0, "radius too small for the road width");
      require(s.arm_length > s.crosswalk_depth + 4, "arm_length too short");
      break;
  }
}

Scenario generate_scenario(const ScenarioSpec& spec) {
  validate(spec);
  Scenario sc;
  switch (spec.kind) {
    case ScenarioKind::kStraightRoad:
    case ScenarioKind::kMultiLane: straight_road(spec, sc); break;
    case ScenarioKind::kIntersection: intersection(spec, sc); break;
    case ScenarioKind::kLoop: loop(spec, sc); break;
    case ScenarioKind::kRoundabout: roundabout(spec, sc); break;
  }
  auto place = [&](Point2 p) { return rotate(p, spec.heading) + spec.origin; };
  for (auto& e : sc.gt.elements) {
    for (auto& p : e.points) p = place(p);
  }
  for (auto& p : sc.drive_path.points) p = place(p);
  sc.drive_path.source = std::string(to_string(spec.kind));
  sc.gt.bounds = bounds_of(sc.gt.elements, 10.0);
  return sc;
}

void validate(const NoiseSpec& n) {
  if (!(n.point_sigma >= 0) || !std::isfinite(n.point_sigma)) {
    fail(ErrorCode::kInvalidScenario, "noise sigma must be >= 0");
  }
  if (!(n.dropout_prob >= 0 && n.dropout_prob <= 1)) {
    fail(ErrorCode::kInvalidScenario, "dropout probability must be in [0, 1]");
  }
  if (!(n.spurious_rate >= 0) || !std::isfinite(n.spurious_rate)) {
    fail(ErrorCode::kInvalidScenario, "spurious rate must be >= 0");
  }
}

std::vector<Pose2> poses_along(const Centerline& path, double step) {
  if (!(step > 0)) fail(ErrorCode::kInvalidScenario, "frame step must be positive");
  const auto pts = remove_duplicates(path.points, false);
  if (pts.size() < 2) fail(ErrorCode::kDegenerateTrace, "drive path needs 2 distinct points");
  std::vector<Pose2> poses;
  std::size_t seg = 0;
  double seg_start = 0.0;
  const double total = polyline_length(pts);
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * step;
    if (s > total + 1e-9) break;
    while (seg + 2 < pts.size() && seg_start + distance(pts[seg], pts[seg + 1]) <= s) {
      seg_start += distance(pts[seg], pts[seg + 1]);
      ++seg;
    }
    const Point2 a = pts[seg], b = pts[seg + 1];
    const double len = distance(a, b);
    const double u = std::clamp((s - seg_start) / len, 0.0, 1.0);
    const Point2 p = a + (b - a) * u;
    poses.push_back({p.x, p.y, std::atan2(b.y - a.y, b.x - a.x), 0.5 * static_cast<double>(k)});
  }
  return poses;
}

std::vector<FramePrediction> simulate_frames(const VectorMap& gt, const Centerline& drive_path,
                                             const PerceptionWindow& window, double step,
                                             const NoiseSpec& noise) {
  validate(noise);
  const Rect box = window.rect();
  auto clamp = [&](Point2 p) {
    return Point2{std::clamp(p.x, box.xmin, box.xmax), std::clamp(p.y, box.ymin, box.ymax)};
  };
  const auto poses = poses_along(drive_path, step);
  std::vector<FramePrediction> frames;
  frames.reserve(poses.size());
  for (std::size_t k = 0; k < poses.size(); ++k) {
    std::mt19937_64 rng(noise.seed ^ static_cast<std::uint64_t>(k));
    std::bernoulli_distribution drop(noise.dropout_prob);
    std::normal_distribution<double> jitter(0.0, noise.point_sigma > 0 ? noise.point_sigma : 1.0);
    FramePrediction fp;
    fp.pose = poses[k];

    auto finish = [&](MapElement e) {
      if (noise.point_sigma > 0) {
        for (auto& p : e.points) {
          p.x += jitter(rng);
          p.y += jitter(rng);
        }
      }
      for (auto& p : e.points) p = clamp(p);
      e.points = remove_duplicates(e.points, e.closed);
      if (e.points.size() < 2 || (e.closed && e.points.size() < 3)) return;
      fp.elements.push_back(std::move(e));
    };

    for (const auto& e : gt.elements) {
      MapElement ego = inverse_transform_element(e, fp.pose);
      ego.z.clear();
      for (auto& piece : clip_to_rect(ego, box, 1.0)) {
        const bool dropped = drop(rng);
        if (dropped) continue;
        piece.points = piece.closed ? resample_ring(piece.points, kPointsPerElement)
                                    : resample_polyline(piece.points, kPointsPerElement);
        piece.z.clear();
        finish(std::move(piece));
      }
    }

    if (noise.spurious_rate > 0) {
      std::poisson_distribution<int> count(noise.spurious_rate);
      std::uniform_int_distribution<int> cls(0, static_cast<int>(kNumClasses) - 1);
      std::uniform_real_distribution<double> ux(box.xmin, box.xmax);
      std::uniform_real_distribution<double> uy(box.ymin, box.ymax);
      std::uniform_real_distribution<double> ua(-kPi, kPi);
      std::uniform_real_distribution<double> ul(2.0, 5.0);
      const int n = count(rng);
      for (int i = 0; i < n; ++i) {
        MapElement e;
        e.id = "spurious_" + std::to_string(i);
        e.cls = kAllClasses[static_cast<std::size_t>(cls(rng))];
        const Point2 c{ux(rng), uy(rng)};
        const double a = ua(rng);
        const double len = ul(rng);
        const Point2 dir{std::cos(a) * len / 2, std::sin(a) * len / 2};
        const Point2 p0 = clamp(c - dir), p1 = clamp(c + dir);
        if (distance(p0, p1) < 0.5) continue;
        e.points = resample_polyline(std::vector<Point2>{p0, p1}, kPointsPerElement);
        finish(std::move(e));
      }
    }
    frames.push_back(std::move(fp));
  }
  return frames;
}

namespace {

std::size_t find_element(const VectorMap& m, const std::string& id) {
  for (std::size_t k = 0; k < m.elements.size(); ++k) {
    if (m.elements[k].id == id) return k;
  }
  fail(ErrorCode::kUnknownElement, "no element '" + id + "'");
}

void grow(Rect& r, const Point2& p, bool& empty) {
  if (empty) {
    r = {p.x, p.y, p.x, p.y};
    empty = false;
    return;
  }
  r = {std::min(r.xmin, p.x), std::min(r.ymin, p.y), std::max(r.xmax, p.x), std::max(r.ymax, p.y)};
}

void include_in_bounds(VectorMap& m, const MapElement& e) {
  const Rect b = bounds_of({e});
  m.bounds = {std::min(m.bounds.xmin, b.xmin), std::min(m.bounds.ymin, b.ymin),
              std::max(m.bounds.xmax, b.xmax), std::max(m.bounds.ymax, b.ymax)};
}

MapElement narrow(const MapElement& e, const NarrowRoad& nr, Rect& region, bool& empty) {
  const Point2 axis = nr.b - nr.a;
  const double L = norm(axis);
  const Point2 u = axis * (1.0 / L);
  const Point2 nrm{-u.y, u.x};
  const double taper = std::max(0.0, nr.taper);
  std::vector<double> breaks = {-taper, 0.0, L, L + taper};
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  auto station = [&](const Point2& p) { return dot(p - nr.a, u); };
  auto weight = [&](double s) {
    if (s >= 0 && s <= L) return 1.0;
    if (taper > 0 && s < 0 && s > -taper) return (s + taper) / taper;
    if (taper > 0 && s > L && s < L + taper) return (L + taper - s) / taper;
    return 0.0;
  };

  // Breakpoints at the span and taper ends keep the deformation piecewise
  // linear along the boundary.
  MapElement out = e;
  out.points.clear();
  out.z.clear();
  const std::size_t n = e.points.size();
  const std::size_t segs = e.closed ? n : n - 1;
  for (std::size_t k = 0; k < n; ++k) {
    out.points.push_back(e.points[k]);
    if (e.has_z()) out.z.push_back(e.z[k]);
    if (k >= segs) continue;
    const Point2 p = e.points[k], q = e.points[(k + 1) % n];
    const double sp = station(p), sq = station(q);
    std::vector<double> ts;
    for (double b : breaks) {
      if ((b > sp && b < sq) || (b < sp && b > sq)) ts.push_back((b - sp) / (sq - sp));
    }
    std::sort(ts.begin(), ts.end());
    for (double t : ts) {
      out.points.push_back(p + (q - p) * t);
      if (e.has_z()) out.z.push_back(e.z[k] + (e.z[(k + 1) % n] - e.z[k]) * t);
    }
  }
  for (auto& p : out.points) {
    const double w = weight(station(p));
    if (w <= 0) continue;
    const double lateral = dot(p - nr.a, nrm);
    const double move = std::min(nr.amount * w, std::abs(lateral));
    const Point2 moved = p - nrm * (lateral >= 0 ? move : -move);
    grow(region, p, empty);
    grow(region, moved, empty);
    p = moved;
  }
  return out;
}

}  // namespace

ChangeResult inject_change(const VectorMap& gt, const Change& change) {
  ChangeResult r;
  r.map = gt;
  bool empty = true;
  if (const auto* c = std::get_if<RemoveElement>(&change)) {
    const std::size_t k = find_element(gt, c->id);
    r.record = {"remove", {c->id}, bounds_of({gt.elements[k]})};
    r.map.elements.erase(r.map.elements.begin() + static_cast<std::ptrdiff_t>(k));
  } else if (const auto* c = std::get_if<ShiftElement>(&change)) {
    const std::size_t k = find_element(gt, c->id);
    MapElement moved = translate(gt.elements[k], c->dx, c->dy);
    r.record.kind = "shift";
    r.record.element_ids = {c->id};
    for (const auto& p : gt.elements[k].points) grow(r.record.region, p, empty);
    for (const auto& p : moved.points) grow(r.record.region, p, empty);
    include_in_bounds(r.map, moved);
    r.map.elements[k] = std::move(moved);
  } else if (const auto* c = std::get_if<NarrowRoad>(&change)) {
    if (!(distance(c->a, c->b) > 0)) fail(ErrorCode::kInvalidScenario, "narrowing axis has no length");
    if (!(c->amount >= 0)) fail(ErrorCode::kInvalidScenario, "narrowing amount must be >= 0");
    r.record.kind = "narrow";
    for (const auto& id : c->boundary_ids) {
      const std::size_t k = find_element(gt, id);
      r.map.elements[k] = narrow(gt.elements[k], *c, r.record.region, empty);
      r.record.element_ids.push_back(id);
    }
  }
  return r;
}

std::vector<Point3> synthesize_ground_cloud(const Rect& area, const CloudParams& params) {
  if (!(params.spacing > 0)) fail(ErrorCode::kInvalidScenario, "cloud spacing must be positive");
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> noise(0.0, params.sigma > 0 ? params.sigma : 1.0);
  std::bernoulli_distribution outlier(std::clamp(params.outlier_fraction, 0.0, 1.0));
  std::uniform_real_distribution<double> band(0.0, params.outlier_band);
  std::vector<Point3> cloud;
  const int nx = static_cast<int>(std::floor(area.width() / params.spacing)) + 1;
  const int ny = static_cast<int>(std::floor(area.height() / params.spacing)) + 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = area.xmin + i * params.spacing;
      const double y = area.ymin + j * params.spacing;
      double z = params.slope_x * x + params.slope_y * y + params.height;
      if (outlier(rng)) {
        z += band(rng);
      } else if (params.sigma > 0) {
        z += noise(rng);
      }
      cloud.push_back({x, y, z});
    }
  }
  return cloud;
}

}  // namespace mapweld
