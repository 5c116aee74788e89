#include "mapweld/labeling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mapweld/error.hpp"
#include "mapweld/geometry.hpp"
#include "mapweld/kdtree.hpp"

namespace mapweld {

namespace {

std::vector<Point2> dedup_by_spacing(std::span<const Point2> pts, double spacing) {
  std::vector<Point2> kept;
  for (const auto& p : pts) {
    if (kept.empty() || distance(p, kept.back()) >= spacing) kept.push_back(p);
  }
  return kept;
}

Point2 left_normal(const Point2& a, const Point2& b) {
  const Point2 d = b - a;
  const double len = norm(d);
  return {-d.y / len, d.x / len};
}

// Cuts out every loop where the polyline crosses itself, keeping the
// crossing point. Larger loops are removed first from each start segment.
std::vector<Point2> excise_loops(std::vector<Point2> p) {
  for (std::size_t i = 0; i + 3 < p.size(); ++i) {
    bool cut = true;
    while (cut) {
      cut = false;
      for (std::size_t j = p.size() - 2; j >= i + 2; --j) {
        const auto hit = intersect_segments(p[i], p[i + 1], p[j], p[j + 1]);
        if (!hit) continue;
        p.erase(p.begin() + static_cast<std::ptrdiff_t>(i + 1),
                p.begin() + static_cast<std::ptrdiff_t>(j + 1));
        p.insert(p.begin() + static_cast<std::ptrdiff_t>(i + 1), hit->point);
        cut = i + 3 < p.size();
        break;
      }
    }
  }
  return p;
}

}  // namespace

Centerline extract_centerline(std::span<const Pose2> poses, double dedup_distance,
                              int smooth_window, std::string source) {
  if (poses.size() < 2) fail(ErrorCode::kDegenerateTrace, "pose trace needs at least 2 poses");
  for (std::size_t k = 1; k < poses.size(); ++k) {
    if (poses[k].t < poses[k - 1].t) {
      fail(ErrorCode::kDegenerateTrace,
           "pose timestamps go backwards at index " + std::to_string(k));
    }
  }
  std::vector<Point2> raw;
  raw.reserve(poses.size());
  for (const auto& p : poses) raw.push_back({p.x, p.y});
  std::vector<Point2> kept = dedup_by_spacing(raw, dedup_distance);
  if (kept.size() < 2) {
    fail(ErrorCode::kDegenerateTrace, "fewer than 2 poses remain after deduplication");
  }

  const long half = std::max(0, smooth_window / 2);
  const long n = static_cast<long>(kept.size());
  std::vector<Point2> smooth(kept.size());
  for (long k = 0; k < n; ++k) {
    Point2 sum;
    for (long o = -half; o <= half; ++o) sum = sum + kept[std::clamp(k + o, 0L, n - 1)];
    smooth[k] = sum * (1.0 / static_cast<double>(2 * half + 1));
  }
  Centerline c;
  c.points = dedup_by_spacing(smooth, dedup_distance);
  c.source = std::move(source);
  if (c.points.size() < 2) {
    fail(ErrorCode::kDegenerateTrace, "fewer than 2 points remain after smoothing");
  }
  return c;
}

std::vector<Point2> offset_polyline(std::span<const Point2> points, double offset) {
  const auto pts = remove_duplicates(points, false);
  if (pts.size() < 2) fail(ErrorCode::kInvalidGeometry, "offset of a degenerate polyline");
  const double cap = 2.0 * std::abs(offset);
  std::vector<Point2> out;
  out.push_back(pts[0] + left_normal(pts[0], pts[1]) * offset);
  for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
    const Point2 n0 = left_normal(pts[k - 1], pts[k]);
    const Point2 n1 = left_normal(pts[k], pts[k + 1]);
    const Point2 sum = n0 + n1;
    const double len = norm(sum);
    bool bevel = len < 1e-9;
    if (!bevel) {
      const Point2 m = sum * (1.0 / len);
      const double miter = std::abs(offset) / dot(m, n1);
      if (miter <= cap) {
        out.push_back(pts[k] + m * (offset >= 0 ? miter : -miter));
      } else {
        bevel = true;
      }
    }
    if (bevel) {
      out.push_back(pts[k] + n0 * offset);
      out.push_back(pts[k] + n1 * offset);
    }
  }
  const std::size_t last = pts.size() - 1;
  out.push_back(pts[last] + left_normal(pts[last - 1], pts[last]) * offset);
  return remove_duplicates(excise_loops(std::move(out)), false);
}

RoadEdges offset_boundaries(const Centerline& center, const LaneSpec& spec) {
  if (!(spec.half_width > 0.0)) fail(ErrorCode::kInvalidGeometry, "half_width must be positive");
  RoadEdges r;
  r.left.id = "boundary_left";
  r.left.cls = MapClass::kBoundary;
  r.left.points = offset_polyline(center.points, spec.half_width);
  r.right.id = "boundary_right";
  r.right.cls = MapClass::kBoundary;
  r.right.points = offset_polyline(center.points, -spec.half_width);
  r.divider.id = "divider_center";
  r.divider.cls = MapClass::kDivider;
  r.divider.points = remove_duplicates(center.points, false);
  return r;
}

PlaneFit ransac_plane(std::span<const Point3> points, const RansacParams& params) {
  const std::size_t n = points.size();
  if (n < 3) fail(ErrorCode::kNoGroundFound, "RANSAC needs at least 3 points");
  const double max_gradient = std::tan(params.max_slope_deg * std::numbers::pi / 180.0);
  const double tol = params.inlier_tol;

  auto admissible = [&](double a, double b) { return std::hypot(a, b) <= max_gradient; };
  auto score = [&](double a, double b, double c, std::vector<std::size_t>* inliers) {
    std::size_t count = 0;
    double sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = points[k].z - (a * points[k].x + b * points[k].y + c);
      if (std::abs(r) <= tol) {
        ++count;
        sq += r * r;
        if (inliers) inliers->push_back(k);
      }
    }
    return std::pair{count, count ? std::sqrt(sq / static_cast<double>(count)) : 0.0};
  };

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  bool found = false;
  double best_a = 0, best_b = 0, best_c = 0;
  std::size_t best_count = 0;
  double best_rms = 0.0;
  for (int it = 0; it < params.iterations; ++it) {
    const std::size_t i0 = pick(rng);
    std::size_t i1 = pick(rng);
    while (i1 == i0) i1 = pick(rng);
    std::size_t i2 = pick(rng);
    while (i2 == i0 || i2 == i1) i2 = pick(rng);
    const Point3& p0 = points[i0];
    const Point3& p1 = points[i1];
    const Point3& p2 = points[i2];
    const double ux = p1.x - p0.x, uy = p1.y - p0.y, uz = p1.z - p0.z;
    const double vx = p2.x - p0.x, vy = p2.y - p0.y, vz = p2.z - p0.z;
    const double nx = uy * vz - uz * vy;
    const double ny = uz * vx - ux * vz;
    const double nz = ux * vy - uy * vx;
    const double nn = std::sqrt(nx * nx + ny * ny + nz * nz);
    // Collinear triples and near-vertical planes have no usable graph form.
    if (nn < 1e-12 || std::abs(nz) < 1e-9 * nn) continue;
    const double a = -nx / nz;
    const double b = -ny / nz;
    const double c = p0.z - a * p0.x - b * p0.y;
    if (!admissible(a, b)) continue;
    const auto [count, rms] = score(a, b, c, nullptr);
    if (!found || count > best_count || (count == best_count && rms < best_rms)) {
      found = true;
      best_a = a;
      best_b = b;
      best_c = c;
      best_count = count;
      best_rms = rms;
    }
  }
  if (!found) fail(ErrorCode::kNoGroundFound, "no admissible plane among RANSAC samples");

  PlaneFit fit{best_a, best_b, best_c, {}, 0.0};
  std::vector<std::size_t> inliers;
  score(best_a, best_b, best_c, &inliers);
  if (inliers.size() >= 3) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(inliers.size()), 3);
    Eigen::VectorXd z(static_cast<Eigen::Index>(inliers.size()));
    for (std::size_t r = 0; r < inliers.size(); ++r) {
      const auto& p = points[inliers[r]];
      const auto row = static_cast<Eigen::Index>(r);
      A(row, 0) = p.x;
      A(row, 1) = p.y;
      A(row, 2) = 1.0;
      z(row) = p.z;
    }
    const Eigen::Vector3d sol = A.colPivHouseholderQr().solve(z);
    if (sol.allFinite() && admissible(sol(0), sol(1))) {
      std::vector<std::size_t> refit_inliers;
      score(sol(0), sol(1), sol(2), &refit_inliers);
      if (refit_inliers.size() >= 3) {
        fit.a = sol(0);
        fit.b = sol(1);
        fit.c = sol(2);
        inliers = std::move(refit_inliers);
      }
    }
  }
  fit.inliers = std::move(inliers);
  fit.rms = score(fit.a, fit.b, fit.c, nullptr).second;
  return fit;
}

Rect GroundModel::tile_rect(int ti, int tj) const {
  return {origin.x + ti * tile_size, origin.y + tj * tile_size, origin.x + (ti + 1) * tile_size,
          origin.y + (tj + 1) * tile_size};
}

long GroundModel::tile_of(const Point2& p) const {
  const double fx = std::floor((p.x - origin.x) / tile_size);
  const double fy = std::floor((p.y - origin.y) / tile_size);
  if (fx < 0 || fy < 0 || fx >= nx || fy >= ny) return -1;
  return static_cast<long>(fy) * nx + static_cast<long>(fx);
}

std::size_t GroundModel::non_empty() const {
  return static_cast<std::size_t>(
      std::count_if(tiles.begin(), tiles.end(), [](const GroundTile& t) { return t.has_plane; }));
}

GroundModel build_ground_model(std::span<const Point3> cloud, const GroundParams& params) {
  if (cloud.empty()) fail(ErrorCode::kNoGroundFound, "empty point cloud");
  if (!(params.tile_size > 0.0)) fail(ErrorCode::kInvalidGeometry, "tile size must be positive");
  double xmin = cloud[0].x, ymin = cloud[0].y, xmax = xmin, ymax = ymin;
  for (const auto& p : cloud) {
    xmin = std::min(xmin, p.x);
    ymin = std::min(ymin, p.y);
    xmax = std::max(xmax, p.x);
    ymax = std::max(ymax, p.y);
  }
  GroundModel model;
  model.origin = {xmin, ymin};
  model.tile_size = params.tile_size;
  model.nx = static_cast<int>(std::floor((xmax - xmin) / params.tile_size)) + 1;
  model.ny = static_cast<int>(std::floor((ymax - ymin) / params.tile_size)) + 1;
  model.tiles.resize(static_cast<std::size_t>(model.nx) * model.ny);

  std::vector<std::vector<Point3>> buckets(model.tiles.size());
  for (const auto& p : cloud) buckets[static_cast<std::size_t>(model.tile_of(p.xy()))].push_back(p);

  for (int tj = 0; tj < model.ny; ++tj) {
    for (int ti = 0; ti < model.nx; ++ti) {
      const std::size_t index = static_cast<std::size_t>(tj) * model.nx + ti;
      GroundTile& tile = model.tiles[index];
      tile.ti = ti;
      tile.tj = tj;
      const auto& pts = buckets[index];
      if (pts.size() < params.min_inliers) continue;
      RansacParams rp = params.ransac;
      rp.seed = params.ransac.seed ^ index;
      try {
        const PlaneFit fit = ransac_plane(pts, rp);
        if (fit.inliers.size() < params.min_inliers) continue;
        tile.has_plane = true;
        tile.a = fit.a;
        tile.b = fit.b;
        tile.c = fit.c;
        for (std::size_t k : fit.inliers) tile.inliers.push_back(pts[k]);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoGroundFound) throw;
      }
    }
  }
  if (model.non_empty() == 0) fail(ErrorCode::kNoGroundFound, "no tile holds a ground plane");
  return model;
}

namespace {

class HeightLookup {
 public:
  HeightLookup(const GroundModel& model, const LiftParams& params)
      : model_(model), params_(params) {
    std::vector<Point2> xy;
    for (const auto& t : model.tiles) {
      for (const auto& p : t.inliers) {
        xy.push_back(p.xy());
        z_.push_back(p.z);
      }
    }
    tree_ = KdTree2(xy);
  }

  double operator()(const Point2& p) const {
    const auto hits = tree_.knn(p, params_.k, params_.radius);
    if (!hits.empty()) {
      double sum = 0.0;
      for (const auto& h : hits) sum += z_[h.index];
      return sum / static_cast<double>(hits.size());
    }
    const long own = model_.tile_of(p);
    if (own >= 0 && model_.tiles[static_cast<std::size_t>(own)].has_plane) {
      return model_.tiles[static_cast<std::size_t>(own)].z_at(p.x, p.y);
    }
    const GroundTile* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& t : model_.tiles) {
      if (!t.has_plane) continue;
      const Rect r = model_.tile_rect(t.ti, t.tj);
      const double dx = std::max({0.0, r.xmin - p.x, p.x - r.xmax});
      const double dy = std::max({0.0, r.ymin - p.y, p.y - r.ymax});
      const double d = std::hypot(dx, dy);
      if (d < best_d) {
        best_d = d;
        best = &t;
      }
    }
    return best->z_at(p.x, p.y);
  }

 private:
  const GroundModel& model_;
  LiftParams params_;
  KdTree2 tree_;
  std::vector<double> z_;
};

}  // namespace

double ground_height(const GroundModel& model, const Point2& p, const LiftParams& params) {
  if (model.non_empty() == 0) fail(ErrorCode::kNoGroundFound, "ground model has no planes");
  return HeightLookup(model, params)(p);
}

VectorMap lift_to_3d(const VectorMap& map2d, const GroundModel& model, const LiftParams& params) {
  if (model.non_empty() == 0) fail(ErrorCode::kNoGroundFound, "ground model has no planes");
  const HeightLookup lookup(model, params);
  VectorMap out = map2d;
  for (auto& e : out.elements) {
    e.z.clear();
    for (const auto& p : e.points) e.z.push_back(lookup(p));
  }
  return out;
}

VectorMap auto_label(std::span<const Pose2> poses, std::span<const Point3> cloud,
                     const LabelParams& params) {
  const Centerline center =
      extract_centerline(poses, params.dedup_distance, params.smooth_window);
  RoadEdges edges = offset_boundaries(center, params.lane);
  VectorMap map;
  map.elements = {std::move(edges.left), std::move(edges.right), std::move(edges.divider)};
  map.bounds = bounds_of(map.elements, 5.0);
  const GroundModel model = build_ground_model(cloud, params.ground);
  return lift_to_3d(map, model, params.lift);
}

}  // namespace mapweld
