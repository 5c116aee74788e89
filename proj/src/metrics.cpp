#include "mapweld/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mapweld/error.hpp"
#include "mapweld/geometry.hpp"
#include "mapweld/kdtree.hpp"

namespace mapweld {

void validate(const ApThresholds& t) {
  if (t.thresholds.empty()) fail(ErrorCode::kInvalidGeometry, "no AP thresholds");
  for (std::size_t k = 0; k < t.thresholds.size(); ++k) {
    if (!(t.thresholds[k] > 0.0) || (k > 0 && !(t.thresholds[k] > t.thresholds[k - 1]))) {
      fail(ErrorCode::kInvalidGeometry, "AP thresholds must be positive and strictly increasing");
    }
  }
}

namespace {

struct PreparedElement {
  std::vector<Point2> samples;
  KdTree2 tree;
  Rect box;
};

PreparedElement prepare(const MapElement& e, const ChamferParams& params) {
  PreparedElement p;
  p.samples = densify(e, params.sample_step);
  p.tree = KdTree2(p.samples);
  p.box = bounds_of({e});
  return p;
}

double rect_gap(const Rect& a, const Rect& b) {
  const double dx = std::max({0.0, a.xmin - b.xmax, b.xmin - a.xmax});
  const double dy = std::max({0.0, a.ymin - b.ymax, b.ymin - a.ymax});
  return std::hypot(dx, dy);
}

double directed_mean(const std::vector<Point2>& from, const KdTree2& to) {
  double total = 0.0;
  for (const auto& p : from) total += std::sqrt(to.nearest(p).squared_distance);
  return total / static_cast<double>(from.size());
}

double prepared_distance(const PreparedElement& a, const PreparedElement& b) {
  return 0.5 * (directed_mean(a.samples, b.tree) + directed_mean(b.samples, a.tree));
}

void check_classes(const MapElement& pred, const MapElement& gt) {
  if (pred.cls != gt.cls) {
    fail(ErrorCode::kClassMismatch, "cannot match " + std::string(to_string(pred.cls)) +
                                        " '" + pred.id + "' against " +
                                        std::string(to_string(gt.cls)) + " '" + gt.id + "'");
  }
}

std::vector<std::size_t> ranking(std::span<const MapElement> preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ca = preds[a].score();
    const double cb = preds[b].score();
    if (ca != cb) return ca > cb;
    return preds[a].id < preds[b].id;
  });
  return order;
}

constexpr double kNoMatch = std::numeric_limits<double>::infinity();

// Pairwise distances; pairs whose boxes are at least `cutoff` apart are left
// at infinity since their distance cannot be below any threshold <= cutoff.
std::vector<std::vector<double>> distance_matrix(std::span<const MapElement> preds,
                                                 std::span<const MapElement> gts, double cutoff,
                                                 const ChamferParams& params) {
  std::vector<PreparedElement> p, g;
  for (const auto& e : preds) p.push_back(prepare(e, params));
  for (const auto& e : gts) g.push_back(prepare(e, params));
  std::vector<std::vector<double>> d(preds.size(), std::vector<double>(gts.size(), kNoMatch));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      check_classes(preds[i], gts[j]);
      if (rect_gap(p[i].box, g[j].box) >= cutoff) continue;
      d[i][j] = prepared_distance(p[i], g[j]);
    }
  }
  return d;
}

std::vector<Match> greedy_match(std::span<const MapElement> preds, std::span<const MapElement> gts,
                                const std::vector<std::vector<double>>& d, double theta) {
  std::vector<bool> taken(gts.size(), false);
  std::vector<Match> out;
  for (std::size_t i : ranking(preds)) {
    Match m{preds[i].id, std::nullopt, 0.0, preds[i].score()};
    std::size_t best = gts.size();
    double best_d = theta;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (!taken[j] && d[i][j] < best_d) {
        best_d = d[i][j];
        best = j;
      }
    }
    if (best < gts.size()) {
      taken[best] = true;
      m.gt_id = gts[best].id;
      m.distance = best_d;
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

double chamfer_eq2(std::span<const Point2> a, std::span<const Point2> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kEmptySet, "Chamfer distance of an empty set");
  const KdTree2 ta(a);
  const KdTree2 tb(b);
  double sa = 0.0;
  for (const auto& p : a) sa += tb.nearest(p).squared_distance;
  double sb = 0.0;
  for (const auto& p : b) sb += ta.nearest(p).squared_distance;
  return sa / static_cast<double>(a.size()) + sb / static_cast<double>(b.size());
}

double matching_distance(const MapElement& pred, const MapElement& gt,
                         const ChamferParams& params) {
  check_classes(pred, gt);
  return prepared_distance(prepare(pred, params), prepare(gt, params));
}

double matching_distance_brute_force(const MapElement& pred, const MapElement& gt,
                                     const ChamferParams& params) {
  check_classes(pred, gt);
  const auto a = densify(pred, params.sample_step);
  const auto b = densify(gt, params.sample_step);
  auto directed = [](const std::vector<Point2>& from, const std::vector<Point2>& to) {
    double total = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, squared_distance(p, q));
      total += std::sqrt(best);
    }
    return total / static_cast<double>(from.size());
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

std::vector<Match> match_instances(std::span<const MapElement> preds,
                                   std::span<const MapElement> gts, double theta,
                                   const ChamferParams& params) {
  return greedy_match(preds, gts, distance_matrix(preds, gts, theta, params), theta);
}

double average_precision(std::span<const Match> ranked, std::size_t num_gts) {
  if (num_gts == 0) return ranked.empty() ? 1.0 : 0.0;
  if (ranked.empty()) return 0.0;
  std::vector<double> precision(ranked.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (ranked[k].gt_id) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  for (std::size_t k = ranked.size() - 1; k > 0; --k) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (ranked[k].gt_id) ap += precision[k];
  }
  return ap / static_cast<double>(num_gts);
}

double average_precision(std::span<const MapElement> preds, std::span<const MapElement> gts,
                         double theta, const ChamferParams& params) {
  const auto ranked = match_instances(preds, gts, theta, params);
  return average_precision(ranked, gts.size());
}

double EvalReport::map_at(std::size_t threshold_index) const {
  double total = 0.0;
  for (const auto& c : classes) total += c.ap.at(threshold_index);
  return total / static_cast<double>(kNumClasses);
}

double EvalReport::worst_class_ap() const {
  double worst = 1.0;
  for (const auto& c : classes) {
    if (!c.vacuous) worst = std::min(worst, c.mean_ap);
  }
  return worst;
}

EvalReport evaluate(const VectorMap& pred, const VectorMap& gt, const ApThresholds& thresholds,
                    const ChamferParams& params) {
  validate(thresholds);
  if (pred.frame_id != gt.frame_id) {
    fail(ErrorCode::kFrameMismatch,
         "prediction frame '" + pred.frame_id + "' differs from gt frame '" + gt.frame_id + "'");
  }
  EvalReport report;
  report.thresholds = thresholds.thresholds;
  const std::size_t nt = thresholds.thresholds.size();
  double total = 0.0;
  for (MapClass cls : kAllClasses) {
    std::vector<MapElement> p, g;
    for (const auto& e : pred.elements) {
      if (e.cls == cls) p.push_back(e);
    }
    for (const auto& e : gt.elements) {
      if (e.cls == cls) g.push_back(e);
    }
    ClassReport& cr = report.classes[class_index(cls)];
    cr.ap.assign(nt, 0.0);
    cr.matches.assign(nt, {});
    if (p.empty() && g.empty()) {
      cr.vacuous = true;
      cr.ap.assign(nt, 1.0);
    } else {
      const auto d = distance_matrix(p, g, thresholds.thresholds.back(), params);
      for (std::size_t t = 0; t < nt; ++t) {
        cr.matches[t] = greedy_match(p, g, d, thresholds.thresholds[t]);
        cr.ap[t] = average_precision(cr.matches[t], g.size());
      }
    }
    cr.mean_ap = std::accumulate(cr.ap.begin(), cr.ap.end(), 0.0) / static_cast<double>(nt);
    total += cr.mean_ap;
  }
  report.map = total / static_cast<double>(kNumClasses);
  return report;
}

Rect cell_rect(const Rect& anchor_bounds, double cell_size, int ci, int cj) {
  return {anchor_bounds.xmin + ci * cell_size, anchor_bounds.ymin + cj * cell_size,
          anchor_bounds.xmin + (ci + 1) * cell_size, anchor_bounds.ymin + (cj + 1) * cell_size};
}

std::vector<CellEval> evaluate_per_cell(const VectorMap& pred, const VectorMap& gt,
                                        double cell_size, const ApThresholds& thresholds,
                                        const ChamferParams& params) {
  if (!(cell_size > 0.0)) fail(ErrorCode::kInvalidGeometry, "cell size must be positive");
  if (pred.frame_id != gt.frame_id) {
    fail(ErrorCode::kFrameMismatch,
         "prediction frame '" + pred.frame_id + "' differs from gt frame '" + gt.frame_id + "'");
  }
  // The lattice is anchored at the gt min corner and grown to cover any
  // prediction that extends past the gt bounds.
  Rect cover = gt.bounds;
  if (!pred.elements.empty()) {
    const Rect pb = bounds_of(pred.elements);
    cover = {std::min(cover.xmin, pb.xmin), std::min(cover.ymin, pb.ymin),
             std::max(cover.xmax, pb.xmax), std::max(cover.ymax, pb.ymax)};
  }
  const double ax = gt.bounds.xmin;
  const double ay = gt.bounds.ymin;
  const int ci0 = static_cast<int>(std::floor((cover.xmin - ax) / cell_size));
  const int cj0 = static_cast<int>(std::floor((cover.ymin - ay) / cell_size));
  const int ci1 = std::max(ci0 + 1, static_cast<int>(std::ceil((cover.xmax - ax) / cell_size)));
  const int cj1 = std::max(cj0 + 1, static_cast<int>(std::ceil((cover.ymax - ay) / cell_size)));

  std::vector<CellEval> cells;
  for (int cj = cj0; cj < cj1; ++cj) {
    for (int ci = ci0; ci < ci1; ++ci) {
      CellEval cell;
      cell.ci = ci;
      cell.cj = cj;
      cell.rect = cell_rect(gt.bounds, cell_size, ci, cj);
      VectorMap p{pred.frame_id, cell.rect, {}};
      VectorMap g{gt.frame_id, cell.rect, {}};
      for (const auto& e : pred.elements) {
        for (auto& piece : clip_to_rect(e, cell.rect)) p.elements.push_back(std::move(piece));
      }
      for (const auto& e : gt.elements) {
        for (auto& piece : clip_to_rect(e, cell.rect)) g.elements.push_back(std::move(piece));
      }
      cell.vacuous = p.elements.empty() && g.elements.empty();
      if (!cell.vacuous) cell.report = evaluate(p, g, thresholds, params);
      cell.pred_clipped = std::move(p.elements);
      cell.gt_clipped = std::move(g.elements);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace mapweld
