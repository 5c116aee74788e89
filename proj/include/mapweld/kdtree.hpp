#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mapweld/types.hpp"

namespace mapweld {

/**
 * Static 2D k-d tree over a point set. The tree is an implicit balanced
 * layout: node ranges are split at the median along alternating axes, so
 * no per-node allocation happens. Queries return indices into the original
 * point array.
 */
class KdTree2 {
 public:
  struct Hit {
    std::size_t index = 0;
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  KdTree2() = default;
  explicit KdTree2(std::span<const Point2> points) : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    build(0, order_.size(), 0);
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point2& point(std::size_t index) const { return points_[index]; }

  // Exact nearest neighbour; ties resolve to the lowest index.
  Hit nearest(const Point2& q) const {
    Hit best;
    if (!empty()) nearest(q, 0, order_.size(), 0, best);
    return best;
  }

  // Up to k nearest points within `radius`, closest first.
  std::vector<Hit> knn(const Point2& q, std::size_t k,
                       double radius = std::numeric_limits<double>::infinity()) const {
    std::vector<Hit> heap;
    if (k == 0 || empty()) return heap;
    const double r2 = radius * radius;
    knn(q, k, r2, 0, order_.size(), 0, heap);
    std::sort_heap(heap.begin(), heap.end(), farther);
    return heap;
  }

 private:
  static bool farther(const Hit& a, const Hit& b) {
    if (a.squared_distance != b.squared_distance) return a.squared_distance < b.squared_distance;
    return a.index < b.index;
  }

  static double axis_value(const Point2& p, int axis) { return axis == 0 ? p.x : p.y; }

  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t a, std::size_t b) {
                       return axis_value(points_[a], axis) < axis_value(points_[b], axis);
                     });
    build(lo, mid, 1 - axis);
    build(mid + 1, hi, 1 - axis);
  }

  void nearest(const Point2& q, std::size_t lo, std::size_t hi, int axis, Hit& best) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t idx = order_[mid];
    const double d2 = squared_distance(q, points_[idx]);
    if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index)) {
      best = {idx, d2};
    }
    const double delta = axis_value(q, axis) - axis_value(points_[idx], axis);
    const bool left_first = delta < 0.0;
    if (left_first) {
      nearest(q, lo, mid, 1 - axis, best);
      if (delta * delta <= best.squared_distance) nearest(q, mid + 1, hi, 1 - axis, best);
    } else {
      nearest(q, mid + 1, hi, 1 - axis, best);
      if (delta * delta <= best.squared_distance) nearest(q, lo, mid, 1 - axis, best);
    }
  }

  void knn(const Point2& q, std::size_t k, double r2, std::size_t lo, std::size_t hi, int axis,
           std::vector<Hit>& heap) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t idx = order_[mid];
    const double d2 = squared_distance(q, points_[idx]);
    if (d2 <= r2) {
      const Hit hit{idx, d2};
      if (heap.size() < k) {
        heap.push_back(hit);
        std::push_heap(heap.begin(), heap.end(), farther);
      } else if (farther(hit, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), farther);
        heap.back() = hit;
        std::push_heap(heap.begin(), heap.end(), farther);
      }
    }
    const double delta = axis_value(q, axis) - axis_value(points_[idx], axis);
    auto bound = [&] { return heap.size() < k ? r2 : std::min(r2, heap.front().squared_distance); };
    const bool left_first = delta < 0.0;
    if (left_first) {
      knn(q, k, r2, lo, mid, 1 - axis, heap);
      if (delta * delta <= bound()) knn(q, k, r2, mid + 1, hi, 1 - axis, heap);
    } else {
      knn(q, k, r2, mid + 1, hi, 1 - axis, heap);
      if (delta * delta <= bound()) knn(q, k, r2, lo, mid, 1 - axis, heap);
    }
  }

  std::vector<Point2> points_;
  std::vector<std::size_t> order_;
};

}  // namespace mapweld
