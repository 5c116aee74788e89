#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "mapweld/geometry.hpp"
#include "mapweld/metrics.hpp"
#include "mapweld/skeleton.hpp"
#include "mapweld/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mapweld;
using testutil::error_code_of;

namespace {

MapElement el(std::string id, MapClass cls, std::vector<Point2> pts,
              std::optional<double> conf = std::nullopt, bool closed = false) {
  MapElement e;
  e.id = std::move(id);
  e.cls = cls;
  e.points = std::move(pts);
  e.confidence = conf;
  e.closed = closed;
  return e;
}

MapElement hline(std::string id, double y, double x0 = 0, double x1 = 10,
                 std::optional<double> conf = std::nullopt, MapClass cls = MapClass::kDivider) {
  return el(std::move(id), cls, {{x0, y}, {x1, y}}, conf);
}

VectorMap map_of(std::vector<MapElement> elements) {
  VectorMap m;
  m.elements = std::move(elements);
  m.bounds = bounds_of(m.elements);
  return m;
}

MapElement random_element(std::mt19937_64& rng, std::string id, MapClass cls, Point2 center,
                          double spread) {
  std::uniform_int_distribution<int> n(2, 8);
  auto pts = oracle::random_polyline(
      rng, n(rng), {center.x - spread, center.y - spread, center.x + spread, center.y + spread});
  std::uniform_real_distribution<double> conf(0, 1);
  return el(std::move(id), cls, pts, conf(rng));
}

}  // namespace

TEST_CASE("chamfer_eq2 examples") {
  const std::vector<Point2> a = {{0, 0}, {1, 2}, {3, -1}};
  CHECK(chamfer_eq2(a, a) == 0.0);
  const std::vector<Point2> p = {{0, 0}}, q = {{1, 0}};
  CHECK(chamfer_eq2(p, q) == 2.0);
  const std::vector<Point2> r = {{0, 0}, {1, 0}}, s = {{0, 1}, {1, 1}};
  CHECK(chamfer_eq2(r, s) == 2.0);
  CHECK(error_code_of([&] { chamfer_eq2(std::span<const Point2>(), q); }) == ErrorCode::kEmptySet);
}

TEST_CASE("chamfer_eq2 is symmetric") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point2> a(5 + trial % 7), b(3 + trial % 11);
    for (auto& p : a) p = {u(rng), u(rng)};
    for (auto& p : b) p = {u(rng), u(rng)};
    CHECK(std::abs(chamfer_eq2(a, b) - chamfer_eq2(b, a)) <= 1e-12);
  }
}

TEST_CASE("matching_distance examples") {
  const auto a = hline("a", 0);
  CHECK(matching_distance(a, a) == 0.0);
  CHECK(matching_distance(a, hline("b", 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(error_code_of([&] { matching_distance(a, hline("c", 0, 0, 10, {}, MapClass::kBoundary)); }) ==
        ErrorCode::kClassMismatch);
}

TEST_CASE("matching_distance equals the brute-force oracle") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    auto pts_a = oracle::random_polyline(rng, 20, {-4, -4, 4, 4});
    auto pts_b = oracle::random_polyline(rng, 20, {-3, -5, 5, 3});
    const auto a = el("a", MapClass::kBoundary, pts_a, {}, trial % 4 == 0);
    const auto b = el("b", MapClass::kBoundary, pts_b, {}, trial % 5 == 0);
    const double fast = matching_distance(a, b);
    CHECK(std::abs(fast - oracle::match_distance(a, b)) <= 1e-9);
    CHECK(std::abs(fast - matching_distance_brute_force(a, b)) <= 1e-9);
  }
}

TEST_CASE("match_instances examples") {
  const std::vector<MapElement> gt = {hline("g", 0)};
  auto m = match_instances(std::vector<MapElement>{hline("p", 0)}, gt, 0.5);
  REQUIRE(m.size() == 1);
  CHECK(m[0].gt_id == std::optional<std::string>("g"));
  CHECK(m[0].distance == 0.0);

  m = match_instances(std::vector<MapElement>{hline("p", 2.0)}, gt, 1.5);
  REQUIRE(m.size() == 1);
  CHECK_FALSE(m[0].gt_id);
}

TEST_CASE("match_instances agrees with exhaustive enumeration of the greedy rule") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> jitter(-1.2, 1.2);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<MapElement> gts = {hline("g0", 0), hline("g1", 2.0)};
    std::vector<MapElement> preds;
    const double confs[3] = {0.9, 0.8, 0.7};
    for (int k = 0; k < 3; ++k) {
      const double y = (k % 2 ? 2.0 : 0.0) + jitter(rng);
      preds.push_back(el("p" + std::to_string(k), MapClass::kDivider,
                         {{jitter(rng), y}, {10 + jitter(rng), y + 0.3 * jitter(rng)}}, confs[k]));
    }
    const double theta = 1.0;
    std::vector<std::vector<double>> d(3, std::vector<double>(2));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 2; ++j) d[i][j] = oracle::match_distance(preds[i], gts[j]);
    }
    const auto outcomes = oracle::greedy_outcomes(d, oracle::ranking(preds), theta);
    REQUIRE(outcomes.size() == 1);
    const auto got = match_instances(preds, gts, theta);
    REQUIRE(got.size() == 3);
    for (const auto& match : got) {
      const int i = match.pred_id.back() - '0';
      const int want = outcomes[0][i];
      if (want < 0) {
        CHECK_FALSE(match.gt_id);
      } else {
        CHECK(match.gt_id == std::optional<std::string>(gts[want].id));
      }
    }
  }
}

TEST_CASE("ranking: descending confidence, missing is 1.0, ties by id") {
  const std::vector<MapElement> preds = {hline("b", 0, 0, 10, 0.5), hline("c", 5), hline("a", 9),
                                         hline("d", 3, 0, 10, 0.5)};
  const auto m = match_instances(preds, std::vector<MapElement>{}, 1.0);
  REQUIRE(m.size() == 4);
  CHECK(m[0].pred_id == "a");
  CHECK(m[1].pred_id == "c");
  CHECK(m[2].pred_id == "b");
  CHECK(m[3].pred_id == "d");
}

TEST_CASE("average_precision examples") {
  const std::vector<MapElement> gts = {hline("g0", 0), hline("g1", 10)};
  CHECK(average_precision(gts, gts, 0.5) == 1.0);
  CHECK(average_precision(std::vector<MapElement>{}, gts, 0.5) == 0.0);
  CHECK(average_precision(std::vector<MapElement>{}, std::vector<MapElement>{}, 0.5) == 1.0);
  CHECK(average_precision(gts, std::vector<MapElement>{}, 0.5) == 0.0);

  const std::vector<MapElement> preds = {hline("p0", 0, 0, 10, 0.9), hline("p1", 50, 0, 10, 0.8),
                                         hline("p2", 10, 0, 10, 0.7)};
  const double ap = average_precision(preds, gts, 0.5);
  CHECK(std::abs(ap - 0.8333333333333333) <= 1e-9);
  CHECK(std::abs(ap - oracle::ap_from_hits({true, false, true}, 2)) <= 1e-12);
}

TEST_CASE("average_precision equals the naive PR sweep") {
  std::mt19937_64 rng(8);
  std::bernoulli_distribution hit(0.6);
  std::uniform_int_distribution<int> len(0, 12);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = len(rng);
    std::vector<Match> ranked;
    std::vector<bool> hits;
    std::size_t tp = 0;
    for (int k = 0; k < n; ++k) {
      Match m;
      m.pred_id = "p" + std::to_string(k);
      if (hit(rng)) {
        m.gt_id = "g" + std::to_string(tp++);
      }
      hits.push_back(m.gt_id.has_value());
      ranked.push_back(m);
    }
    const std::size_t ngt = tp + static_cast<std::size_t>(len(rng) % 3);
    CHECK(std::abs(average_precision(ranked, ngt) - oracle::ap_from_hits(hits, ngt)) <= 1e-12);
  }
}

TEST_CASE("AP bounds, threshold monotonicity and duplicate penalty") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> np(0, 6), ng(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<MapElement> preds, gts;
    const int n_g = ng(rng), n_p = np(rng);
    for (int k = 0; k < n_g; ++k) {
      gts.push_back(random_element(rng, "g" + std::to_string(k), MapClass::kBoundary,
                                   {10.0 * k, 0}, 3));
    }
    std::normal_distribution<double> shift(0, 0.8);
    for (int k = 0; k < n_p; ++k) {
      MapElement p = k < n_g ? translate(gts[k], shift(rng), shift(rng))
                             : random_element(rng, "x", MapClass::kBoundary, {10.0 * k, 5}, 3);
      p.id = "p" + std::to_string(k);
      p.confidence = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
      preds.push_back(p);
    }
    double prev = -1.0;
    for (double theta : {0.5, 1.0, 1.5}) {
      const double ap = average_precision(preds, gts, theta);
      CHECK(ap >= 0.0);
      CHECK(ap <= 1.0);
      CHECK(ap >= prev);
      prev = ap;
    }
    // A lower-confidence duplicate of a matched prediction never helps.
    const auto matches = match_instances(preds, gts, 1.0);
    for (const auto& m : matches) {
      if (!m.gt_id) continue;
      auto dup = *std::find_if(preds.begin(), preds.end(),
                               [&](const MapElement& e) { return e.id == m.pred_id; });
      dup.id = "zz_dup";
      dup.confidence = 0.01;
      auto more = preds;
      more.push_back(dup);
      CHECK(average_precision(more, gts, 1.0) <= average_precision(preds, gts, 1.0) + 1e-12);
      break;
    }
  }
}

TEST_CASE("evaluate examples") {
  const VectorMap gt = map_of({hline("b", 0, 0, 20, {}, MapClass::kBoundary), hline("d", 3),
                               el("c", MapClass::kCrosswalk, {{0, 5}, {4, 5}, {4, 8}, {0, 8}}, {},
                                  true)});
  const auto same = evaluate(gt, gt);
  CHECK(same.map == 1.0);
  for (MapClass c : kAllClasses) CHECK(same.of(c).mean_ap == 1.0);

  const auto none = evaluate(map_of({}), gt);
  CHECK(none.map == 0.0);

  // A class absent from both sides is vacuous and scores 1.0.
  const VectorMap only_b = map_of({hline("b", 0, 0, 20, {}, MapClass::kBoundary)});
  const auto vac = evaluate(only_b, only_b);
  CHECK(vac.of(MapClass::kDivider).vacuous);
  CHECK(vac.map == 1.0);
  CHECK(vac.worst_class_ap() == 1.0);

  VectorMap other = gt;
  other.frame_id = "odom";
  CHECK(error_code_of([&] { evaluate(other, gt); }) == ErrorCode::kFrameMismatch);
  CHECK(error_code_of([&] { evaluate(gt, gt, ApThresholds{{1.0, 0.5}}); }) ==
        ErrorCode::kInvalidGeometry);
}

TEST_CASE("evaluate on a noisy intersection equals the naive oracle") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::kIntersection;
  const Scenario sc = generate_scenario(spec);
  NoiseSpec noise;
  noise.point_sigma = 0.3;
  noise.seed = 42;
  const auto frames = simulate_frames(sc.gt, sc.drive_path, {}, 2.0, noise);
  const VectorMap pred = extract_from_frames(frames, grid_spec_for(sc.gt.bounds), 3);
  REQUIRE_FALSE(pred.elements.empty());
  const auto report = evaluate(pred, sc.gt);
  CHECK(std::abs(report.map - oracle::naive_map(pred, sc.gt)) <= 1e-9);
  // The per-threshold view must average back to the headline value.
  const double avg = (report.map_at(0) + report.map_at(1) + report.map_at(2)) / 3.0;
  CHECK(std::abs(avg - report.map) <= 1e-12);
}

TEST_CASE("evaluate is invariant under a shared rigid motion") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<MapElement> g, p;
    std::normal_distribution<double> shift(0, 0.7);
    for (int k = 0; k < 6; ++k) {
      const MapClass cls = kAllClasses[k % 3];
      g.push_back(random_element(rng, "g" + std::to_string(k), cls, {8.0 * k, 0}, 3));
      auto q = translate(g.back(), shift(rng), shift(rng));
      q.id = "p" + std::to_string(k);
      p.push_back(q);
    }
    const VectorMap gm = map_of(g), pm = map_of(p);
    const Pose2 motion{37.5, -12.25, 0.7 + 0.1 * trial, 0};
    auto moved = [&](const VectorMap& m) {
      VectorMap out = m;
      for (auto& e : out.elements) e = transform_element(e, motion);
      out.bounds = bounds_of(out.elements);
      return out;
    };
    const auto a = evaluate(pm, gm), b = evaluate(moved(pm), moved(gm));
    CHECK(std::abs(a.map - b.map) <= 1e-9);
    for (MapClass c : kAllClasses) {
      for (std::size_t t = 0; t < 3; ++t) CHECK(std::abs(a.of(c).ap[t] - b.of(c).ap[t]) <= 1e-9);
    }
  }
}

TEST_CASE("evaluate_per_cell examples") {
  ScenarioSpec spec;
  spec.length = 120;
  spec.heading = 1.5707963267948966;
  spec.crosswalk_stations = {45, 75};
  const Scenario sc = generate_scenario(spec);

  const auto cells = evaluate_per_cell(sc.gt, sc.gt);
  std::size_t evaluated = 0;
  for (const auto& c : cells) {
    if (c.vacuous) continue;
    ++evaluated;
    CHECK(c.report.map == 1.0);
  }
  CHECK(evaluated >= 4);

  // Remove the crosswalk at station 75 from the prediction.
  VectorMap pred = sc.gt;
  const auto removed = std::find_if(pred.elements.begin(), pred.elements.end(),
                                    [](const MapElement& e) { return e.id == "crosswalk_1"; });
  REQUIRE(removed != pred.elements.end());
  const Rect region = bounds_of({*removed});
  pred.elements.erase(removed);
  for (const auto& c : evaluate_per_cell(pred, sc.gt)) {
    if (c.vacuous) continue;
    if (c.rect.intersects(region)) {
      CHECK(c.report.map < 1.0);
    } else {
      CHECK(c.report.map == 1.0);
    }
  }

  const VectorMap small = map_of({hline("d", 0, 0, 12), hline("b", 3, 0, 12, {}, MapClass::kBoundary)});
  std::size_t non_vacuous = 0;
  for (const auto& c : evaluate_per_cell(small, small)) non_vacuous += !c.vacuous;
  CHECK(non_vacuous == 1);
}

TEST_CASE("per-cell lattice is anchored at the gt bounds corner") {
  const Rect anchor{-7, 3, 100, 50};
  const Rect r = cell_rect(anchor, 30, 2, 1);
  CHECK(r == Rect{53, 33, 83, 63});
}
