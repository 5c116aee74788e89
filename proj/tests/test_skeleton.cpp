#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <doctest.h>

#include "mapweld/geometry.hpp"
#include "mapweld/metrics.hpp"
#include "mapweld/skeleton.hpp"
#include "mapweld/synth.hpp"
#include "generators.hpp"

using namespace mapweld;
using gen::blobby;

namespace {

// Textbook Zhang-Suen: both sub-iterations delete in parallel.
BinaryImage zhang_suen_reference(BinaryImage img) {
  auto p = [&](int i, int j) { return img.get(i, j) ? 1 : 0; };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int step = 0; step < 2; ++step) {
      std::vector<std::pair<int, int>> del;
      for (int j = 0; j < img.height; ++j) {
        for (int i = 0; i < img.width; ++i) {
          if (!img.get(i, j)) continue;
          // P2..P9 clockwise from north, with +j as north.
          const int n[8] = {p(i, j + 1), p(i + 1, j + 1), p(i + 1, j), p(i + 1, j - 1),
                            p(i, j - 1), p(i - 1, j - 1), p(i - 1, j), p(i - 1, j + 1)};
          int b = 0, a = 0;
          for (int k = 0; k < 8; ++k) {
            b += n[k];
            if (n[k] == 0 && n[(k + 1) % 8] == 1) ++a;
          }
          if (b < 2 || b > 6 || a != 1) continue;
          const bool c1 = step == 0 ? !(n[0] && n[2] && n[4]) : !(n[0] && n[2] && n[6]);
          const bool c2 = step == 0 ? !(n[2] && n[4] && n[6]) : !(n[0] && n[4] && n[6]);
          if (c1 && c2) del.emplace_back(i, j);
        }
      }
      for (auto [i, j] : del) img.set(i, j, false);
      if (!del.empty()) changed = true;
    }
  }
  return img;
}

BinaryImage bar(int w, int h, int x0, int y0, int len, int thick) {
  BinaryImage img(w, h);
  for (int j = y0; j < y0 + thick; ++j) {
    for (int i = x0; i < x0 + len; ++i) img.set(i, j, true);
  }
  return img;
}

bool subset(const BinaryImage& a, const BinaryImage& b) {
  for (std::size_t k = 0; k < a.bits.size(); ++k) {
    if (a.bits[k] && !b.bits[k]) return false;
  }
  return true;
}

Skeleton skeleton_with(const GridSpec& spec, MapClass cls, const BinaryImage& layer) {
  Skeleton sk;
  sk.spec = spec;
  for (auto& l : sk.layers) l = BinaryImage(spec.width, spec.height);
  sk.layers[class_index(cls)] = layer;
  return sk;
}

GridSpec spec_of(int w, int h, double res = 0.5, Point2 origin = {0, 0}) {
  GridSpec s;
  s.origin = origin;
  s.resolution = res;
  s.width = w;
  s.height = h;
  return s;
}

}  // namespace

TEST_CASE("thin examples") {
  CHECK(thin(BinaryImage(10, 10)).count() == 0);

  BinaryImage dot(5, 5);
  dot.set(2, 2, true);
  CHECK(thin(dot) == dot);

  const BinaryImage b = bar(26, 9, 3, 3, 20, 3);
  for (const BinaryImage& out : {thin(b), zhang_suen_reference(b)}) {
    for (int j = 0; j < out.height; ++j) {
      for (int i = 0; i < out.width; ++i) {
        if (out.get(i, j)) CHECK(j == 4);
      }
    }
    for (int i = 3 + 2; i < 3 + 20 - 2; ++i) CHECK(out.get(i, 4));
  }
}

TEST_CASE("thinning keeps a 2x2 block") {
  BinaryImage sq(6, 6);
  for (int j = 2; j < 4; ++j) {
    for (int i = 2; i < 4; ++i) sq.set(i, j, true);
  }
  const auto out = thin(sq);
  CHECK(out.count() >= 1);
  CHECK(count_components(out) == 1);
}

TEST_CASE("skeleton invariants on random blobby masks") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const BinaryImage m = blobby(rng, 48, 40);
    const BinaryImage s = thin(m);
    CHECK(subset(s, m));
    CHECK(count_components(s) == count_components(m));
    CHECK(thin(s) == s);

    // Cells sitting in a full 2x2 block, away from junctions.
    std::size_t fat = 0;
    auto degree = [&](int i, int j) {
      int n = 0;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) n += (di || dj) && s.get(i + di, j + dj);
      }
      return n;
    };
    for (int j = 0; j < s.height; ++j) {
      for (int i = 0; i < s.width; ++i) {
        if (!s.get(i, j) || degree(i, j) > 2) continue;
        bool in_block = false;
        for (int dj = -1; dj <= 0; ++dj) {
          for (int di = -1; di <= 0; ++di) {
            in_block |= s.get(i + di, j + dj) && s.get(i + di + 1, j + dj) &&
                        s.get(i + di, j + dj + 1) && s.get(i + di + 1, j + dj + 1);
          }
        }
        fat += in_block;
      }
    }
    CHECK(static_cast<double>(fat) <= 0.01 * static_cast<double>(s.count()));
  }
}

TEST_CASE("thin leaves 1-wide lines untouched by 2x2 blocks") {
  BinaryImage img(30, 30);
  for (int k = 2; k < 28; ++k) {
    img.set(k, 5, true);
    img.set(k, k, true);
  }
  const auto s = thin(img);
  for (int j = 0; j + 1 < s.height; ++j) {
    for (int i = 0; i + 1 < s.width; ++i) {
      CHECK_FALSE((s.get(i, j) && s.get(i + 1, j) && s.get(i, j + 1) && s.get(i + 1, j + 1)));
    }
  }
}

TEST_CASE("trace_skeleton examples") {
  BinaryImage run(14, 5);
  for (int i = 2; i < 12; ++i) run.set(i, 2, true);
  auto g = trace_skeleton(run);
  CHECK(g.nodes.size() == 2);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].cells.size() == 8);
  CHECK_FALSE(g.edges[0].loop);

  BinaryImage plus(11, 11);
  for (int k = 1; k < 10; ++k) {
    plus.set(k, 5, true);
    plus.set(5, k, true);
  }
  g = trace_skeleton(plus);
  // The four arm tips plus one junction.
  std::size_t junctions = 0;
  for (const auto& n : g.nodes) junctions += (n == CellIndex{5, 5});
  CHECK(junctions == 1);
  CHECK(g.nodes.size() == 5);
  CHECK(g.edges.size() == 4);

  BinaryImage ring(8, 8);
  for (int k = 2; k < 6; ++k) {
    ring.set(k, 2, true);
    ring.set(k, 5, true);
    ring.set(2, k, true);
    ring.set(5, k, true);
  }
  REQUIRE(ring.count() == 12);
  g = trace_skeleton(ring);
  CHECK(g.nodes.size() == 1);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].loop);
  CHECK(g.edges[0].from == g.edges[0].to);
}

TEST_CASE("every skeleton cell is a node or on exactly one edge") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const BinaryImage s = thin(blobby(rng, 48, 40));
    const auto g = trace_skeleton(s);
    std::map<CellIndex, int> seen;
    for (const auto& n : g.nodes) ++seen[n];
    for (const auto& e : g.edges) {
      for (const auto& c : e.cells) ++seen[c];
    }
    std::size_t cells = 0;
    for (const auto& [c, n] : seen) {
      CHECK(n == 1);
      CHECK(s.get(c.i, c.j));
      ++cells;
    }
    CHECK(cells == s.count());
  }
}

TEST_CASE("extract_lines examples") {
  const GridSpec spec = spec_of(30, 10);
  CHECK(extract_lines(skeleton_with(spec, MapClass::kDivider, BinaryImage(30, 10))).elements.empty());

  BinaryImage row(30, 10);
  for (int i = 0; i < 20; ++i) row.set(i, 4, true);
  const auto m = extract_lines(skeleton_with(spec, MapClass::kDivider, row));
  REQUIRE(m.elements.size() == 1);
  const auto& e = m.elements[0];
  CHECK(e.cls == MapClass::kDivider);
  REQUIRE(e.points.size() == 2);
  const Point2 a = e.points.front(), b = e.points.back();
  const Point2 lo = a.x < b.x ? a : b, hi = a.x < b.x ? b : a;
  CHECK(lo.x == doctest::Approx(0.25));
  CHECK(lo.y == doctest::Approx(2.25));
  CHECK(hi.x == doctest::Approx(9.75));
  CHECK(hi.y == doctest::Approx(2.25));

  BinaryImage speck(30, 10);
  speck.set(5, 5, true);
  CHECK(extract_lines(skeleton_with(spec, MapClass::kBoundary, speck)).elements.empty());
}

TEST_CASE("closed skeleton cycles become closed elements") {
  BinaryImage ring(40, 40);
  for (int k = 5; k < 25; ++k) {
    ring.set(k, 5, true);
    ring.set(k, 24, true);
    ring.set(5, k, true);
    ring.set(24, k, true);
  }
  const auto m = extract_lines(skeleton_with(spec_of(40, 40), MapClass::kCrosswalk, ring));
  REQUIRE(m.elements.size() == 1);
  CHECK(m.elements[0].closed);
  CHECK(m.elements[0].cls == MapClass::kCrosswalk);
  CHECK(m.elements[0].points.size() == 4);
}

TEST_CASE("prune_spurs removes short branches only") {
  BinaryImage img(40, 20);
  for (int i = 2; i < 38; ++i) img.set(i, 10, true);
  for (int j = 11; j < 13; ++j) img.set(20, j, true);  // 1 m spur
  for (int j = 2; j < 10; ++j) img.set(10, j, true);   // 4 m branch
  const auto out = prune_spurs(img, 0.5, 2.0);
  CHECK_FALSE(out.get(20, 12));
  CHECK(out.get(10, 3));
  CHECK(out.get(2, 10));
  CHECK(out.get(37, 10));
  CHECK(prune_spurs(img, 0.5, 0.0) == img);
}

TEST_CASE("extract_from_frames on a straight two-line road") {
  CHECK(extract_from_frames({}, spec_of(10, 10), 3).elements.empty());

  ScenarioSpec spec;
  spec.length = 100;
  const Scenario sc = generate_scenario(spec);
  const auto frames = simulate_frames(sc.gt, sc.drive_path, {}, 100.0 / 19.0);
  REQUIRE(frames.size() == 20);
  const GridSpec grid = grid_spec_for(sc.gt.bounds, 0.5, 5.0);
  const VectorMap out = extract_from_frames(frames, grid, 3);

  std::size_t nb = 0, nd = 0;
  for (const auto& e : out.elements) {
    nb += e.cls == MapClass::kBoundary;
    nd += e.cls == MapClass::kDivider;
    double best = 1e9;
    for (const auto& g : sc.gt.elements) {
      if (g.cls == e.cls) best = std::min(best, matching_distance(e, g));
    }
    CHECK(best <= 0.5);
  }
  CHECK(nb == 2);
  CHECK(nd == 1);

  // Spurious 3 m segments in 30% of frames stay below the count threshold.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-25, 25), uy(-12, 12), ang(0, 6.283);
  std::uniform_int_distribution<int> cls(0, 2);
  std::vector<FramePrediction> noisy = frames;
  for (std::size_t k = 0; k < noisy.size(); k += 3) {
    const Point2 p{ux(rng), uy(rng)};
    const double a = ang(rng);
    MapElement s;
    s.id = "spurious";
    s.cls = kAllClasses[cls(rng)];
    s.points = {p, {p.x + 3 * std::cos(a), p.y + 3 * std::sin(a)}};
    noisy[k].elements.push_back(s);
  }
  CHECK(extract_from_frames(noisy, grid, 3).elements.size() == out.elements.size());
}

TEST_CASE("extracted points of a straight line stay within half a cell diagonal") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ang(0, 3.14159), off(-0.5, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = ang(rng);
    const Point2 dir{std::cos(a), std::sin(a)};
    const Point2 c{off(rng), off(rng)};
    const std::vector<Point2> truth = {c - dir * 20.0, c + dir * 20.0};
    FramePrediction fp;
    MapElement e;
    e.id = "l";
    e.cls = MapClass::kDivider;
    e.points = truth;
    fp.elements.push_back(e);
    const std::vector<FramePrediction> frames(5, fp);
    const auto out = extract_from_frames(frames, grid_spec_for(frames), 3);
    REQUIRE_FALSE(out.elements.empty());
    for (const auto& el : out.elements) {
      for (const auto& p : el.points) {
        CHECK(point_polyline_distance(p, truth) <= 0.5 * std::sqrt(2.0) / 2.0 + 1e-9);
      }
    }
  }
}
