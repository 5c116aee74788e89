#include "mapweld/skeleton.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <utility>

#include "mapweld/geometry.hpp"

namespace mapweld {

std::size_t BinaryImage::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

namespace {

// Neighbours P2..P9 clockwise starting north (j + 1 is north).
constexpr std::array<std::pair<int, int>, 8> kRing = {
    {{0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}}};

struct Neighbourhood {
  std::array<bool, 8> p{};  // P2..P9
  int b = 0;                // set neighbours
  int a = 0;                // 0 -> 1 transitions around the ring
};

Neighbourhood neighbourhood(const BinaryImage& img, int i, int j) {
  Neighbourhood n;
  for (std::size_t k = 0; k < 8; ++k) {
    n.p[k] = img.get(i + kRing[k].first, j + kRing[k].second);
    n.b += n.p[k] ? 1 : 0;
  }
  for (std::size_t k = 0; k < 8; ++k) {
    if (!n.p[k] && n.p[(k + 1) % 8]) ++n.a;
  }
  return n;
}

bool deletable(const BinaryImage& img, int i, int j, int pass) {
  if (!img.get(i, j)) return false;
  const auto n = neighbourhood(img, i, j);
  if (n.b < 2 || n.b > 6 || n.a != 1) return false;
  const bool p2 = n.p[0], p4 = n.p[2], p6 = n.p[4], p8 = n.p[6];
  if (pass == 0) return !(p2 && p4 && p6) && !(p4 && p6 && p8);
  return !(p2 && p4 && p8) && !(p2 && p6 && p8);
}

// 4-neighbours, then diagonals not already bridged by a set 4-neighbour.
std::vector<CellIndex> m_neighbours(const BinaryImage& img, int i, int j) {
  std::vector<CellIndex> out;
  constexpr std::array<std::pair<int, int>, 4> kAxis = {{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  constexpr std::array<std::pair<int, int>, 4> kDiag = {{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  for (const auto& [di, dj] : kAxis) {
    if (img.get(i + di, j + dj)) out.push_back({i + di, j + dj});
  }
  for (const auto& [di, dj] : kDiag) {
    if (img.get(i + di, j + dj) && !img.get(i + di, j) && !img.get(i, j + dj)) {
      out.push_back({i + di, j + dj});
    }
  }
  return out;
}

double path_length(const std::vector<CellIndex>& path, double resolution) {
  double total = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    total += std::hypot(path[k].i - path[k - 1].i, path[k].j - path[k - 1].j);
  }
  return total * resolution;
}

}  // namespace

BinaryImage thin(const BinaryImage& image) {
  BinaryImage img = image;
  std::vector<CellIndex> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      candidates.clear();
      for (int j = 0; j < img.height; ++j) {
        for (int i = 0; i < img.width; ++i) {
          if (deletable(img, i, j, pass)) candidates.push_back({i, j});
        }
      }
      for (const auto& c : candidates) {
        if (deletable(img, c.i, c.j, pass)) {
          img.set(c.i, c.j, false);
          changed = true;
        }
      }
    }
  }
  return img;
}

std::size_t count_components(const BinaryImage& image) {
  std::vector<std::uint8_t> seen(image.bits.size(), 0);
  std::vector<CellIndex> stack;
  std::size_t components = 0;
  for (int j = 0; j < image.height; ++j) {
    for (int i = 0; i < image.width; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * image.width + i;
      if (!image.bits[k] || seen[k]) continue;
      ++components;
      seen[k] = 1;
      stack.push_back({i, j});
      while (!stack.empty()) {
        const auto c = stack.back();
        stack.pop_back();
        for (const auto& [di, dj] : kRing) {
          const int ni = c.i + di, nj = c.j + dj;
          if (!image.get(ni, nj)) continue;
          const std::size_t nk = static_cast<std::size_t>(nj) * image.width + ni;
          if (seen[nk]) continue;
          seen[nk] = 1;
          stack.push_back({ni, nj});
        }
      }
    }
  }
  return components;
}

Skeleton skeletonize(const DenseMask& mask) {
  Skeleton sk;
  sk.spec = mask.spec;
  for (MapClass c : kAllClasses) {
    BinaryImage img(mask.spec.width, mask.spec.height);
    img.bits = mask.layer(c);
    sk.layers[class_index(c)] = thin(img);
  }
  return sk;
}

SkeletonGraph trace_skeleton(const BinaryImage& layer) {
  SkeletonGraph g;
  const int w = layer.width;
  auto key = [w](const CellIndex& c) { return static_cast<std::size_t>(c.j) * w + c.i; };

  std::vector<long> node_of(layer.bits.size(), -1);
  for (int j = 0; j < layer.height; ++j) {
    for (int i = 0; i < w; ++i) {
      if (!layer.get(i, j)) continue;
      if (m_neighbours(layer, i, j).size() != 2) {
        node_of[key({i, j})] = static_cast<long>(g.nodes.size());
        g.nodes.push_back({i, j});
      }
    }
  }

  std::vector<std::uint8_t> visited(layer.bits.size(), 0);
  std::set<std::pair<std::size_t, std::size_t>> direct;

  // Follows degree-2 cells from `first` until a node is reached.
  auto walk = [&](std::size_t from, CellIndex start, CellIndex first) {
    SkeletonEdge edge;
    edge.from = from;
    CellIndex prev = start;
    CellIndex cur = first;
    while (node_of[key(cur)] < 0) {
      visited[key(cur)] = 1;
      edge.cells.push_back(cur);
      const auto nbrs = m_neighbours(layer, cur.i, cur.j);
      const CellIndex next = nbrs[0] == prev ? nbrs[1] : nbrs[0];
      prev = cur;
      cur = next;
    }
    edge.to = static_cast<std::size_t>(node_of[key(cur)]);
    return edge;
  };

  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    const CellIndex node = g.nodes[n];
    for (const auto& nb : m_neighbours(layer, node.i, node.j)) {
      const long other = node_of[key(nb)];
      if (other >= 0) {
        const auto pair = std::minmax(n, static_cast<std::size_t>(other));
        if (direct.insert(pair).second) {
          g.edges.push_back({n, static_cast<std::size_t>(other), {}, false});
        }
        continue;
      }
      if (visited[key(nb)]) continue;
      g.edges.push_back(walk(n, node, nb));
    }
  }

  // Whatever is left is made of pure cycles.
  for (int j = 0; j < layer.height; ++j) {
    for (int i = 0; i < w; ++i) {
      const CellIndex c{i, j};
      if (!layer.get(i, j) || visited[key(c)] || node_of[key(c)] >= 0) continue;
      const std::size_t anchor = g.nodes.size();
      node_of[key(c)] = static_cast<long>(anchor);
      g.nodes.push_back(c);
      const auto nbrs = m_neighbours(layer, i, j);
      SkeletonEdge edge = walk(anchor, c, nbrs[0]);
      edge.loop = true;
      g.edges.push_back(std::move(edge));
    }
  }
  return g;
}

BinaryImage prune_spurs(const BinaryImage& layer, double resolution, double spur_length) {
  BinaryImage img = layer;
  if (!(spur_length > 0.0)) return img;
  for (int round = 0; round < 64; ++round) {
    const SkeletonGraph g = trace_skeleton(img);
    std::vector<std::size_t> degree(g.nodes.size(), 0);
    for (std::size_t n = 0; n < g.nodes.size(); ++n) {
      degree[n] = m_neighbours(img, g.nodes[n].i, g.nodes[n].j).size();
    }
    bool removed = false;
    for (const auto& e : g.edges) {
      if (e.loop || e.from == e.to) continue;
      const bool from_end = degree[e.from] == 1 && degree[e.to] >= 3;
      const bool to_end = degree[e.to] == 1 && degree[e.from] >= 3;
      if (!from_end && !to_end) continue;
      std::vector<CellIndex> path = {g.nodes[e.from]};
      path.insert(path.end(), e.cells.begin(), e.cells.end());
      path.push_back(g.nodes[e.to]);
      if (path_length(path, resolution) >= spur_length) continue;
      const CellIndex tip = from_end ? g.nodes[e.from] : g.nodes[e.to];
      img.set(tip.i, tip.j, false);
      for (const auto& c : e.cells) img.set(c.i, c.j, false);
      removed = true;
    }
    if (!removed) break;
  }
  return img;
}

VectorMap extract_lines(const Skeleton& sk, const ExtractParams& params) {
  VectorMap out;
  out.frame_id = params.frame_id;
  out.bounds = sk.spec.extent();
  for (MapClass cls : kAllClasses) {
    const BinaryImage layer =
        prune_spurs(sk.layers[class_index(cls)], sk.spec.resolution, params.spur_length);
    const SkeletonGraph g = trace_skeleton(layer);
    int serial = 0;
    for (const auto& e : g.edges) {
      const bool ring = e.loop || (e.from == e.to && e.cells.size() >= 2);
      std::vector<Point2> pts;
      const CellIndex a = g.nodes[e.from];
      pts.push_back(sk.spec.cell_center(a.i, a.j));
      for (const auto& c : e.cells) pts.push_back(sk.spec.cell_center(c.i, c.j));
      if (!ring) {
        const CellIndex b = g.nodes[e.to];
        pts.push_back(sk.spec.cell_center(b.i, b.j));
      }
      if (ring) {
        pts = simplify_ring(pts, params.simplify_tol);
      } else {
        pts = simplify_polyline(pts, params.simplify_tol);
      }
      pts = remove_duplicates(pts, ring);
      if (pts.size() < 2 || (ring && pts.size() < 3)) continue;
      if (polyline_length(pts, ring) < params.min_length) continue;
      MapElement el;
      char id[48];
      std::snprintf(id, sizeof(id), "%s_%04d", std::string(to_string(cls)).c_str(), serial++);
      el.id = id;
      el.cls = cls;
      el.points = std::move(pts);
      el.closed = ring;
      out.elements.push_back(std::move(el));
    }
  }
  return out;
}

VectorMap extract_from_grid(const AccumulationGrid& grid, std::uint32_t threshold,
                            const ExtractParams& params) {
  return extract_lines(skeletonize(threshold_mask(grid, threshold)), params);
}

VectorMap extract_from_frames(std::span<const FramePrediction> frames, const GridSpec& spec,
                              std::uint32_t threshold, const ExtractParams& params) {
  return extract_from_grid(accumulate(frames, spec), threshold, params);
}

}  // namespace mapweld
