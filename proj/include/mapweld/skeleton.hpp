#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mapweld/grid.hpp"
#include "mapweld/types.hpp"

namespace mapweld {

// Binary raster for one class layer.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

  BinaryImage() = default;
  BinaryImage(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool get(int i, int j) const {
    return i >= 0 && j >= 0 && i < width && j < height &&
           bits[static_cast<std::size_t>(j) * width + i] != 0;
  }
  void set(int i, int j, bool v) { bits[static_cast<std::size_t>(j) * width + i] = v ? 1 : 0; }
  std::size_t count() const;
};

// Zhang-Suen thinning to a fixpoint. Candidates of each sub-iteration are
// collected in parallel as usual, then confirmed one by one in row-major
// order against the current image, which keeps 2-cell-thick structures
// (2x2 blocks, thick diagonals) from vanishing.
BinaryImage thin(const BinaryImage& image);

// Number of 8-connected foreground components.
std::size_t count_components(const BinaryImage& image);

struct Skeleton {
  GridSpec spec;
  std::array<BinaryImage, kNumClasses> layers;

  friend bool operator==(const Skeleton&, const Skeleton&) = default;
};

Skeleton skeletonize(const DenseMask& mask);

struct SkeletonEdge {
  std::size_t from = 0;  // node index
  std::size_t to = 0;
  std::vector<CellIndex> cells;  // interior cells, from-side first
  bool loop = false;             // pure cycle anchored on a single node
};

/**
 * Node/edge decomposition of a 1-cell-wide skeleton. Adjacency is the mixed
 * (m-) adjacency: 4-neighbours always, diagonal neighbours only when neither
 * shared 4-neighbour is set. That removes the redundant corner links of
 * 8-connectivity, so an L-bend is a path and a plus sign has one junction.
 * Nodes are the cells whose m-degree is not 2, plus one anchor per pure
 * cycle.
 */
struct SkeletonGraph {
  std::vector<CellIndex> nodes;
  std::vector<SkeletonEdge> edges;
};

SkeletonGraph trace_skeleton(const BinaryImage& layer);

struct ExtractParams {
  double min_length = 2.0;     // meters
  double simplify_tol = 0.25;  // meters
  // Branches hanging off a junction that are shorter than this are pruned
  // before tracing; 0 disables pruning.
  double spur_length = 2.0;
  std::string frame_id = "map";
};

// Removes short end branches attached to junctions, repeating until stable.
BinaryImage prune_spurs(const BinaryImage& layer, double resolution, double spur_length);

// Vectorizes every class layer: one element per graph edge, at cell centres,
// Douglas-Peucker simplified, short ones dropped. Cycles become closed
// elements.
VectorMap extract_lines(const Skeleton& sk, const ExtractParams& params = {});

// accumulate -> threshold_mask -> skeletonize -> extract_lines.
VectorMap extract_from_frames(std::span<const FramePrediction> frames, const GridSpec& spec,
                              std::uint32_t threshold, const ExtractParams& params = {});
VectorMap extract_from_grid(const AccumulationGrid& grid, std::uint32_t threshold,
                            const ExtractParams& params = {});

}  // namespace mapweld
