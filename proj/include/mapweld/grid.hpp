#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mapweld/types.hpp"

namespace mapweld {

struct GridSpec {
  Point2 origin;  // map-frame corner of cell (0, 0)
  double resolution = 0.5;
  int width = 1;
  int height = 1;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool in_bounds(int i, int j) const { return i >= 0 && j >= 0 && i < width && j < height; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(i);
  }
  Point2 cell_center(int i, int j) const {
    return {origin.x + (i + 0.5) * resolution, origin.y + (j + 0.5) * resolution};
  }
  Rect cell_rect(int i, int j) const {
    return {origin.x + i * resolution, origin.y + j * resolution,
            origin.x + (i + 1) * resolution, origin.y + (j + 1) * resolution};
  }
  Rect extent() const {
    return {origin.x, origin.y, origin.x + width * resolution, origin.y + height * resolution};
  }
};

void validate(const GridSpec& spec);

// Grid covering `area` grown by `pad`, with the corner snapped outward to a
// whole multiple of the resolution.
GridSpec grid_spec_for(const Rect& area, double resolution = 0.5, double pad = 5.0);
// Same, sized to every element of every frame after moving it to the map frame.
GridSpec grid_spec_for(std::span<const FramePrediction> frames, double resolution = 0.5,
                       double pad = 5.0);

struct CellIndex {
  int i = 0;
  int j = 0;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// Half-open, lower-inclusive cells; nullopt outside [0,W) x [0,H).
std::optional<CellIndex> point_to_cell(const GridSpec& spec, const Point2& p);

// Supercover: every in-grid cell whose closed square the polyline touches,
// sorted and unique. A polyline that collapses to one point yields that
// point's cell.
std::vector<CellIndex> rasterize_polyline(const GridSpec& spec, std::span<const Point2> points,
                                          bool closed = false);

struct AccumulationGrid {
  GridSpec spec;
  std::array<std::vector<std::uint32_t>, kNumClasses> counts;

  friend bool operator==(const AccumulationGrid&, const AccumulationGrid&) = default;

  explicit AccumulationGrid(const GridSpec& s = {});
  std::uint32_t at(MapClass c, int i, int j) const { return counts[class_index(c)][spec.index(i, j)]; }
  std::vector<std::uint32_t>& layer(MapClass c) { return counts[class_index(c)]; }
  const std::vector<std::uint32_t>& layer(MapClass c) const { return counts[class_index(c)]; }

  AccumulationGrid& operator+=(const AccumulationGrid& other);
};

struct DenseMask {
  GridSpec spec;
  std::array<std::vector<std::uint8_t>, kNumClasses> bits;

  friend bool operator==(const DenseMask&, const DenseMask&) = default;

  explicit DenseMask(const GridSpec& s = {});
  bool at(MapClass c, int i, int j) const { return bits[class_index(c)][spec.index(i, j)] != 0; }
  std::vector<std::uint8_t>& layer(MapClass c) { return bits[class_index(c)]; }
  const std::vector<std::uint8_t>& layer(MapClass c) const { return bits[class_index(c)]; }
};

// Adds one count per (frame, element) to every cell the element touches.
void accumulate_into(AccumulationGrid& grid, const FramePrediction& frame);
AccumulationGrid accumulate(std::span<const FramePrediction> frames, const GridSpec& spec);

// Bit set iff count > threshold.
DenseMask threshold_mask(const AccumulationGrid& grid, std::uint32_t threshold);

// 16-bit binary PGM of one class layer (north up) plus a "<stem>.grid.json"
// sidecar next to it.
void render_heatmap(const AccumulationGrid& grid, MapClass cls,
                    const std::filesystem::path& pgm_path);

// Directory form used by the CLI: <stem>.<class>.pgm per class plus
// <stem>.grid.json.
void save_grid(const std::filesystem::path& dir, const AccumulationGrid& grid,
               const std::string& stem = "accumulation");
AccumulationGrid load_grid(const std::filesystem::path& dir,
                           const std::string& stem = "accumulation");
void save_mask(const std::filesystem::path& dir, const DenseMask& mask,
               const std::string& stem = "mask");
DenseMask load_mask(const std::filesystem::path& dir, const std::string& stem = "mask");

// Raw PGM helpers; rows are stored top (j = H-1) first.
std::string encode_pgm16(const GridSpec& spec, std::span<const std::uint32_t> values);
std::vector<std::uint32_t> decode_pgm16(std::string_view data, const GridSpec& spec);

std::string grid_spec_to_json(const GridSpec& spec);
GridSpec grid_spec_from_json(std::string_view text);

}  // namespace mapweld
