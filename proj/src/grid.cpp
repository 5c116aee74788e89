#include "mapweld/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "mapweld/error.hpp"
#include "mapweld/geometry.hpp"
#include "mapweld/io.hpp"

namespace mapweld {

namespace fs = std::filesystem;

void validate(const GridSpec& spec) {
  if (!(spec.resolution > 0.0) || spec.width < 1 || spec.height < 1 ||
      !is_finite(spec.origin)) {
    fail(ErrorCode::kInvalidGeometry, "grid spec needs resolution > 0 and W, H >= 1");
  }
}

GridSpec grid_spec_for(const Rect& area, double resolution, double pad) {
  if (!(resolution > 0.0)) fail(ErrorCode::kInvalidGeometry, "resolution must be positive");
  GridSpec spec;
  spec.resolution = resolution;
  spec.origin = {std::floor((area.xmin - pad) / resolution) * resolution,
                 std::floor((area.ymin - pad) / resolution) * resolution};
  spec.width = std::max(1, static_cast<int>(std::ceil((area.xmax + pad - spec.origin.x) / resolution)));
  spec.height = std::max(1, static_cast<int>(std::ceil((area.ymax + pad - spec.origin.y) / resolution)));
  return spec;
}

GridSpec grid_spec_for(std::span<const FramePrediction> frames, double resolution, double pad) {
  std::vector<MapElement> all;
  for (const auto& fp : frames) {
    auto moved = transform_frame(fp);
    all.insert(all.end(), std::make_move_iterator(moved.begin()),
               std::make_move_iterator(moved.end()));
  }
  if (all.empty()) return grid_spec_for(Rect{0.0, 0.0, 0.0, 0.0}, resolution, 0.0);
  return grid_spec_for(bounds_of(all), resolution, pad);
}

std::optional<CellIndex> point_to_cell(const GridSpec& spec, const Point2& p) {
  const double u = std::floor((p.x - spec.origin.x) / spec.resolution);
  const double v = std::floor((p.y - spec.origin.y) / spec.resolution);
  if (!(u >= 0.0 && v >= 0.0 && u < spec.width && v < spec.height)) return std::nullopt;
  return CellIndex{static_cast<int>(u), static_cast<int>(v)};
}

namespace {

int clamp_index(double v, int hi) {
  if (v < 0.0) return 0;
  if (v > hi) return hi;
  return static_cast<int>(v);
}

// Cells whose closed unit square (in grid units) meets segment a-b.
void supercover_segment(const GridSpec& spec, Point2 a, Point2 b, std::vector<CellIndex>& out) {
  const double inv = 1.0 / spec.resolution;
  a = {(a.x - spec.origin.x) * inv, (a.y - spec.origin.y) * inv};
  b = {(b.x - spec.origin.x) * inv, (b.y - spec.origin.y) * inv};
  if (a.x > b.x) std::swap(a, b);
  if (b.x < -1.0 || a.x > spec.width + 1.0) return;

  const double slope_valid = b.x - a.x;
  const int i_lo = clamp_index(std::ceil(a.x) - 1.0, spec.width - 1);
  const int i_hi = clamp_index(std::floor(b.x), spec.width - 1);
  for (int i = i_lo; i <= i_hi; ++i) {
    const double x0 = std::max(a.x, static_cast<double>(i));
    const double x1 = std::min(b.x, static_cast<double>(i + 1));
    if (x0 > x1) continue;
    double v0, v1;
    if (slope_valid == 0.0) {
      v0 = std::min(a.y, b.y);
      v1 = std::max(a.y, b.y);
    } else {
      const double m = (b.y - a.y) / slope_valid;
      v0 = x0 == a.x ? a.y : a.y + (x0 - a.x) * m;
      v1 = x1 == b.x ? b.y : a.y + (x1 - a.x) * m;
      if (v0 > v1) std::swap(v0, v1);
    }
    if (v1 < -1.0 || v0 > spec.height + 1.0) continue;
    const int j_lo = clamp_index(std::ceil(v0) - 1.0, spec.height - 1);
    const int j_hi = clamp_index(std::floor(v1), spec.height - 1);
    for (int j = j_lo; j <= j_hi; ++j) {
      // The clamps above can pull in cells the segment never reaches.
      if (i + 1 < a.x || i > b.x || j + 1 < v0 || j > v1) continue;
      out.push_back({i, j});
    }
  }
}

}  // namespace

std::vector<CellIndex> rasterize_polyline(const GridSpec& spec, std::span<const Point2> points,
                                          bool closed) {
  const auto pts = remove_duplicates(points, closed);
  std::vector<CellIndex> cells;
  if (pts.empty()) return cells;
  if (pts.size() == 1) {
    if (auto c = point_to_cell(spec, pts.front())) cells.push_back(*c);
    return cells;
  }
  for (std::size_t k = 1; k < pts.size(); ++k) supercover_segment(spec, pts[k - 1], pts[k], cells);
  if (closed && pts.size() > 2) supercover_segment(spec, pts.back(), pts.front(), cells);
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

AccumulationGrid::AccumulationGrid(const GridSpec& s) : spec(s) {
  for (auto& layer : counts) layer.assign(spec.cell_count(), 0);
}

AccumulationGrid& AccumulationGrid::operator+=(const AccumulationGrid& other) {
  if (!(other.spec == spec)) fail(ErrorCode::kInvalidGeometry, "adding grids with different specs");
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t k = 0; k < counts[c].size(); ++k) counts[c][k] += other.counts[c][k];
  }
  return *this;
}

DenseMask::DenseMask(const GridSpec& s) : spec(s) {
  for (auto& layer : bits) layer.assign(spec.cell_count(), 0);
}

void accumulate_into(AccumulationGrid& grid, const FramePrediction& frame) {
  for (const auto& e : transform_frame(frame)) {
    auto& layer = grid.layer(e.cls);
    for (const auto& c : rasterize_polyline(grid.spec, e.points, e.closed)) {
      ++layer[grid.spec.index(c.i, c.j)];
    }
  }
}

AccumulationGrid accumulate(std::span<const FramePrediction> frames, const GridSpec& spec) {
  validate(spec);
  AccumulationGrid grid(spec);
  for (const auto& fp : frames) accumulate_into(grid, fp);
  return grid;
}

DenseMask threshold_mask(const AccumulationGrid& grid, std::uint32_t threshold) {
  DenseMask mask(grid.spec);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t k = 0; k < grid.counts[c].size(); ++k) {
      mask.bits[c][k] = grid.counts[c][k] > threshold ? 1 : 0;
    }
  }
  return mask;
}

std::string encode_pgm16(const GridSpec& spec, std::span<const std::uint32_t> values) {
  std::string out = "P5\n" + std::to_string(spec.width) + " " + std::to_string(spec.height) +
                    "\n65535\n";
  out.reserve(out.size() + spec.cell_count() * 2);
  for (int j = spec.height - 1; j >= 0; --j) {
    for (int i = 0; i < spec.width; ++i) {
      const auto v = std::min<std::uint32_t>(values[spec.index(i, j)], 65535);
      out.push_back(static_cast<char>((v >> 8) & 0xFF));
      out.push_back(static_cast<char>(v & 0xFF));
    }
  }
  return out;
}

std::vector<std::uint32_t> decode_pgm16(std::string_view data, const GridSpec& spec) {
  // Header: "P5" whitespace width whitespace height whitespace maxval, one
  // whitespace byte, then big-endian samples.
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return std::string(data.substr(start, pos - start));
  };
  if (next_token() != "P5") fail(ErrorCode::kParseError, "not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    fail(ErrorCode::kParseError, "malformed PGM header");
  }
  if (w != spec.width || h != spec.height) {
    fail(ErrorCode::kParseError, "PGM size does not match the grid sidecar");
  }
  ++pos;
  const std::size_t bytes = maxval > 255 ? 2 : 1;
  if (data.size() - pos < spec.cell_count() * bytes) fail(ErrorCode::kParseError, "truncated PGM");
  std::vector<std::uint32_t> values(spec.cell_count(), 0);
  for (int j = spec.height - 1; j >= 0; --j) {
    for (int i = 0; i < spec.width; ++i) {
      std::uint32_t v = static_cast<unsigned char>(data[pos++]);
      if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(data[pos++]);
      values[spec.index(i, j)] = v;
    }
  }
  return values;
}

std::string grid_spec_to_json(const GridSpec& spec) {
  nlohmann::ordered_json j;
  j["origin"] = {spec.origin.x, spec.origin.y};
  j["resolution"] = spec.resolution;
  j["width"] = spec.width;
  j["height"] = spec.height;
  return j.dump(2) + "\n";
}

GridSpec grid_spec_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    GridSpec spec;
    spec.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
    spec.resolution = j.at("resolution").get<double>();
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParseError, std::string("grid sidecar: ") + e.what());
  }
}

void render_heatmap(const AccumulationGrid& grid, MapClass cls, const fs::path& pgm_path) {
  io::write_file_atomic(pgm_path, encode_pgm16(grid.spec, grid.layer(cls)));
  fs::path sidecar = pgm_path;
  sidecar.replace_extension(".grid.json");
  io::write_file_atomic(sidecar, grid_spec_to_json(grid.spec));
}

namespace {

fs::path layer_path(const fs::path& dir, const std::string& stem, MapClass c) {
  return dir / (stem + "." + std::string(to_string(c)) + ".pgm");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

void save_grid(const fs::path& dir, const AccumulationGrid& grid, const std::string& stem) {
  ensure_dir(dir);
  for (MapClass c : kAllClasses) {
    io::write_file_atomic(layer_path(dir, stem, c), encode_pgm16(grid.spec, grid.layer(c)));
  }
  io::write_file_atomic(dir / (stem + ".grid.json"), grid_spec_to_json(grid.spec));
}

AccumulationGrid load_grid(const fs::path& dir, const std::string& stem) {
  const GridSpec spec = grid_spec_from_json(io::read_file(dir / (stem + ".grid.json")));
  AccumulationGrid grid(spec);
  for (MapClass c : kAllClasses) {
    grid.layer(c) = decode_pgm16(io::read_file(layer_path(dir, stem, c)), spec);
  }
  return grid;
}

void save_mask(const fs::path& dir, const DenseMask& mask, const std::string& stem) {
  ensure_dir(dir);
  for (MapClass c : kAllClasses) {
    const auto& bits = mask.layer(c);
    std::vector<std::uint32_t> values(bits.begin(), bits.end());
    io::write_file_atomic(layer_path(dir, stem, c), encode_pgm16(mask.spec, values));
  }
  io::write_file_atomic(dir / (stem + ".grid.json"), grid_spec_to_json(mask.spec));
}

DenseMask load_mask(const fs::path& dir, const std::string& stem) {
  const GridSpec spec = grid_spec_from_json(io::read_file(dir / (stem + ".grid.json")));
  DenseMask mask(spec);
  for (MapClass c : kAllClasses) {
    const auto values = decode_pgm16(io::read_file(layer_path(dir, stem, c)), spec);
    auto& bits = mask.layer(c);
    for (std::size_t k = 0; k < values.size(); ++k) bits[k] = values[k] != 0 ? 1 : 0;
  }
  return mask;
}

}  // namespace mapweld
