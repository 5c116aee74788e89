#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mapweld/types.hpp"

namespace mapweld::io {

// Coordinates are written with 4 decimal places (0.1 mm).
double round4(double v);

nlohmann::ordered_json element_to_json(const MapElement& e);
MapElement element_from_json(const nlohmann::json& j);

nlohmann::ordered_json map_to_json(const VectorMap& m);
VectorMap map_from_json(const nlohmann::json& j);

// Canonical text form of a map; also the input of the proposal base hash.
std::string map_to_string(const VectorMap& m);
VectorMap map_from_string(std::string_view text);

void save_map(const std::filesystem::path& path, const VectorMap& m);
VectorMap load_map(const std::filesystem::path& path);

std::string frame_to_line(const FramePrediction& fp);
FramePrediction frame_from_line(std::string_view line);
void save_frames(const std::filesystem::path& path, const std::vector<FramePrediction>& frames);
std::vector<FramePrediction> load_frames(const std::filesystem::path& path);

void save_poses(const std::filesystem::path& path, const std::vector<Pose2>& poses);
std::vector<Pose2> load_poses(const std::filesystem::path& path);

// CSV ("x,y,z" header) or the binary form: 8-byte magic "MWCLOUD1", a
// little-endian uint64 count, then count float64 (x, y, z) triples. The
// loader sniffs the magic; the saver picks binary for a ".bin" extension.
void save_pointcloud(const std::filesystem::path& path, const std::vector<Point3>& cloud);
std::vector<Point3> load_pointcloud(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace mapweld::io
