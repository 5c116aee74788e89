#include "mapweld/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mapweld/error.hpp"

namespace mapweld::io {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;
constexpr char kCloudMagic[8] = {'M', 'W', 'C', 'L', 'O', 'U', 'D', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary point clouds assume a little-endian host");

void check_version(const json& j) {
  if (!j.is_object() || !j.contains("schema_version")) return;
  const auto& v = j.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    fail(ErrorCode::kVersionError, "unsupported schema_version " + v.dump());
  }
}

template <typename Fn>
auto with_context(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, where + ": offset " + std::to_string(e.byte) + ": " + e.what());
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, where + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError || e.code() == ErrorCode::kInvalidGeometry) {
      fail(ErrorCode::kParseError, where + ": " + e.what());
    }
    throw;
  }
}

double parse_double(std::string_view field, const std::string& where) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() &&
         (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
    fail(ErrorCode::kParseError, where + ": bad number '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string format_csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", round4(v));
  return buf;
}

std::string format_precise(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

double round4(double v) { return std::round(v * 1e4) / 1e4; }

ordered_json element_to_json(const MapElement& e) {
  ordered_json j;
  j["id"] = e.id;
  j["class"] = std::string(to_string(e.cls));
  j["closed"] = e.closed;
  if (e.confidence) {
    j["confidence"] = round4(*e.confidence);
  } else {
    j["confidence"] = nullptr;
  }
  auto pts = ordered_json::array();
  for (std::size_t i = 0; i < e.points.size(); ++i) {
    if (e.has_z()) {
      pts.push_back({round4(e.points[i].x), round4(e.points[i].y), round4(e.z[i])});
    } else {
      pts.push_back({round4(e.points[i].x), round4(e.points[i].y)});
    }
  }
  j["points"] = std::move(pts);
  return j;
}

MapElement element_from_json(const json& j) {
  MapElement e;
  e.id = j.at("id").get<std::string>();
  e.cls = parse_map_class(j.at("class").get<std::string>());
  e.closed = j.value("closed", false);
  if (j.contains("confidence") && !j.at("confidence").is_null()) {
    e.confidence = j.at("confidence").get<double>();
  }
  const auto& pts = j.at("points");
  if (!pts.is_array()) fail(ErrorCode::kParseError, "element '" + e.id + "': points not a list");
  bool any_z = false;
  for (const auto& p : pts) {
    if (!p.is_array() || (p.size() != 2 && p.size() != 3)) {
      fail(ErrorCode::kParseError, "element '" + e.id + "': point must be [x,y] or [x,y,z]");
    }
    e.points.push_back({p[0].get<double>(), p[1].get<double>()});
    if (p.size() == 3) any_z = true;
  }
  if (any_z) {
    for (const auto& p : pts) {
      if (p.size() != 3) {
        fail(ErrorCode::kParseError, "element '" + e.id + "': mixed 2D and 3D points");
      }
      e.z.push_back(p[2].get<double>());
    }
  }
  validate(e);
  return e;
}

ordered_json map_to_json(const VectorMap& m) {
  ordered_json j;
  j["frame_id"] = m.frame_id;
  j["bounds"] = {round4(m.bounds.xmin), round4(m.bounds.ymin), round4(m.bounds.xmax),
                 round4(m.bounds.ymax)};
  auto elements = ordered_json::array();
  for (const auto& e : m.elements) elements.push_back(element_to_json(e));
  j["elements"] = std::move(elements);
  return j;
}

VectorMap map_from_json(const json& j) {
  check_version(j);
  VectorMap m;
  m.frame_id = j.at("frame_id").get<std::string>();
  const auto& b = j.at("bounds");
  if (!b.is_array() || b.size() != 4) fail(ErrorCode::kParseError, "bounds must have 4 numbers");
  m.bounds = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
  for (const auto& e : j.at("elements")) m.elements.push_back(element_from_json(e));
  validate(m);
  return m;
}

std::string map_to_string(const VectorMap& m) {
  const auto j = map_to_json(m);
  std::string out = "{\n";
  out += "  \"frame_id\": " + j["frame_id"].dump() + ",\n";
  out += "  \"bounds\": " + j["bounds"].dump() + ",\n";
  out += "  \"elements\": [";
  const auto& elements = j["elements"];
  for (std::size_t i = 0; i < elements.size(); ++i) {
    out += i == 0 ? "\n    " : ",\n    ";
    out += elements[i].dump();
  }
  out += elements.empty() ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

VectorMap map_from_string(std::string_view text) {
  return with_context("map", [&] { return map_from_json(json::parse(text)); });
}

void save_map(const fs::path& path, const VectorMap& m) {
  write_file_atomic(path, map_to_string(m));
}

VectorMap load_map(const fs::path& path) {
  const std::string text = read_file(path);
  return with_context(path.string(), [&] { return map_from_json(json::parse(text)); });
}

std::string frame_to_line(const FramePrediction& fp) {
  ordered_json j;
  j["t"] = round4(fp.pose.t);
  // Yaw keeps full precision: rounding near +pi would wrap on load.
  j["pose"] = {round4(fp.pose.x), round4(fp.pose.y), fp.pose.yaw};
  auto elements = ordered_json::array();
  for (const auto& e : fp.elements) elements.push_back(element_to_json(e));
  j["elements"] = std::move(elements);
  return j.dump();
}

FramePrediction frame_from_line(std::string_view line) {
  const json j = json::parse(line);
  check_version(j);
  FramePrediction fp;
  fp.pose.t = j.at("t").get<double>();
  const auto& pose = j.at("pose");
  if (!pose.is_array() || pose.size() != 3) fail(ErrorCode::kParseError, "pose must be [x,y,yaw]");
  fp.pose.x = pose[0].get<double>();
  fp.pose.y = pose[1].get<double>();
  fp.pose.yaw = normalize_angle(pose[2].get<double>());
  for (const auto& e : j.at("elements")) fp.elements.push_back(element_from_json(e));
  return fp;
}

void save_frames(const fs::path& path, const std::vector<FramePrediction>& frames) {
  std::string out;
  for (const auto& fp : frames) {
    out += frame_to_line(fp);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<FramePrediction> load_frames(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<FramePrediction> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    frames.push_back(with_context(path.string() + ":" + std::to_string(lineno),
                                  [&] { return frame_from_line(line); }));
  }
  return frames;
}

void save_poses(const fs::path& path, const std::vector<Pose2>& poses) {
  std::string out = "t,x,y,yaw\n";
  for (const auto& p : poses) {
    out += format_csv_number(p.t) + "," + format_csv_number(p.x) + "," + format_csv_number(p.y) +
           "," + format_precise(p.yaw) + "\n";
  }
  write_file_atomic(path, out);
}

std::vector<Pose2> load_poses(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "t,x,y,yaw") {
    fail(ErrorCode::kParseError, path.string() + ":1: expected header 't,x,y,yaw'");
  }
  std::vector<Pose2> poses;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto fields = split_csv(line);
    if (fields.size() != 4) fail(ErrorCode::kParseError, where + ": expected 4 fields");
    poses.push_back({parse_double(fields[1], where), parse_double(fields[2], where),
                     normalize_angle(parse_double(fields[3], where)),
                     parse_double(fields[0], where)});
  }
  return poses;
}

void save_pointcloud(const fs::path& path, const std::vector<Point3>& cloud) {
  std::string out;
  if (path.extension() == ".bin") {
    out.append(kCloudMagic, sizeof(kCloudMagic));
    const std::uint64_t count = cloud.size();
    out.append(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto& p : cloud) {
      const double xyz[3] = {p.x, p.y, p.z};
      out.append(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    }
  } else {
    out = "x,y,z\n";
    for (const auto& p : cloud) {
      out += format_precise(p.x) + "," + format_precise(p.y) + "," + format_precise(p.z) + "\n";
    }
  }
  write_file_atomic(path, out);
}

std::vector<Point3> load_pointcloud(const fs::path& path) {
  const std::string data = read_file(path);
  std::vector<Point3> cloud;
  if (data.size() >= 16 && std::memcmp(data.data(), kCloudMagic, sizeof(kCloudMagic)) == 0) {
    std::uint64_t count = 0;
    std::memcpy(&count, data.data() + 8, sizeof(count));
    if (data.size() != 16 + count * 24) {
      fail(ErrorCode::kParseError, path.string() + ": binary cloud size does not match count");
    }
    cloud.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      double xyz[3];
      std::memcpy(xyz, data.data() + 16 + i * 24, sizeof(xyz));
      cloud[i] = {xyz[0], xyz[1], xyz[2]};
    }
    return cloud;
  }
  std::istringstream in(data);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "x,y,z") {
    fail(ErrorCode::kParseError, path.string() + ":1: expected header 'x,y,z'");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto fields = split_csv(line);
    if (fields.size() != 3) fail(ErrorCode::kParseError, where + ": expected 3 fields");
    cloud.push_back({parse_double(fields[0], where), parse_double(fields[1], where),
                     parse_double(fields[2], where)});
  }
  return cloud;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) fail(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot rename onto " + path.string() + ": " + ec.message());
}

}  // namespace mapweld::io
