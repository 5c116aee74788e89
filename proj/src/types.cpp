#include "mapweld/types.hpp"

#include <limits>
#include <numbers>
#include <unordered_set>

#include "mapweld/error.hpp"

namespace mapweld {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidGeometry: return "InvalidGeometry";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kVersionError: return "VersionError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kClassMismatch: return "ClassMismatch";
    case ErrorCode::kFrameMismatch: return "FrameMismatch";
    case ErrorCode::kUnknownCell: return "UnknownCell";
    case ErrorCode::kUndecidedCell: return "UndecidedCell";
    case ErrorCode::kStaleProposal: return "StaleProposal";
    case ErrorCode::kDegenerateTrace: return "DegenerateTrace";
    case ErrorCode::kNoGroundFound: return "NoGroundFound";
    case ErrorCode::kInvalidScenario: return "InvalidScenario";
    case ErrorCode::kUnknownElement: return "UnknownElement";
  }
  return "Unknown";
}

std::string_view to_string(MapClass c) {
  switch (c) {
    case MapClass::kBoundary: return "boundary";
    case MapClass::kDivider: return "divider";
    case MapClass::kCrosswalk: return "crosswalk";
  }
  return "boundary";
}

MapClass parse_map_class(std::string_view token) {
  for (MapClass c : kAllClasses) {
    if (to_string(c) == token) return c;
  }
  fail(ErrorCode::kParseError, "unknown map class '" + std::string(token) + "'");
}

void validate(const MapElement& e) {
  if (e.points.size() < 2) {
    fail(ErrorCode::kInvalidGeometry, "element '" + e.id + "' has fewer than 2 points");
  }
  if (!e.z.empty() && e.z.size() != e.points.size()) {
    fail(ErrorCode::kInvalidGeometry, "element '" + e.id + "' has mismatched heights");
  }
  for (std::size_t i = 0; i < e.points.size(); ++i) {
    if (!is_finite(e.points[i]) || (!e.z.empty() && !std::isfinite(e.z[i]))) {
      fail(ErrorCode::kInvalidGeometry, "element '" + e.id + "' has a non-finite coordinate");
    }
    if (i > 0 && distance(e.points[i - 1], e.points[i]) <= 1e-9) {
      fail(ErrorCode::kInvalidGeometry,
           "element '" + e.id + "' repeats point " + std::to_string(i));
    }
  }
  if (e.closed && distance(e.points.front(), e.points.back()) <= 1e-9) {
    fail(ErrorCode::kInvalidGeometry, "closed element '" + e.id + "' repeats its first point");
  }
  if (e.confidence && !(*e.confidence >= 0.0 && *e.confidence <= 1.0)) {
    fail(ErrorCode::kInvalidGeometry, "element '" + e.id + "' confidence outside [0,1]");
  }
}

void validate(const VectorMap& m) {
  std::unordered_set<std::string> ids;
  for (const auto& e : m.elements) {
    validate(e);
    if (!ids.insert(e.id).second) {
      fail(ErrorCode::kInvalidGeometry, "duplicate element id '" + e.id + "'");
    }
    for (const auto& p : e.points) {
      if (!m.bounds.contains(p, 1.0)) {
        fail(ErrorCode::kInvalidGeometry, "element '" + e.id + "' leaves the map bounds");
      }
    }
  }
}

Rect bounds_of(const std::vector<MapElement>& elements, double pad) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Rect r{kInf, kInf, -kInf, -kInf};
  for (const auto& e : elements) {
    for (const auto& p : e.points) {
      r.xmin = std::min(r.xmin, p.x);
      r.ymin = std::min(r.ymin, p.y);
      r.xmax = std::max(r.xmax, p.x);
      r.ymax = std::max(r.ymax, p.y);
    }
  }
  if (r.xmin > r.xmax) return Rect{-pad, -pad, pad, pad};
  return r.expanded(pad);
}

double normalize_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

void validate(const FramePrediction& fp, const PerceptionWindow& window) {
  if (!std::isfinite(fp.pose.x) || !std::isfinite(fp.pose.y) || !std::isfinite(fp.pose.yaw)) {
    fail(ErrorCode::kInvalidGeometry, "frame pose is not finite");
  }
  for (const auto& e : fp.elements) {
    validate(e);
    for (const auto& p : e.points) {
      if (!window.contains(p, 1e-6)) {
        fail(ErrorCode::kInvalidGeometry,
             "frame element '" + e.id + "' leaves the perception window");
      }
    }
  }
}

}  // namespace mapweld
