#include "mapweld/updater.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "mapweld/error.hpp"
#include "mapweld/geometry.hpp"
#include "mapweld/io.hpp"

namespace mapweld {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::kPending: return "pending";
    case Decision::kAccepted: return "accepted";
    case Decision::kRejected: return "rejected";
  }
  return "pending";
}

Decision parse_decision(std::string_view token) {
  if (token == "pending") return Decision::kPending;
  if (token == "accepted") return Decision::kAccepted;
  if (token == "rejected") return Decision::kRejected;
  fail(ErrorCode::kParseError, "unknown decision '" + std::string(token) + "'");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kKeptOld: return "kept-old";
    case Provenance::kInsertedNew: return "inserted-new";
    case Provenance::kStitched: return "stitched";
  }
  return "kept-old";
}

const ProposalCell* UpdateProposal::find(std::string_view cell_id) const {
  for (const auto& c : cells) {
    if (c.cell_id == cell_id) return &c;
  }
  return nullptr;
}

std::size_t UpdateProposal::pending() const {
  return static_cast<std::size_t>(std::count_if(
      cells.begin(), cells.end(), [](const ProposalCell& c) { return c.decision == Decision::kPending; }));
}

std::string map_content_hash(const VectorMap& m) {
  const std::string text = io::map_to_string(m);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kIoError, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

UpdateProposal flag_cells(const VectorMap& new_elements, const VectorMap& existing,
                          const FlagParams& params) {
  if (new_elements.frame_id != existing.frame_id) {
    fail(ErrorCode::kFrameMismatch, "new elements in frame '" + new_elements.frame_id +
                                        "' but map in frame '" + existing.frame_id + "'");
  }
  UpdateProposal proposal;
  proposal.base_map_ref = map_content_hash(existing);
  proposal.update_threshold = params.update_threshold;
  auto cells = evaluate_per_cell(new_elements, existing, params.cell_size, params.thresholds,
                                 params.chamfer);
  for (auto& cell : cells) {
    if (cell.vacuous) continue;
    ProposalCell pc;
    pc.cell_id = cell.cell_id();
    pc.rect = cell.rect;
    for (MapClass c : kAllClasses) {
      const auto& cr = cell.report.of(c);
      if (!cr.vacuous) pc.class_ap[class_index(c)] = cr.mean_ap;
    }
    bool flagged;
    if (cell.gt_clipped.empty()) {
      // New territory: nothing mapped here yet.
      pc.map_ap = 0.0;
      for (auto& ap : pc.class_ap) {
        if (ap) ap = 0.0;
      }
      flagged = true;
    } else {
      pc.map_ap = cell.report.map;
      flagged = cell.report.worst_class_ap() < params.update_threshold;
    }
    if (!flagged) continue;
    pc.old_elements = std::move(cell.gt_clipped);
    pc.new_elements = std::move(cell.pred_clipped);
    proposal.cells.push_back(std::move(pc));
  }
  return proposal;
}

ProposalCell& set_decision(UpdateProposal& proposal, std::string_view cell_id, Decision d) {
  for (auto& c : proposal.cells) {
    if (c.cell_id == cell_id) {
      c.decision = d;
      return c;
    }
  }
  fail(ErrorCode::kUnknownCell, "no flagged cell '" + std::string(cell_id) + "'");
}

UpdateProposal decide(UpdateProposal proposal, std::string_view cell_id, Decision d) {
  set_decision(proposal, cell_id, d);
  return proposal;
}

namespace {

struct Piece {
  MapElement element;
  bool has_old = false;
  std::set<std::string> cells;  // accepted cells whose new content it carries
  bool from_ring = false;
  bool stitched = false;
  bool alive = true;
  // Whether each end is an endpoint of retained old geometry.
  bool old_front = false;
  bool old_back = false;
};

bool on_boundary(const Point2& p, const Rect& r) {
  constexpr double kEps = 1e-9;
  if (!r.contains(p, kEps)) return false;
  return std::abs(p.x - r.xmin) <= kEps || std::abs(p.x - r.xmax) <= kEps ||
         std::abs(p.y - r.ymin) <= kEps || std::abs(p.y - r.ymax) <= kEps;
}

struct EndRef {
  std::size_t piece;
  bool at_end;  // false: first point, true: last point
};

Point2 end_point(const Piece& p, bool at_end) {
  return at_end ? p.element.points.back() : p.element.points.front();
}

void reverse_piece(Piece& p) {
  std::reverse(p.element.points.begin(), p.element.points.end());
  std::reverse(p.element.z.begin(), p.element.z.end());
  std::swap(p.old_front, p.old_back);
}

// Where two joined ends meet: an old end stays put so retained geometry is
// not moved; two new ends meet at their midpoint.
double join_weight(bool a_old, bool b_old) {
  if (a_old == b_old) return 0.5;
  return a_old ? 0.0 : 1.0;
}

// Appends b after a (a's last point meets b's first point); `w` places the
// shared vertex between them (0 keeps a's point, 1 takes b's).
void splice(MapElement& a, const MapElement& b, double w) {
  const bool keep_z = a.has_z() && b.has_z();
  a.points.back() = a.points.back() + (b.points.front() - a.points.back()) * w;
  if (keep_z) {
    a.z.back() = a.z.back() + (b.z.front() - a.z.back()) * w;
  } else {
    a.z.clear();
  }
  for (std::size_t i = 1; i < b.points.size(); ++i) {
    a.points.push_back(b.points[i]);
    if (keep_z) a.z.push_back(b.z[i]);
  }
  if (keep_z) {
    // Heights ride along with the planar points through dedup.
    std::vector<Point2> pts;
    std::vector<double> zs;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      if (!pts.empty() && distance(pts.back(), a.points[i]) <= 1e-9) continue;
      pts.push_back(a.points[i]);
      zs.push_back(a.z[i]);
    }
    a.points = std::move(pts);
    a.z = std::move(zs);
  } else {
    a.points = remove_duplicates(a.points, false);
  }
}

bool may_join(const Piece& a, const Piece& b) {
  const bool a_new = !a.cells.empty();
  const bool b_new = !b.cells.empty();
  if (!a_new && !b_new) return false;
  if (a.has_old || b.has_old) return true;
  for (const auto& c : a.cells) {
    if (b.cells.count(c)) return false;
  }
  return true;
}

void stitch(std::vector<Piece>& pieces, const std::vector<Rect>& accepted, double tol) {
  auto eligible = [&](const Piece& p, bool at_end) {
    if (p.element.closed) return false;
    const Point2 q = end_point(p, at_end);
    return std::any_of(accepted.begin(), accepted.end(),
                       [&](const Rect& r) { return on_boundary(q, r); });
  };

  while (true) {
    double best = std::numeric_limits<double>::infinity();
    EndRef ba{0, false}, bb{0, false};
    bool found = false;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (!pieces[i].alive) continue;
      for (int ei = 0; ei < 2; ++ei) {
        if (!eligible(pieces[i], ei == 1)) continue;
        for (std::size_t j = i + 1; j < pieces.size(); ++j) {
          if (!pieces[j].alive || pieces[j].element.cls != pieces[i].element.cls) continue;
          if (!may_join(pieces[i], pieces[j])) continue;
          for (int ej = 0; ej < 2; ++ej) {
            if (!eligible(pieces[j], ej == 1)) continue;
            const double d = distance(end_point(pieces[i], ei == 1), end_point(pieces[j], ej == 1));
            if (d <= tol && d < best) {
              best = d;
              ba = {i, ei == 1};
              bb = {j, ej == 1};
              found = true;
            }
          }
        }
      }
    }
    if (!found) break;

    Piece& a = pieces[ba.piece];
    Piece& b = pieces[bb.piece];
    if (!ba.at_end) reverse_piece(a);
    if (bb.at_end) reverse_piece(b);
    splice(a.element, b.element, join_weight(a.old_back, b.old_front));
    a.old_back = b.old_back;
    a.has_old = a.has_old || b.has_old;
    a.cells.insert(b.cells.begin(), b.cells.end());
    a.from_ring = a.from_ring || b.from_ring;
    a.stitched = true;
    b.alive = false;
  }

  // Rings cut by accepted cells close up again once their parts are rejoined.
  for (auto& p : pieces) {
    if (!p.alive || !p.stitched || !p.from_ring || p.element.closed) continue;
    if (p.element.points.size() < 4) continue;
    const Point2 a = p.element.points.front();
    const Point2 b = p.element.points.back();
    if (distance(a, b) > tol || !eligible(p, false) || !eligible(p, true)) continue;
    const double w = join_weight(p.old_front, p.old_back);
    p.element.points.front() = a + (b - a) * w;
    p.element.points.pop_back();
    if (p.element.has_z()) {
      p.element.z.front() += (p.element.z.back() - p.element.z.front()) * w;
      p.element.z.pop_back();
    }
    p.element.closed = true;
  }
}

}  // namespace

MergeResult merge(const VectorMap& existing, const VectorMap& new_elements,
                  const UpdateProposal& proposal, const MergeParams& params) {
  verify_base(proposal, existing);
  for (const auto& c : proposal.cells) {
    if (c.decision == Decision::kPending) {
      fail(ErrorCode::kUndecidedCell, "cell '" + c.cell_id + "' is still pending");
    }
  }
  std::vector<Rect> accepted;
  std::vector<const ProposalCell*> accepted_cells;
  for (const auto& c : proposal.cells) {
    if (c.decision == Decision::kAccepted) {
      accepted.push_back(c.rect);
      accepted_cells.push_back(&c);
    }
  }

  MergeResult result;
  result.map = existing;
  result.provenance.assign(existing.elements.size(), Provenance::kKeptOld);
  if (accepted.empty()) return result;

  std::vector<Piece> pieces;
  for (const auto& e : existing.elements) {
    for (auto& part : subtract_rects(e, accepted)) {
      Piece p;
      p.from_ring = e.closed && !part.closed;
      p.element = std::move(part);
      p.has_old = true;
      p.old_front = p.old_back = true;
      pieces.push_back(std::move(p));
    }
  }
  for (const ProposalCell* cell : accepted_cells) {
    for (const auto& e : new_elements.elements) {
      for (auto& part : clip_to_rect(e, cell->rect, 0.0)) {
        Piece p;
        p.from_ring = e.closed && !part.closed;
        p.element = std::move(part);
        p.element.id += "@" + cell->cell_id;
        p.cells.insert(cell->cell_id);
        pieces.push_back(std::move(p));
      }
    }
  }

  stitch(pieces, accepted, params.stitch_tolerance);

  result.map.elements.clear();
  result.provenance.clear();
  std::unordered_set<std::string> ids;
  for (auto& p : pieces) {
    if (!p.alive) continue;
    if (p.element.points.size() < 2 || (p.element.closed && p.element.points.size() < 3)) continue;
    std::string id = p.element.id;
    for (int k = 1; !ids.insert(id).second; ++k) id = p.element.id + "~" + std::to_string(k);
    p.element.id = id;
    result.provenance.push_back(p.stitched      ? Provenance::kStitched
                                : p.has_old     ? Provenance::kKeptOld
                                                : Provenance::kInsertedNew);
    result.map.elements.push_back(std::move(p.element));
  }
  if (!result.map.elements.empty()) {
    const Rect nb = bounds_of(result.map.elements);
    Rect& b = result.map.bounds;
    b = {std::min(b.xmin, nb.xmin), std::min(b.ymin, nb.ymin), std::max(b.xmax, nb.xmax),
         std::max(b.ymax, nb.ymax)};
  }
  return result;
}

namespace {

ordered_json cell_json(const ProposalCell& c) {
  ordered_json cj;
  cj["cell_id"] = c.cell_id;
  cj["rect"] = {io::round4(c.rect.xmin), io::round4(c.rect.ymin), io::round4(c.rect.xmax),
                io::round4(c.rect.ymax)};
  cj["map_ap"] = c.map_ap;
  ordered_json per_class;
  for (MapClass cls : kAllClasses) {
    const auto& ap = c.class_ap[class_index(cls)];
    per_class[std::string(to_string(cls))] = ap ? json(*ap) : json(nullptr);
  }
  cj["class_ap"] = std::move(per_class);
  auto old_e = ordered_json::array();
  for (const auto& e : c.old_elements) old_e.push_back(io::element_to_json(e));
  auto new_e = ordered_json::array();
  for (const auto& e : c.new_elements) new_e.push_back(io::element_to_json(e));
  cj["old_elements"] = std::move(old_e);
  cj["new_elements"] = std::move(new_e);
  cj["decision"] = std::string(to_string(c.decision));
  return cj;
}

}  // namespace

std::string cell_to_string(const ProposalCell& c) { return cell_json(c).dump(); }

std::string proposal_to_string(const UpdateProposal& p) {
  ordered_json j;
  j["base_map_ref"] = p.base_map_ref;
  j["update_threshold"] = p.update_threshold;
  auto cells = ordered_json::array();
  for (const auto& c : p.cells) cells.push_back(cell_json(c));
  j["cells"] = std::move(cells);
  return j.dump(1) + "\n";
}

UpdateProposal proposal_from_string(std::string_view text) {
  try {
    const json j = json::parse(text);
    UpdateProposal p;
    p.base_map_ref = j.at("base_map_ref").get<std::string>();
    p.update_threshold = j.at("update_threshold").get<double>();
    for (const auto& cj : j.at("cells")) {
      ProposalCell c;
      c.cell_id = cj.at("cell_id").get<std::string>();
      const auto& r = cj.at("rect");
      c.rect = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                r.at(3).get<double>()};
      c.map_ap = cj.at("map_ap").get<double>();
      if (cj.contains("class_ap")) {
        for (MapClass cls : kAllClasses) {
          const auto key = std::string(to_string(cls));
          const auto& v = cj.at("class_ap");
          if (v.contains(key) && !v.at(key).is_null()) {
            c.class_ap[class_index(cls)] = v.at(key).get<double>();
          }
        }
      }
      for (const auto& e : cj.at("old_elements")) c.old_elements.push_back(io::element_from_json(e));
      for (const auto& e : cj.at("new_elements")) c.new_elements.push_back(io::element_from_json(e));
      c.decision = parse_decision(cj.at("decision").get<std::string>());
      p.cells.push_back(std::move(c));
    }
    return p;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, "proposal: offset " + std::to_string(e.byte) + ": " + e.what());
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("proposal: ") + e.what());
  }
}

void save_proposal(const std::filesystem::path& path, const UpdateProposal& p) {
  io::write_file_atomic(path, proposal_to_string(p));
}

UpdateProposal load_proposal(const std::filesystem::path& path) {
  return proposal_from_string(io::read_file(path));
}

UpdateProposal load_proposal(const std::filesystem::path& path, const VectorMap& base) {
  auto p = load_proposal(path);
  verify_base(p, base);
  return p;
}

void verify_base(const UpdateProposal& p, const VectorMap& base) {
  const std::string actual = map_content_hash(base);
  if (p.base_map_ref != actual) {
    fail(ErrorCode::kStaleProposal,
         "proposal was built against map " + p.base_map_ref + ", not " + actual);
  }
}

}  // namespace mapweld
