#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mapweld/metrics.hpp"
#include "mapweld/types.hpp"

namespace mapweld {

enum class Decision { kPending, kAccepted, kRejected };

std::string_view to_string(Decision d);
Decision parse_decision(std::string_view token);

struct ProposalCell {
  std::string cell_id;  // "ci_cj"
  Rect rect;
  double map_ap = 0.0;
  // Threshold-averaged AP per class; nullopt where the class is absent from
  // both maps in this cell.
  std::array<std::optional<double>, kNumClasses> class_ap;
  std::vector<MapElement> old_elements;  // clipped to rect
  std::vector<MapElement> new_elements;  // clipped to rect
  Decision decision = Decision::kPending;

  friend bool operator==(const ProposalCell&, const ProposalCell&) = default;
};

struct UpdateProposal {
  std::string base_map_ref;  // hex SHA-256 of the existing map's canonical file
  double update_threshold = 0.3;
  std::vector<ProposalCell> cells;

  friend bool operator==(const UpdateProposal&, const UpdateProposal&) = default;

  const ProposalCell* find(std::string_view cell_id) const;
  std::size_t pending() const;
};

struct FlagParams {
  double update_threshold = 0.3;
  double cell_size = 30.0;
  ApThresholds thresholds;
  ChamferParams chamfer;
};

std::string map_content_hash(const VectorMap& m);

/**
 * Runs the per-cell comparison of the new elements against the existing
 * map and lists every cell needing review. A cell is flagged when any
 * class present in it scores a threshold-averaged AP below the update
 * threshold (so its mAP, the mean over classes, is below it too whenever
 * that is what trips). Cells with existing content missing entirely but new
 * content present are new territory and carry mAP 0. Vacuous cells are never
 * flagged.
 */
UpdateProposal flag_cells(const VectorMap& new_elements, const VectorMap& existing,
                          const FlagParams& params = {});

// Records a decision for one cell; last write wins. Throws UnknownCell.
ProposalCell& set_decision(UpdateProposal& proposal, std::string_view cell_id, Decision d);
UpdateProposal decide(UpdateProposal proposal, std::string_view cell_id, Decision d);

enum class Provenance { kKeptOld, kInsertedNew, kStitched };
std::string_view to_string(Provenance p);

struct MergeResult {
  VectorMap map;
  std::vector<Provenance> provenance;  // parallel to map.elements
};

struct MergeParams {
  double stitch_tolerance = 0.75;
};

/**
 * Replaces the content of every accepted cell: old geometry inside it is cut
 * away, new geometry clipped to it is inserted, and matching-class ends that
 * meet across an accepted cell border within the stitch tolerance are joined.
 * The joint lands on the old end when one side is retained old geometry, at
 * the midpoint when both sides are new. Elements that touch no accepted cell
 * are copied
 * unchanged. Throws UndecidedCell while any cell is pending, StaleProposal if
 * `existing` is not the map the proposal was built from.
 */
MergeResult merge(const VectorMap& existing, const VectorMap& new_elements,
                  const UpdateProposal& proposal, const MergeParams& params = {});

std::string proposal_to_string(const UpdateProposal& p);
// One cell record as compact JSON, the shape used inside the proposal file.
std::string cell_to_string(const ProposalCell& c);
UpdateProposal proposal_from_string(std::string_view text);
void save_proposal(const std::filesystem::path& path, const UpdateProposal& p);
UpdateProposal load_proposal(const std::filesystem::path& path);
// Loads and checks base_map_ref against `base`; mismatch -> StaleProposal.
UpdateProposal load_proposal(const std::filesystem::path& path, const VectorMap& base);
void verify_base(const UpdateProposal& p, const VectorMap& base);

}  // namespace mapweld
