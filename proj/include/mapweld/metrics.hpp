#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mapweld/types.hpp"

namespace mapweld {

struct ChamferParams {
  double sample_step = 0.1;  // polyline densification spacing, meters
};

struct ApThresholds {
  std::vector<double> thresholds = {0.5, 1.0, 1.5};
};

void validate(const ApThresholds& t);

// Squared-norm Chamfer distance between two point sets:
// mean_a min_b |a-b|^2 + mean_b min_a |b-a|^2. Throws EmptySet.
double chamfer_eq2(std::span<const Point2> a, std::span<const Point2> b);

// Half the sum of the two directed mean nearest-neighbour distances between
// the densified elements. In meters: two parallel lines offset by d score d.
double matching_distance(const MapElement& pred, const MapElement& gt,
                         const ChamferParams& params = {});

// Same value by the O(|A||B|) double loop over densified point sets.
double matching_distance_brute_force(const MapElement& pred, const MapElement& gt,
                                     const ChamferParams& params = {});

struct Match {
  std::string pred_id;
  std::optional<std::string> gt_id;
  double distance = 0.0;  // meaningful only when matched
  double confidence = 1.0;
};

// Greedy: predictions by descending confidence then ascending id; each takes
// the closest unmatched gt whose distance is strictly below theta.
std::vector<Match> match_instances(std::span<const MapElement> preds,
                                   std::span<const MapElement> gts, double theta,
                                   const ChamferParams& params = {});

// All-point AP over the match_instances ranking with a monotone precision
// envelope.
double average_precision(std::span<const MapElement> preds, std::span<const MapElement> gts,
                         double theta, const ChamferParams& params = {});
// AP from an already ranked match list.
double average_precision(std::span<const Match> ranked, std::size_t num_gts);

struct ClassReport {
  std::vector<double> ap;  // one per threshold
  double mean_ap = 0.0;
  bool vacuous = false;    // no pred and no gt of this class
  std::vector<std::vector<Match>> matches;  // one list per threshold
};

struct EvalReport {
  std::vector<double> thresholds;
  std::array<ClassReport, kNumClasses> classes;
  double map = 0.0;  // mean over classes of the threshold-averaged AP

  const ClassReport& of(MapClass c) const { return classes[class_index(c)]; }
  // mAP restricted to one threshold.
  double map_at(std::size_t threshold_index) const;
  // Lowest threshold-averaged AP over non-vacuous classes (1.0 if none).
  double worst_class_ap() const;
};

EvalReport evaluate(const VectorMap& pred, const VectorMap& gt, const ApThresholds& thresholds = {},
                    const ChamferParams& params = {});

struct CellEval {
  int ci = 0;
  int cj = 0;
  Rect rect;
  bool vacuous = false;
  EvalReport report;
  std::vector<MapElement> pred_clipped;
  std::vector<MapElement> gt_clipped;

  std::string cell_id() const { return std::to_string(ci) + "_" + std::to_string(cj); }
};

// Cell lattice anchored at the gt bounds' min corner. Both maps are clipped
// to each cell; cells where both clips are empty are marked vacuous and not
// evaluated.
std::vector<CellEval> evaluate_per_cell(const VectorMap& pred, const VectorMap& gt,
                                        double cell_size = 30.0,
                                        const ApThresholds& thresholds = {},
                                        const ChamferParams& params = {});

Rect cell_rect(const Rect& anchor_bounds, double cell_size, int ci, int cj);

}  // namespace mapweld
