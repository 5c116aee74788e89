// Synthetic worlds shared by the unit tests and the acceptance run.
#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "mapweld/grid.hpp"
#include "mapweld/skeleton.hpp"
#include "mapweld/synth.hpp"

namespace fixtures {

using namespace mapweld;

// A 270 m north-bound road cut into 30 m cells, with one change of each
// kind placed inside its own cell.
struct ChangedWorld {
  Scenario base;
  VectorMap changed;
  std::vector<ChangeRecord> records;
};

inline ChangedWorld changed_world() {
  ScenarioSpec spec;
  spec.length = 270;
  spec.heading = std::numbers::pi / 2;
  spec.crosswalk_stations = {65, 113, 137};
  ChangedWorld w;
  w.base = generate_scenario(spec);
  w.changed = w.base.gt;
  const std::vector<Change> changes = {
      RemoveElement{"crosswalk_0"},
      ShiftElement{"divider_2", 2.0, 0.0},
      NarrowRoad{{"boundary_left", "boundary_right"}, {0, 202}, {0, 228}, 2.0, 1.0},
  };
  for (const auto& c : changes) {
    auto r = inject_change(w.changed, c);
    w.changed = std::move(r.map);
    w.records.push_back(std::move(r.record));
  }
  return w;
}

// The noisy pipeline: simulate frames over `world`, accumulate on the grid
// implied by `reference` bounds, extract.
inline VectorMap extract_noisy(const VectorMap& world, const Centerline& path,
                               const VectorMap& reference, std::uint64_t seed,
                               double sigma = 0.2, double dropout = 0.1,
                               double spurious = 0.5) {
  NoiseSpec noise;
  noise.point_sigma = sigma;
  noise.dropout_prob = dropout;
  noise.spurious_rate = spurious;
  noise.seed = seed;
  const auto frames = simulate_frames(world, path, {}, 2.0, noise);
  return extract_from_grid(accumulate(frames, grid_spec_for(reference.bounds, 0.5, 5.0)), 3);
}

}  // namespace fixtures
