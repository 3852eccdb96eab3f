#pragma once

#include <vector>

#include "advreal/core/rng.hpp"
#include "advreal/geometry/mesh.hpp"
#include "advreal/geometry/stress.hpp"

namespace advreal::geometry {

struct ControlPointSet {
  std::vector<int> indices;
  std::vector<Vec3> positions;
  std::vector<Vec3> target_offsets;
  bool empty_candidates = false;  // set when the candidate list was empty

  [[nodiscard]] std::size_t size() const { return indices.size(); }
};

struct ControlSelection {
  double gamma = 0.01;  // isolation factor
  double rho = 0.2;     // density ratio
  int n_min = 4;        // lower bound on the control count
};

/// Greedy isolation scan over `candidates` (already sorted by stress, descending).
/// A candidate p is accepted iff every accepted q satisfies |p - q| >= gamma / sigma(p).
/// Stops at max(n_min, floor(rho * |candidates|)) accepted points or when the list runs out.
/// Target offsets are zero-initialised.
ControlPointSet select_control_points(const std::vector<int>& candidates, const StressField& stress,
                                      const std::vector<Vec3>& positions, const ControlSelection& sel);

/// Fills `target_offsets` with uniformly random directions and magnitudes in [0, max_magnitude).
void sample_target_offsets(ControlPointSet& control, double max_magnitude, Rng& rng);

}  // namespace advreal::geometry
