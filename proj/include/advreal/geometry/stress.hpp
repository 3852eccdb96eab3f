#pragma once

#include <vector>

#include "advreal/geometry/mesh.hpp"

namespace advreal::geometry {

/// Per-vertex accumulated neighbor stress, index-aligned with the mesh vertices.
struct StressField {
  std::vector<double> sigma;
};

/// sigma_i = sum over neighbors j of w_ij * |v_j - v_i|.
StressField compute_vertex_stress(const GarmentMesh& mesh);

/// Indices with sigma strictly above `sigma_thres`, ordered by sigma descending,
/// equal sigma broken by ascending index.
std::vector<int> select_high_stress(const StressField& stress, double sigma_thres);

}  // namespace advreal::geometry
