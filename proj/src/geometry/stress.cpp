#include "advreal/geometry/stress.hpp"

#include <algorithm>
#include <numeric>

#include "advreal/core/errors.hpp"

namespace advreal::geometry {

StressField compute_vertex_stress(const GarmentMesh& mesh) {
  if (mesh.vertices.empty()) throw DomainError("empty mesh");
  mesh.validate();
  StressField out;
  out.sigma.assign(mesh.vertices.size(), 0.0);
  // Each undirected edge contributes the same term to both endpoints.
  for (const Edge& e : mesh.edges) {
    const double term = e.weight * (mesh.vertices[e.b] - mesh.vertices[e.a]).norm();
    out.sigma[e.a] += term;
    out.sigma[e.b] += term;
  }
  return out;
}

std::vector<int> select_high_stress(const StressField& stress, double sigma_thres) {
  if (!(sigma_thres >= 0.0)) throw DomainError("sigma_thres must be >= 0");
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(stress.sigma.size()); ++i) {
    if (stress.sigma[i] > sigma_thres) out.push_back(i);
  }
  std::stable_sort(out.begin(), out.end(),
                   [&](int a, int b) { return stress.sigma[a] > stress.sigma[b]; });
  return out;
}

}  // namespace advreal::geometry
