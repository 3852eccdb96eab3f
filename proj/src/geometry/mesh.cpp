#include "advreal/geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "advreal/core/errors.hpp"

namespace advreal::geometry {

void GarmentMesh::validate() const {
  const int n = static_cast<int>(vertices.size());
  auto valid = [n](int i) { return i >= 0 && i < n; };
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    if (!valid(edge.a) || !valid(edge.b)) {
      throw DomainError("edge " + std::to_string(e) + " references an invalid vertex");
    }
    if (edge.a == edge.b) throw DomainError("edge " + std::to_string(e) + " is a self loop");
    if (!(edge.weight >= 0.0)) throw DomainError("edge " + std::to_string(e) + " has a negative weight");
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    if (!valid(face[0]) || !valid(face[1]) || !valid(face[2])) {
      throw DomainError("face " + std::to_string(f) + " references an invalid vertex");
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw DomainError("face " + std::to_string(f) + " is degenerate");
    }
  }
  if (!uv.empty() && uv.size() != vertices.size()) {
    throw DomainError("uv count does not match vertex count");
  }
}

void derive_edges_from_faces(GarmentMesh& mesh, AdjacencyWeighting weighting) {
  std::set<std::pair<int, int>> unique;
  for (const Face& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k];
      const int b = f[(k + 1) % 3];
      unique.emplace(std::min(a, b), std::max(a, b));
    }
  }
  std::vector<int> degree(mesh.vertices.size(), 0);
  for (const auto& [a, b] : unique) {
    ++degree[a];
    ++degree[b];
  }
  mesh.edges.clear();
  mesh.edges.reserve(unique.size());
  for (const auto& [a, b] : unique) {
    double w = 1.0;
    if (weighting == AdjacencyWeighting::kInverseDegree) {
      w = 1.0 / std::sqrt(static_cast<double>(degree[a]) * degree[b]);
    }
    mesh.edges.push_back({a, b, w});
  }
}

std::vector<std::vector<std::pair<int, double>>> neighbor_lists(const GarmentMesh& mesh) {
  std::vector<std::vector<std::pair<int, double>>> out(mesh.vertices.size());
  for (const Edge& e : mesh.edges) {
    out[e.a].emplace_back(e.b, e.weight);
    out[e.b].emplace_back(e.a, e.weight);
  }
  return out;
}

}  // namespace advreal::geometry
