#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace advreal::geometry {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Face = std::array<int, 3>;

/// Undirected edge; stored once, the weight applies in both directions.
struct Edge {
  int a = 0;
  int b = 0;
  double weight = 1.0;
};

enum class AdjacencyWeighting {
  kUnit,           // w_ij = 1
  kInverseDegree,  // w_ij = 1 / sqrt(deg_i * deg_j)
};

/// Triangle mesh carrying the garment surface, its edge graph, and optional
/// per-vertex texture coordinates into the patch.
struct GarmentMesh {
  std::vector<Vec3> vertices;
  std::vector<Edge> edges;
  std::vector<Face> faces;
  std::vector<Vec2> uv;  // empty, or one entry per vertex

  [[nodiscard]] std::size_t vertex_count() const { return vertices.size(); }

  /// Throws DomainError describing the first violated invariant.
  void validate() const;
};

/// Rebuilds `mesh.edges` as the unique undirected edges of its faces.
void derive_edges_from_faces(GarmentMesh& mesh, AdjacencyWeighting weighting = AdjacencyWeighting::kUnit);

/// Per-vertex neighbor lists (index, weight) derived from the edge list.
std::vector<std::vector<std::pair<int, double>>> neighbor_lists(const GarmentMesh& mesh);

}  // namespace advreal::geometry
