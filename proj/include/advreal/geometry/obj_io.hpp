#pragma once

#include <filesystem>
#include <istream>
#include <ostream>

#include "advreal/geometry/mesh.hpp"

namespace advreal::geometry {

/// Parses `v`, `vt` and `f` records; polygons are fan-triangulated and edges
/// derived from faces. Texture coordinates are kept only when every face
/// vertex references the same vt index as its position index would imply
/// (one uv per vertex).
GarmentMesh read_obj(std::istream& in, AdjacencyWeighting weighting = AdjacencyWeighting::kUnit);
GarmentMesh read_obj(const std::filesystem::path& path, AdjacencyWeighting weighting = AdjacencyWeighting::kUnit);

void write_obj(std::ostream& out, const GarmentMesh& mesh);
void write_obj(const std::filesystem::path& path, const GarmentMesh& mesh);

}  // namespace advreal::geometry
