#pragma once

#include <cstdint>
#include <vector>

#include "advreal/core/rng.hpp"
#include "advreal/geometry/mesh.hpp"

namespace advreal::geometry {

/// Procedural meshes use decimetre model units, feet on y = 0, facing +z.
inline constexpr double kModelUnitsPerMeter = 10.0;
inline constexpr double kPersonHeightMeters = 1.75;

enum class Material : std::uint8_t { kSkin = 0, kShirt = 1, kPants = 2 };

/// Closed low-poly body used as the rendered person.
struct BodyMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Material> face_material;
};

struct GarmentPanelOptions {
  int columns = 14;
  int rows = 14;
  double jitter = 0.25;     // fraction of grid spacing applied to interior vertices
  double standoff = 0.12;   // distance in front of the torso surface
};

BodyMesh make_body();

/// Square chest panel following the torso front; UV (0,0) is its top-left corner.
GarmentMesh make_garment_panel(const GarmentPanelOptions& opts, Rng& rng);

}  // namespace advreal::geometry
