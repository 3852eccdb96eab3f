#include "advreal/geometry/humanoid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace advreal::geometry {
namespace {

constexpr double kTorsoRx = 1.9;
constexpr double kTorsoRz = 1.1;
constexpr double kPanelHalf = 1.6;
constexpr double kPanelCenterY = 12.0;

void add_tube(BodyMesh& m, const Vec3& p0, const Vec3& p1, double rx, double rz, Material mat, int segments = 10) {
  const Vec3 axis = (p1 - p0).normalized();
  Vec3 ref = std::abs(axis.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 ex = ref.cross(axis).normalized();
  const Vec3 ez = axis.cross(ex).normalized();
  const int base = static_cast<int>(m.vertices.size());
  for (int ring = 0; ring < 2; ++ring) {
    const Vec3& c = ring == 0 ? p0 : p1;
    for (int s = 0; s < segments; ++s) {
      const double t = 2.0 * std::numbers::pi * s / segments;
      m.vertices.push_back(c + rx * std::cos(t) * ex + rz * std::sin(t) * ez);
    }
  }
  const int cap0 = static_cast<int>(m.vertices.size());
  m.vertices.push_back(p0);
  m.vertices.push_back(p1);
  for (int s = 0; s < segments; ++s) {
    const int a = base + s;
    const int b = base + (s + 1) % segments;
    const int c = a + segments;
    const int d = b + segments;
    m.faces.push_back({a, b, d});
    m.faces.push_back({a, d, c});
    m.faces.push_back({cap0, b, a});
    m.faces.push_back({cap0 + 1, c, d});
    for (int k = 0; k < 4; ++k) m.face_material.push_back(mat);
  }
}

void add_sphere(BodyMesh& m, const Vec3& center, double r, Material mat, int stacks = 7, int slices = 10) {
  const int base = static_cast<int>(m.vertices.size());
  m.vertices.push_back(center + Vec3(0, r, 0));
  for (int i = 1; i < stacks; ++i) {
    const double phi = std::numbers::pi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double t = 2.0 * std::numbers::pi * j / slices;
      m.vertices.push_back(center + r * Vec3(std::sin(phi) * std::cos(t), std::cos(phi), std::sin(phi) * std::sin(t)));
    }
  }
  const int bottom = static_cast<int>(m.vertices.size());
  m.vertices.push_back(center - Vec3(0, r, 0));
  auto ring = [&](int i, int j) { return base + 1 + (i - 1) * slices + (j % slices); };
  for (int j = 0; j < slices; ++j) {
    m.faces.push_back({base, ring(1, j + 1), ring(1, j)});
    m.face_material.push_back(mat);
    m.faces.push_back({bottom, ring(stacks - 1, j), ring(stacks - 1, j + 1)});
    m.face_material.push_back(mat);
  }
  for (int i = 1; i + 1 < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      m.faces.push_back({ring(i, j), ring(i, j + 1), ring(i + 1, j + 1)});
      m.faces.push_back({ring(i, j), ring(i + 1, j + 1), ring(i + 1, j)});
      m.face_material.push_back(mat);
      m.face_material.push_back(mat);
    }
  }
}

double torso_front_z(double x) {
  const double t = std::clamp(x / kTorsoRx, -1.0, 1.0);
  return kTorsoRz * std::sqrt(1.0 - t * t);
}

}  // namespace

BodyMesh make_body() {
  BodyMesh m;
  add_tube(m, Vec3(-0.85, 0.0, 0.0), Vec3(-0.8, 9.0, 0.0), 0.7, 0.7, Material::kPants);
  add_tube(m, Vec3(0.85, 0.0, 0.0), Vec3(0.8, 9.0, 0.0), 0.7, 0.7, Material::kPants);
  add_tube(m, Vec3(0.0, 8.2, 0.0), Vec3(0.0, 9.4, 0.0), 1.75, 1.0, Material::kPants);
  add_tube(m, Vec3(0.0, 9.2, 0.0), Vec3(0.0, 14.6, 0.0), kTorsoRx, kTorsoRz, Material::kShirt);
  add_tube(m, Vec3(-2.35, 14.3, 0.0), Vec3(-2.6, 8.0, 0.0), 0.45, 0.45, Material::kShirt, 8);
  add_tube(m, Vec3(2.35, 14.3, 0.0), Vec3(2.6, 8.0, 0.0), 0.45, 0.45, Material::kShirt, 8);
  add_tube(m, Vec3(0.0, 14.4, 0.0), Vec3(0.0, 15.5, 0.0), 0.5, 0.5, Material::kSkin, 8);
  add_sphere(m, Vec3(0.0, 16.4, 0.0), 1.1, Material::kSkin);
  return m;
}

GarmentMesh make_garment_panel(const GarmentPanelOptions& opts, Rng& rng) {
  GarmentMesh g;
  const int nx = opts.columns;
  const int ny = opts.rows;
  const double dx = 2.0 * kPanelHalf / (nx - 1);
  const double dy = 2.0 * kPanelHalf / (ny - 1);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double x = -kPanelHalf + i * dx;
      double y = kPanelCenterY + kPanelHalf - j * dy;
      const bool interior = i > 0 && j > 0 && i + 1 < nx && j + 1 < ny;
      if (interior && opts.jitter > 0.0) {
        x += uniform(rng, -opts.jitter, opts.jitter) * dx;
        y += uniform(rng, -opts.jitter, opts.jitter) * dy;
      }
      g.vertices.emplace_back(x, y, torso_front_z(x) + opts.standoff);
      g.uv.emplace_back((x + kPanelHalf) / (2.0 * kPanelHalf), (kPanelCenterY + kPanelHalf - y) / (2.0 * kPanelHalf));
    }
  }
  auto id = [nx](int i, int j) { return j * nx + i; };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i, j + 1), d = id(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        g.faces.push_back({a, c, d});
        g.faces.push_back({a, d, b});
      } else {
        g.faces.push_back({a, c, b});
        g.faces.push_back({b, c, d});
      }
    }
  }
  derive_edges_from_faces(g);
  return g;
}

}  // namespace advreal::geometry
