#include "advreal/scene/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "advreal/core/errors.hpp"

namespace advreal::scene {
namespace {

using geometry::Vec2;
using geometry::Vec3;

struct ScreenVertex {
  double x, y, z;  // pixel coordinates and camera depth
};

struct Fragment {
  double depth = std::numeric_limits<double>::infinity();
  int face = -1;
  std::array<double, 3> bary{};
};

const Vec3 kLightDir = Vec3(-0.4, -0.6, -0.7).normalized();  // towards the light, camera frame

Vec3 to_camera(const Vec3& model, const Eigen::Matrix3d& rot, const Vec3& centre) {
  const Vec3 metres = (model - Vec3(0.0, 0.5 * geometry::kPersonHeightMeters * geometry::kModelUnitsPerMeter, 0.0)) /
                      geometry::kModelUnitsPerMeter;
  const Vec3 r = rot * metres;
  // Model frame is y-up facing +z; camera frame is y-down looking along +z.
  return Vec3(r.x(), -r.y(), -r.z()) + centre;
}

}  // namespace

RenderOutput rasterize(const geometry::BodyMesh& body, const geometry::GarmentMesh& garment, const Image& texture,
                       const RenderParams& params, const BoundingBox& target, const Camera& camera,
                       const BodyColors& colors) {
  if (!target.valid()) throw DomainError("invalid target box");
  if (!(params.distance > 0.0) || !(params.scale > 0.0)) throw DomainError("invalid render parameters");
  if (!texture.empty() && !garment.faces.empty() && garment.uv.size() != garment.vertices.size()) {
    throw DomainError("garment lacks uv coordinates");
  }
  const double focal = params.scale * params.distance;
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(params.azimuth, Vec3::UnitY()).toRotationMatrix();
  const Vec3 centre(0.0, params.distance * std::tan(params.elevation), params.distance);
  const double shift_x = target.center_x() - camera.cx();

  std::vector<Vec3> cam;
  cam.reserve(body.vertices.size() + garment.vertices.size());
  for (const auto& v : body.vertices) cam.push_back(to_camera(v, rot, centre));
  for (const auto& v : garment.vertices) cam.push_back(to_camera(v, rot, centre));

  std::vector<ScreenVertex> scr(cam.size());
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x, min_y = min_x, max_y = -min_x;
  for (std::size_t i = 0; i < cam.size(); ++i) {
    if (!(cam[i].z() > 1e-3)) throw DomainError("model behind the camera");
    scr[i] = {focal * cam[i].x() / cam[i].z() + camera.cx() + shift_x, focal * cam[i].y() / cam[i].z() + camera.cy(),
              cam[i].z()};
    min_x = std::min(min_x, scr[i].x);
    max_x = std::max(max_x, scr[i].x);
    min_y = std::min(min_y, scr[i].y);
    max_y = std::max(max_y, scr[i].y);
  }
  // Fit the projected extent inside the target box.
  const double shrink = std::min({1.0, target.width() / (max_x - min_x), target.height() / (max_y - min_y)});
  const double px = 0.5 * (min_x + max_x);
  const double py = 0.5 * (min_y + max_y);
  for (auto& s : scr) {
    s.x = target.center_x() + shrink * (s.x - px);
    s.y = target.center_y() + shrink * (s.y - py);
  }

  const int nb = static_cast<int>(body.faces.size());
  const int offset = static_cast<int>(body.vertices.size());
  auto face_vertices = [&](int f) -> std::array<int, 3> {
    if (f < nb) return body.faces[f];
    const auto& g = garment.faces[f - nb];
    return {g[0] + offset, g[1] + offset, g[2] + offset};
  };
  const int total_faces = nb + static_cast<int>(garment.faces.size());

  const int w = camera.width;
  const int h = camera.height;
  std::vector<Fragment> frags(static_cast<std::size_t>(w) * h);
  for (int f = 0; f < total_faces; ++f) {
    const auto idx = face_vertices(f);
    const ScreenVertex& a = scr[idx[0]];
    const ScreenVertex& b = scr[idx[1]];
    const ScreenVertex& c = scr[idx[2]];
    const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (std::abs(area) < 1e-12) continue;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}))));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}))));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
    for (int y = y0; y <= y1; ++y) {
      const double sy = y + 0.5;
      for (int x = x0; x <= x1; ++x) {
        const double sx = x + 0.5;
        const double w0 = ((b.x - sx) * (c.y - sy) - (b.y - sy) * (c.x - sx)) / area;
        const double w1 = ((c.x - sx) * (a.y - sy) - (c.y - sy) * (a.x - sx)) / area;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        const double p0 = w0 / a.z, p1 = w1 / b.z, p2 = w2 / c.z;
        const double inv = p0 + p1 + p2;
        const double depth = 1.0 / inv;
        Fragment& frag = frags[static_cast<std::size_t>(y) * w + x];
        if (depth < frag.depth) {
          frag.depth = depth;
          frag.face = f;
          frag.bary = {p0 / inv, p1 / inv, p2 / inv};
        }
      }
    }
  }

  std::vector<double> shade(total_faces);
  for (int f = 0; f < total_faces; ++f) {
    const auto idx = face_vertices(f);
    Vec3 n = (cam[idx[1]] - cam[idx[0]]).cross(cam[idx[2]] - cam[idx[0]]);
    const double len = n.norm();
    if (len > 0.0) n /= len;
    if (n.dot(cam[idx[0]]) > 0.0) n = -n;  // face the viewer
    shade[f] = kAmbient + kDiffuse * std::max(0.0, n.dot(kLightDir));
  }

  RenderOutput out;
  out.render = Image(w, h, 3, 0.0);
  out.mask = Mask(w, h, 0);
  int bx0 = w, by0 = h, bx1 = -1, by1 = -1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Fragment& frag = frags[static_cast<std::size_t>(y) * w + x];
      if (frag.face < 0) continue;
      out.mask.at(x, y) = 1;
      bx0 = std::min(bx0, x);
      by0 = std::min(by0, y);
      bx1 = std::max(bx1, x);
      by1 = std::max(by1, y);
      const double s = shade[frag.face];
      if (frag.face < nb) {
        const Rgb* col = &colors.shirt;
        switch (body.face_material[frag.face]) {
          case geometry::Material::kSkin: col = &colors.skin; break;
          case geometry::Material::kPants: col = &colors.pants; break;
          case geometry::Material::kShirt: break;
        }
        for (int ch = 0; ch < 3; ++ch) out.render.at(x, y, ch) = s * (*col)[ch];
        continue;
      }
      if (texture.empty()) {
        for (int ch = 0; ch < 3; ++ch) out.render.at(x, y, ch) = s * colors.shirt[ch];
        continue;
      }
      const auto& gf = garment.faces[frag.face - nb];
      Vec2 uv = Vec2::Zero();
      for (int k = 0; k < 3; ++k) uv += frag.bary[k] * garment.uv[gf[k]];
      TexelTap tap;
      tap.pixel = static_cast<std::uint32_t>(y * w + x);
      tap.x = uv.x() * texture.width - 0.5;
      tap.y = uv.y() * texture.height - 0.5;
      tap.gain = s;
      out.taps.push_back(tap);
    }
  }
  retexture(out, texture);
  if (bx1 < 0) throw DomainError("empty projection");
  out.silhouette_box = {static_cast<double>(bx0), static_cast<double>(by0), static_cast<double>(bx1 + 1),
                        static_cast<double>(by1 + 1)};
  return out;
}

void retexture(RenderOutput& out, const Image& texture) {
  if (texture.empty()) return;
  for (const TexelTap& t : out.taps) {
    for (int ch = 0; ch < 3; ++ch) {
      out.render.data[static_cast<std::size_t>(t.pixel) * 3 + ch] = t.gain * sample_bilinear(texture, t.x, t.y, ch);
    }
  }
}

}  // namespace advreal::scene
