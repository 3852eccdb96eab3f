#include "advreal/attack/scene3d.hpp"

#include <algorithm>
#include <cmath>

#include "advreal/core/errors.hpp"
#include "advreal/scene/composite.hpp"
#include "advreal/scene/ssim.hpp"

namespace advreal::attack {
namespace {

scene::RenderOutput textured(const Scene3D& s, const Image& patch) {
  scene::RenderOutput r = s.render;
  scene::retexture(r, patch);
  return r;
}

Mask downsample_mask(const Mask& m, int max_side) {
  Image as_img(m.width, m.height, 1);
  for (std::size_t i = 0; i < m.data.size(); ++i) as_img.data[i] = m.data[i];
  const Image small = downsample_to(as_img, max_side);
  Mask out(small.width, small.height);
  for (std::size_t i = 0; i < small.data.size(); ++i) out.data[i] = small.data[i] >= 0.5 ? 1 : 0;
  return out;
}

Mask crop_mask(const Mask& m, int x0, int y0, int w, int h) {
  Mask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = m.at(x0 + x, y0 + y);
  return out;
}

}  // namespace

void Scene3DConfig::validate() const {
  if (!(sigma_thres >= 0.0)) throw DomainError("sigma_thres must be nonnegative");
  if (!(offset_max >= 0.0)) throw DomainError("offset_max must be nonnegative");
  if (relight_max_side < scene::kSsimWindow) throw DomainError("relight_max_side smaller than the SSIM window");
  tps.validate();
  relight.validate();
}

GarmentRig GarmentRig::make(std::uint64_t seed, const Scene3DConfig& cfg) {
  GarmentRig rig;
  Rng rng(seed);
  rig.body = geometry::make_body();
  rig.garment = geometry::make_garment_panel({}, rng);
  rig.stress = geometry::compute_vertex_stress(rig.garment);
  const auto candidates = geometry::select_high_stress(rig.stress, cfg.sigma_thres);
  rig.control = geometry::select_control_points(candidates, rig.stress, rig.garment.vertices, cfg.selection);
  return rig;
}

Scene3D build_scene3d(const Image& background, const Image& patch, const GarmentRig& rig, const Scene3DConfig& cfg,
                      Rng& rng, std::optional<double> azimuth) {
  if (background.width != cfg.camera.width || background.height != cfg.camera.height || background.channels != 3) {
    throw DomainError("background does not match the camera frame");
  }
  Scene3D s;
  s.background = background;

  geometry::GarmentMesh garment = rig.garment;
  if (cfg.deform && rig.control.size() > 0) {
    geometry::ControlPointSet control = rig.control;
    geometry::sample_target_offsets(control, cfg.offset_max, rng);
    geometry::TpsConfig tps = cfg.tps;
    tps.rng_seed = rng();
    garment = geometry::deform(rig.garment, control, rig.stress, tps);
  }

  std::optional<Eigen::Vector2d> orient;
  if (azimuth) orient = scene::orientation_from_azimuth(*azimuth);
  s.placement = scene::timespace_sample(cfg.camera, rng, orient, cfg.timespace);
  s.params = scene::derive_render_params(s.placement.human, s.placement.orientation, cfg.camera);
  s.render = scene::rasterize(rig.body, garment, patch, s.params, s.placement.human, cfg.camera);
  s.gt = s.render.silhouette_box;

  if (cfg.relight_enabled) {
    const BoundingBox& b = s.gt;
    const int x0 = static_cast<int>(b.x_min), y0 = static_cast<int>(b.y_min);
    const int w = static_cast<int>(b.x_max) - x0, h = static_cast<int>(b.y_max) - y0;
    const Image render_crop = downsample_to(crop(s.render.render, x0, y0, w, h), cfg.relight_max_side);
    const Image real_crop = downsample_to(crop(background, x0, y0, w, h), cfg.relight_max_side);
    const Mask mask_crop = downsample_mask(crop_mask(s.render.mask, x0, y0, w, h), cfg.relight_max_side);
    if (render_crop.width >= scene::kSsimWindow && render_crop.height >= scene::kSsimWindow &&
        mask_crop.count() > 0) {
      s.relight = scene::relight_optimize(render_crop, real_crop, cfg.relight, &mask_crop).coeffs;
    }
  }
  return s;
}

Image compose_scene3d(const Scene3D& s, const Image& patch) {
  const scene::RenderOutput r = textured(s, patch);
  const Image relit = scene::apply_relight(r.render, s.relight, &r.mask, &s.background);
  return scene::composite(relit, r.mask, s.background);
}

Image backprop_scene3d(const Scene3D& s, const Image& patch, const Image& grad_image) {
  const scene::RenderOutput r = textured(s, patch);
  const Image g_relit = scene::composite_backward_render(grad_image, r.mask);
  const Image g_render = scene::relight_backward(r.render, s.relight, g_relit, &r.mask);
  Image grad(patch.width, patch.height, patch.channels, 0.0);
  backprop_taps(r.taps, g_render, grad);
  return grad;
}

}  // namespace advreal::attack
