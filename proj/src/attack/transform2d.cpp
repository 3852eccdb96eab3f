#include "advreal/attack/transform2d.hpp"

#include <algorithm>
#include <cmath>

#include "advreal/core/errors.hpp"
#include "advreal/core/log.hpp"

namespace advreal::attack {
namespace {

struct Square {
  int x0, y0, x1, y1;  // half-open texel range
};

Square occlusion_square(int w, int h, double fraction) {
  const int sw = static_cast<int>(std::lround(std::sqrt(fraction) * w));
  const int sh = static_cast<int>(std::lround(std::sqrt(fraction) * h));
  const int x0 = (w - sw) / 2;
  const int y0 = (h - sh) / 2;
  return {x0, y0, x0 + sw, y0 + sh};
}

}  // namespace

void Transform2D::validate() const {
  if (!(scale > 0.0)) throw DomainError("transform scale must be positive");
  if (!(occlusion >= 0.0 && occlusion < 1.0)) throw DomainError("occlusion fraction outside [0,1)");
  if (!(noise >= 0.0)) throw DomainError("noise amplitude must be nonnegative");
  if (!std::isfinite(rotation) || !std::isfinite(dx) || !std::isfinite(dy)) throw DomainError("non-finite transform");
}

void TransformRanges::validate() const {
  if (!(max_rotation >= 0.0)) throw DomainError("max_rotation must be nonnegative");
  if (!(scale_lo > 0.0 && scale_lo <= scale_hi)) throw DomainError("invalid scale range");
  if (!(offset_fraction >= 0.0)) throw DomainError("offset_fraction must be nonnegative");
  if (!(occlusion_probability >= 0.0 && occlusion_probability <= 1.0)) {
    throw DomainError("occlusion_probability outside [0,1]");
  }
  if (!(occlusion_fraction >= 0.0 && occlusion_fraction < 1.0)) throw DomainError("occlusion_fraction outside [0,1)");
  if (!(max_noise >= 0.0)) throw DomainError("max_noise must be nonnegative");
}

Transform2D sample_transform(const TransformRanges& ranges, const BoundingBox& box, Rng& rng) {
  Transform2D t;
  t.rotation = uniform(rng, -ranges.max_rotation, ranges.max_rotation);
  t.scale = uniform(rng, ranges.scale_lo, ranges.scale_hi);
  t.dx = uniform(rng, -ranges.offset_fraction, ranges.offset_fraction) * box.width();
  t.dy = uniform(rng, -ranges.offset_fraction, ranges.offset_fraction) * box.height();
  t.occlusion = bernoulli(rng, ranges.occlusion_probability) ? ranges.occlusion_fraction : 0.0;
  t.noise = uniform(rng, 0.0, ranges.max_noise);
  t.noise_seed = rng();
  return t;
}

Image occlude_center(const Image& patch, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw DomainError("occlusion fraction outside [0,1)");
  Image out = patch;
  const Square sq = occlusion_square(patch.width, patch.height, fraction);
  for (int y = sq.y0; y < sq.y1; ++y)
    for (int x = sq.x0; x < sq.x1; ++x)
      for (int c = 0; c < patch.channels; ++c) out.at(x, y, c) = kOcclusionGray;
  return out;
}

Placed2D apply_2d(const Image& patch, const Image& person, const BoundingBox& box, const Transform2D& t,
                  double size_fraction) {
  t.validate();
  if (patch.empty() || patch.channels != person.channels) throw DomainError("patch/image channel mismatch");
  if (!box.valid() || !box.inside(person.width, person.height)) throw DomainError("ground-truth box outside image");

  Placed2D out;
  out.image = person;
  out.saturated.assign(person.data.size(), 0);
  out.patch_width = patch.width;
  out.patch_height = patch.height;
  out.occlusion = t.occlusion;
  const Image src = t.occlusion > 0.0 ? occlude_center(patch, t.occlusion) : patch;

  const double side_h = size_fraction * box.height() * t.scale;
  const double side_w = side_h * patch.width / patch.height;
  const double cx = box.center_x() + t.dx;
  const double cy = box.center_y() + t.dy;
  const double cs = std::cos(t.rotation), sn = std::sin(t.rotation);

  // Image-space extent of the rotated rectangle.
  const double ex = 0.5 * (std::abs(cs) * side_w + std::abs(sn) * side_h);
  const double ey = 0.5 * (std::abs(sn) * side_w + std::abs(cs) * side_h);
  if (cx - ex < 0.0 || cy - ey < 0.0 || cx + ex > person.width || cy + ey > person.height) {
    out.clipped = true;
    warn("patch extends past the image and is clipped");
  }
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - ex)));
  const int x1 = std::min(person.width - 1, static_cast<int>(std::ceil(cx + ex)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - ey)));
  const int y1 = std::min(person.height - 1, static_cast<int>(std::ceil(cy + ey)));

  const double kx = patch.width / side_w;
  const double ky = patch.height / side_h;
  Rng noise_rng(t.noise_seed);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5 - cx;
      const double py = y + 0.5 - cy;
      // inverse rotation
      const double qx = cs * px + sn * py;
      const double qy = -sn * px + cs * py;
      // snapped so that boundary hits do not depend on roundoff
      const double u = std::round((qx * kx + 0.5 * patch.width - 0.5) * 1e9) * 1e-9;
      const double v = std::round((qy * ky + 0.5 * patch.height - 0.5) * 1e9) * 1e-9;
      if (u < -0.5 || u >= patch.width - 0.5 || v < -0.5 || v >= patch.height - 0.5) continue;
      TexelTap tap;
      tap.pixel = static_cast<std::uint32_t>(y * person.width + x);
      tap.x = u;
      tap.y = v;
      tap.gain = 1.0;
      out.taps.push_back(tap);
      for (int c = 0; c < person.channels; ++c) {
        double val = sample_bilinear(src, u, v, c);
        if (t.noise > 0.0) val += t.noise * normal(noise_rng);
        const std::size_t i = person.index(x, y, c);
        if (val < 0.0 || val > 1.0) {
          out.saturated[i] = 1;
          val = std::clamp(val, 0.0, 1.0);
        }
        out.image.data[i] = val;
      }
    }
  }
  return out;
}

Image backprop_2d(const Placed2D& placed, const Image& grad_image) {
  if (grad_image.data.size() != placed.image.data.size()) throw DomainError("gradient shape mismatch");
  Image g = grad_image;
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    if (placed.saturated[i]) g.data[i] = 0.0;
  }
  Image grad(placed.patch_width, placed.patch_height, placed.image.channels, 0.0);
  backprop_taps(placed.taps, g, grad);
  if (placed.occlusion > 0.0) {
    const Square sq = occlusion_square(grad.width, grad.height, placed.occlusion);
    for (int y = sq.y0; y < sq.y1; ++y)
      for (int x = sq.x0; x < sq.x1; ++x)
        for (int c = 0; c < grad.channels; ++c) grad.at(x, y, c) = 0.0;
  }
  return grad;
}

}  // namespace advreal::attack
