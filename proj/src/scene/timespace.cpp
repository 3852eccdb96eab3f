#include "advreal/scene/timespace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "advreal/core/errors.hpp"

namespace advreal::scene {

std::pair<double, double> feasible_distance_range(const Camera& camera, const TimespaceOptions& opts) {
  const double fh = camera.focal * kPersonHeight;
  const double lo = std::max(kMinDistance, fh / (opts.fill * camera.height));
  const double hi = std::min(std::max(kMaxDistance, 1.6 * lo), fh / kMinPersonPixels);
  return {lo, hi};
}

TimespacePlacement timespace_sample(const Camera& camera, Rng& rng, std::optional<Eigen::Vector2d> orientation,
                                    const TimespaceOptions& opts) {
  if (orientation && !(orientation->norm() > 0.0)) throw DomainError("orientation must be non-zero");
  const auto [d_lo, d_hi] = feasible_distance_range(camera, opts);
  const double step_hi = opts.max_step;
  if (!(d_hi >= d_lo * (1.0 + step_hi) * (1.0 + step_hi))) {
    throw DomainError("background too small for a " + std::to_string(static_cast<int>(kMinPersonPixels)) +
                      "-pixel person box");
  }
  // Widest box (nearest, widest aspect) must fit horizontally.
  const double max_width = camera.focal * kPersonHeight / d_lo * opts.aspect * (1.0 + opts.aspect_jitter);
  if (max_width > camera.width) throw DomainError("background too narrow for the person box");

  TimespacePlacement out;
  if (orientation) {
    out.orientation = orientation->normalized();
  } else {
    const double t = uniform(rng, -std::numbers::pi, std::numbers::pi);
    out.orientation = {std::cos(t), std::sin(t)};
  }
  const double step = uniform(rng, opts.min_step, step_hi);
  out.d_human = uniform(rng, d_lo * (1.0 + step), d_hi / (1.0 + step));
  out.d_near = out.d_human / (1.0 + step);
  out.d_far = out.d_human * (1.0 + step);
  const double aspect = opts.aspect * uniform(rng, 1.0 - opts.aspect_jitter, 1.0 + opts.aspect_jitter);

  // Camera height keeping every box vertically inside the image.
  double h_lo = 0.0;
  double h_hi = 1e9;
  for (double d : {out.d_near, out.d_human, out.d_far}) {
    h_lo = std::max(h_lo, kPersonHeight - camera.cy() * d / camera.focal);
    h_hi = std::min(h_hi, (camera.height - camera.cy()) * d / camera.focal);
  }
  out.camera_height = h_hi > h_lo ? uniform(rng, h_lo, h_hi) : 0.5 * (h_lo + h_hi);

  auto make_box = [&](double d, double lateral) {
    const double h = camera.focal * kPersonHeight / d;
    const double w = aspect * h;
    const double foot = camera.cy() + camera.focal * out.camera_height / d;
    double cx = camera.cx() + camera.focal * lateral / d;
    cx = std::clamp(cx, 0.5 * w, camera.width - 0.5 * w);
    BoundingBox b{cx - 0.5 * w, foot - h, cx + 0.5 * w, foot};
    // Guard against rounding at the image border.
    const double dy = std::max(0.0, -b.y_min) - std::max(0.0, b.y_max - camera.height);
    b.y_min += dy;
    b.y_max += dy;
    return b;
  };

  const double w_human = aspect * camera.focal * kPersonHeight / out.d_human;
  const double cx_human = uniform(rng, 0.5 * w_human, camera.width - 0.5 * w_human);
  const double lateral_human = (cx_human - camera.cx()) * out.d_human / camera.focal;
  out.human = make_box(out.d_human, lateral_human);

  // Walking along the facing direction: positive towards-camera component means
  // the near box lies ahead of the person.
  const double vx = out.orientation.x();
  const double vz = out.orientation.y();
  const double ahead = vz >= 0.0 ? 1.0 : -1.0;
  const double denom = std::max(std::abs(vz), 0.3);
  const double t_near = (out.d_human - out.d_near) / denom;
  const double t_far = (out.d_far - out.d_human) / denom;
  out.near = make_box(out.d_near, lateral_human + ahead * vx * t_near);
  out.far = make_box(out.d_far, lateral_human - ahead * vx * t_far);
  return out;
}

}  // namespace advreal::scene
