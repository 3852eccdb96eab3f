#include "advreal/geometry/control_points.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "advreal/core/errors.hpp"

namespace advreal::geometry {

ControlPointSet select_control_points(const std::vector<int>& candidates, const StressField& stress,
                                      const std::vector<Vec3>& positions, const ControlSelection& sel) {
  if (!(sel.gamma > 0.0)) throw DomainError("gamma must be > 0");
  if (!(sel.rho > 0.0 && sel.rho <= 1.0)) throw DomainError("rho must be in (0, 1]");
  if (sel.n_min < 0) throw DomainError("n_min must be >= 0");

  ControlPointSet out;
  if (candidates.empty()) {
    out.empty_candidates = true;
    return out;
  }
  const auto floor_count = static_cast<std::size_t>(std::floor(sel.rho * static_cast<double>(candidates.size())));
  const std::size_t target = std::max(static_cast<std::size_t>(sel.n_min), floor_count);

  for (int idx : candidates) {
    if (out.indices.size() >= target) break;
    const double s = stress.sigma.at(idx);
    const double radius = s > 0.0 ? sel.gamma / s : std::numeric_limits<double>::infinity();
    const Vec3& p = positions.at(idx);
    const bool isolated = std::all_of(out.positions.begin(), out.positions.end(),
                                      [&](const Vec3& q) { return (p - q).norm() >= radius; });
    if (!isolated) continue;
    out.indices.push_back(idx);
    out.positions.push_back(p);
  }
  out.target_offsets.assign(out.indices.size(), Vec3::Zero());
  return out;
}

void sample_target_offsets(ControlPointSet& control, double max_magnitude, Rng& rng) {
  control.target_offsets.resize(control.indices.size());
  for (auto& off : control.target_offsets) {
    Vec3 dir;
    double n = 0.0;
    do {
      dir = Vec3(normal(rng), normal(rng), normal(rng));
      n = dir.norm();
    } while (n < 1e-12);
    off = dir / n * uniform(rng, 0.0, max_magnitude);
  }
}

}  // namespace advreal::geometry
