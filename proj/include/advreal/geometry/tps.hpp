#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "advreal/geometry/control_points.hpp"
#include "advreal/geometry/mesh.hpp"
#include "advreal/geometry/stress.hpp"

namespace advreal::geometry {

enum class RbfKernel {
  kLinear,    // phi(r) = r, the 3D biharmonic spline
  kGaussian,  // phi(r) = exp(-(r / width)^2)
};

/// Diagonal ridge added to the interpolation system; also used as the
/// kernel's value at exactly zero distance so that control points are
/// reproduced by evaluation.
inline constexpr double kTpsRidge = 1e-8;

struct TpsConfig {
  RbfKernel kernel = RbfKernel::kLinear;
  double kernel_width = 1.0;  // Gaussian only
  double noise_scale = 0.05;  // delta
  Eigen::Matrix3d noise_covariance = Eigen::Matrix3d::Identity();
  double max_displacement = 0.25;  // delta_max
  double stress_gain = 0.2;        // lambda
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Kernel value including the zero-distance ridge.
double rbf_value(RbfKernel kernel, double kernel_width, double r);

/// K x 3 weights, row k paired with control point k.
using TpsWeights = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Solves sum_k w_k phi(|c_m - c_k|) = target_offsets[m] for every control point m.
TpsWeights solve_tps_weights(const ControlPointSet& control, const TpsConfig& cfg);

/// Smooth RBF displacement at `p` (no noise, no cap).
Vec3 evaluate_rbf(const ControlPointSet& control, const TpsWeights& weights, const TpsConfig& cfg, const Vec3& p);

/// Gaussian noise samples r_i ~ N(0, Sigma), one per vertex, drawn in vertex order from cfg.rng_seed.
std::vector<Vec3> sample_vertex_noise(std::size_t vertex_count, const TpsConfig& cfg);

/// Uncapped displacement of each vertex: RBF sum plus delta * r_i.
std::vector<Vec3> raw_displacements(const GarmentMesh& mesh, const ControlPointSet& control, const TpsConfig& cfg);

/// Stochastic TPS deformation with per-vertex displacement capped at
/// delta_max * (1 + lambda * sigma_i). Topology is copied unchanged.
GarmentMesh deform(const GarmentMesh& mesh, const ControlPointSet& control, const StressField& stress,
                   const TpsConfig& cfg);

}  // namespace advreal::geometry
