#include "advreal/geometry/tps.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "advreal/core/errors.hpp"
#include "advreal/core/rng.hpp"

namespace advreal::geometry {

void TpsConfig::validate() const {
  if (!(noise_scale >= 0.0)) throw DomainError("noise_scale must be >= 0");
  if (!(max_displacement > 0.0)) throw DomainError("max_displacement must be > 0");
  if (!(stress_gain >= 0.0)) throw DomainError("stress_gain must be >= 0");
  if (kernel == RbfKernel::kGaussian && !(kernel_width > 0.0)) throw DomainError("kernel_width must be > 0");
  if (!noise_covariance.isApprox(noise_covariance.transpose(), 1e-12)) {
    throw DomainError("noise covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(noise_covariance);
  if (eig.eigenvalues().minCoeff() < -1e-12) throw DomainError("noise covariance must be PSD");
}

double rbf_value(RbfKernel kernel, double kernel_width, double r) {
  double v = 0.0;
  switch (kernel) {
    case RbfKernel::kLinear:
      v = r;
      break;
    case RbfKernel::kGaussian:
      v = std::exp(-(r / kernel_width) * (r / kernel_width));
      break;
  }
  return r == 0.0 ? v + kTpsRidge : v;
}

TpsWeights solve_tps_weights(const ControlPointSet& control, const TpsConfig& cfg) {
  const auto k = static_cast<Eigen::Index>(control.size());
  if (k == 0) throw DomainError("at least one control point required");
  if (control.target_offsets.size() != control.size() || control.positions.size() != control.size()) {
    throw DomainError("control point arrays are misaligned");
  }
  Eigen::MatrixXd kernel(k, k);
  for (Eigen::Index m = 0; m < k; ++m) {
    for (Eigen::Index j = 0; j < k; ++j) {
      kernel(m, j) = rbf_value(cfg.kernel, cfg.kernel_width, (control.positions[m] - control.positions[j]).norm());
    }
  }
  Eigen::Matrix<double, Eigen::Dynamic, 3> rhs(k, 3);
  for (Eigen::Index m = 0; m < k; ++m) rhs.row(m) = control.target_offsets[m].transpose();

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(kernel);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15)) {
    std::ostringstream msg;
    msg << "singular TPS kernel matrix (reciprocal condition estimate " << rcond << ")";
    throw NumericalError(msg.str());
  }
  TpsWeights w = lu.solve(rhs);
  if (!w.allFinite()) throw NumericalError("non-finite TPS weights");
  return w;
}

Vec3 evaluate_rbf(const ControlPointSet& control, const TpsWeights& weights, const TpsConfig& cfg, const Vec3& p) {
  Vec3 acc = Vec3::Zero();
  for (std::size_t k = 0; k < control.size(); ++k) {
    const double phi = rbf_value(cfg.kernel, cfg.kernel_width, (p - control.positions[k]).norm());
    acc += phi * weights.row(static_cast<Eigen::Index>(k)).transpose();
  }
  return acc;
}

std::vector<Vec3> sample_vertex_noise(std::size_t vertex_count, const TpsConfig& cfg) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cfg.noise_covariance);
  const Eigen::Vector3d root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix3d factor = eig.eigenvectors() * root.asDiagonal();
  Rng rng(cfg.rng_seed);
  std::vector<Vec3> out(vertex_count);
  for (auto& r : out) {
    const Vec3 z(normal(rng), normal(rng), normal(rng));
    r = factor * z;
  }
  return out;
}

std::vector<Vec3> raw_displacements(const GarmentMesh& mesh, const ControlPointSet& control, const TpsConfig& cfg) {
  cfg.validate();
  std::vector<Vec3> disp(mesh.vertices.size(), Vec3::Zero());
  if (!control.indices.empty()) {
    const TpsWeights w = solve_tps_weights(control, cfg);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) disp[i] = evaluate_rbf(control, w, cfg, mesh.vertices[i]);
  }
  if (cfg.noise_scale > 0.0) {
    const auto noise = sample_vertex_noise(mesh.vertices.size(), cfg);
    for (std::size_t i = 0; i < disp.size(); ++i) disp[i] += cfg.noise_scale * noise[i];
  }
  return disp;
}

GarmentMesh deform(const GarmentMesh& mesh, const ControlPointSet& control, const StressField& stress,
                   const TpsConfig& cfg) {
  if (stress.sigma.size() != mesh.vertices.size()) throw DomainError("stress field not aligned with mesh");
  const auto disp = raw_displacements(mesh, control, cfg);
  GarmentMesh out = mesh;
  for (std::size_t i = 0; i < disp.size(); ++i) {
    const double norm = disp[i].norm();
    const double cap = cfg.max_displacement * (1.0 + cfg.stress_gain * stress.sigma[i]);
    const double scale = norm > cap ? cap / norm : 1.0;
    out.vertices[i] = mesh.vertices[i] + scale * disp[i];
  }
  return out;
}

}  // namespace advreal::geometry
