#pragma once

// Independent reference computations used by the tests. None of these call
// into the library code paths they check.

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "advreal/core/rng.hpp"
#include "advreal/geometry/mesh.hpp"

namespace oracle {

using advreal::geometry::Vec3;

/// Random triangle mesh: jittered points with faces from a random fan/strip pattern.
inline advreal::geometry::GarmentMesh random_mesh(advreal::Rng& rng, int n_vertices) {
  advreal::geometry::GarmentMesh m;
  for (int i = 0; i < n_vertices; ++i) {
    m.vertices.emplace_back(advreal::uniform(rng, -5, 5), advreal::uniform(rng, -5, 5), advreal::uniform(rng, -1, 1));
  }
  const int faces = std::max(1, n_vertices * 2 - 4);
  std::uniform_int_distribution<int> pick(0, n_vertices - 1);
  for (int f = 0; f < faces; ++f) {
    int a = pick(rng), b = pick(rng), c = pick(rng);
    if (a == b || b == c || a == c) continue;
    m.faces.push_back({a, b, c});
  }
  return m;
}

/// sigma_i by scanning every vertex pair and testing face co-membership.
inline std::vector<double> stress_double_loop(const advreal::geometry::GarmentMesh& m, double weight = 1.0) {
  std::set<std::pair<int, int>> adjacent;
  for (const auto& f : m.faces) {
    for (int k = 0; k < 3; ++k) {
      adjacent.insert({f[k], f[(k + 1) % 3]});
      adjacent.insert({f[(k + 1) % 3], f[k]});
    }
  }
  const int n = static_cast<int>(m.vertices.size());
  std::vector<double> sigma(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && adjacent.count({i, j})) sigma[i] += weight * (m.vertices[j] - m.vertices[i]).norm();
    }
  }
  return sigma;
}

/// Filter then sort with an explicit comparator on (sigma desc, index asc).
inline std::vector<int> filter_sort(const std::vector<double>& sigma, double thres) {
  std::vector<std::pair<double, int>> keep;
  for (int i = 0; i < static_cast<int>(sigma.size()); ++i) {
    if (sigma[i] > thres) keep.emplace_back(-sigma[i], i);
  }
  std::sort(keep.begin(), keep.end());
  std::vector<int> out;
  for (const auto& [s, i] : keep) out.push_back(i);
  return out;
}

/// Literal greedy isolation scan with an explicit pairwise loop.
inline std::vector<int> greedy_isolation(const std::vector<int>& order, const std::vector<double>& sigma,
                                         const std::vector<Vec3>& pos, double gamma, double rho, int n_min) {
  const std::size_t target = std::max<std::size_t>(n_min, static_cast<std::size_t>(rho * order.size()));
  std::vector<int> chosen;
  for (int i : order) {
    if (chosen.size() >= target) break;
    bool ok = true;
    for (int j : chosen) {
      const double d = std::sqrt((pos[i] - pos[j]).squaredNorm());
      if (!(d >= gamma / sigma[i])) ok = false;
    }
    if (ok) chosen.push_back(i);
  }
  return chosen;
}

/// Gaussian elimination with partial pivoting, columns solved independently.
inline std::vector<Vec3> gauss_solve(std::vector<std::vector<double>> a, std::vector<Vec3> rhs) {
  const int n = static_cast<int>(a.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(rhs[col], rhs[piv]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<Vec3> x(n, Vec3::Zero());
  for (int r = n - 1; r >= 0; --r) {
    Vec3 acc = rhs[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
    x[r] = acc / a[r][r];
  }
  return x;
}

/// Linear-kernel interpolation weights with 1e-8 on the diagonal.
inline std::vector<Vec3> tps_weights_linear(const std::vector<Vec3>& ctrl, const std::vector<Vec3>& offsets) {
  const int n = static_cast<int>(ctrl.size());
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i][j] = (ctrl[i] - ctrl[j]).norm() + (i == j ? 1e-8 : 0.0);
  }
  return gauss_solve(a, offsets);
}

inline Vec3 rbf_sum_linear(const std::vector<Vec3>& ctrl, const std::vector<Vec3>& w, const Vec3& p) {
  Vec3 acc = Vec3::Zero();
  for (std::size_t k = 0; k < ctrl.size(); ++k) {
    const double r = (p - ctrl[k]).norm();
    acc += (r == 0.0 ? 1e-8 : r) * w[k];
  }
  return acc;
}

/// Intersection over union from explicit corner arithmetic.
inline double iou(double ax0, double ay0, double ax1, double ay1, double bx0, double by0, double bx1, double by1) {
  const double ix = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double iy = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = ix * iy;
  return inter / ((ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter);
}

}  // namespace oracle
