#pragma once

#include "kinetic/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace kinetic {

/// Global Maxwellian (2 pi)^{-3/2} exp(-|v|^2 / 2).
double maxwellian(const Vec3& v);
double maxwellian(double speed_sq);

/// Tensorized cell-centred lattice on [-V_max, V_max]^3 with n nodes per axis.
///
/// Node coordinates are (i + 1/2) h - V_max with h = 2 V_max / n, so the node
/// set is closed under v -> -v and under each single-axis reflection.
class VelocityGrid {
 public:
  VelocityGrid(int n_per_axis, double v_max);

  int n_per_axis() const { return n_; }
  double v_max() const { return v_max_; }
  double spacing() const { return h_; }
  double weight() const { return h_ * h_ * h_; }
  int size() const { return n_ * n_ * n_; }

  const Vec3& node(int a) const { return nodes_[a]; }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  /// Maxwellian sampled at the nodes.
  const Eigen::VectorXd& mu() const { return mu_; }

  int index(int i, int j, int k) const { return (i * n_ + j) * n_ + k; }
  std::array<int, 3> multi_index(int a) const {
    return {a / (n_ * n_), (a / n_) % n_, a % n_};
  }
  /// Node index of the velocity with component `axis` negated.
  int reflect(int a, int axis) const;
  int negate(int a) const;
  /// True if the node lies on the outermost shell of the lattice.
  bool on_edge(int a) const;

  /// Quadrature sum h^3 sum_a g_a.
  double integrate(const Eigen::Ref<const Eigen::VectorXd>& g) const { return weight() * g.sum(); }

  /// Trilinear interpolation weights for an arbitrary velocity; returns false
  /// when v lies outside the convex hull of the nodes.
  bool trilinear(const Vec3& v, std::array<int, 8>& idx, std::array<double, 8>& w) const;

  /// Deposition weights onto at most 27 nodes reproducing 1, v and |v|^2
  /// exactly (tensor quadratic Lagrange stencil). Returns false outside the
  /// convex hull of the nodes.
  bool conservative_stencil(const Vec3& v, std::vector<std::pair<int, double>>& out) const;

  /// Image of node a under the lattice symmetry (axis permutation and
  /// reflections) whose direction is closest to v. Same speed as node a.
  int nearest_symmetric_image(int a, const Vec3& v) const;

  /// Discrete mass of the sampled Maxwellian; 1 up to quadrature error.
  double maxwellian_mass() const { return integrate(mu_); }

 private:
  int n_;
  double v_max_;
  double h_;
  std::vector<Vec3> nodes_;
  Eigen::VectorXd mu_;
};

}  // namespace kinetic
