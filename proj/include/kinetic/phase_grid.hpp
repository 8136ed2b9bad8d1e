#pragma once

#include "kinetic/geometry.hpp"
#include "kinetic/velocity_grid.hpp"

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace kinetic {

/// Spatial discretization of a Domain.
///
/// Slab: n cells of width 1/n along x1 (fields are homogeneous in x2, x3).
/// Ball / ellipsoid: an n^3 box over the bounding box, keeping the cells whose
/// centre lies strictly inside the domain.
class SpatialGrid {
 public:
  SpatialGrid(const Domain& domain, int n);

  const Domain& domain() const { return domain_; }
  int n() const { return n_; }
  int size() const { return static_cast<int>(centers_.size()); }
  const Vec3& center(int k) const { return centers_[k]; }
  const Vec3& spacing() const { return dx_; }
  /// Volume of one cell (per unit tangential area for the slab).
  double cell_volume() const { return dx_.prod(); }

  /// Cell containing x, or -1 when x falls outside every active cell.
  int locate(const Vec3& x) const;
  /// Box multi-index of active cell k.
  const std::array<int, 3>& box_index(int k) const { return box_[k]; }
  /// Active cell at box multi-index (i, j, l), or -1.
  int cell_at(int i, int j, int l) const;
  /// Centre of box cell (i, j, l), active or not.
  Vec3 box_center(int i, int j, int l) const {
    return lo_ + Vec3((i + 0.5) * dx_[0], (j + 0.5) * dx_[1], (l + 0.5) * dx_[2]);
  }
  /// Unmasked trilinear weights of x over the 8 surrounding box cells.
  void box_weights(const Vec3& x, std::array<std::array<int, 3>, 8>& cells,
                   std::array<double, 8>& w) const;

  /// Linear interpolation weights in x over the active cells (renormalized
  /// when some neighbours are inactive; nearest cell as a fallback).
  void interpolation(const Vec3& x, std::vector<std::pair<int, double>>& out) const;

 private:
  Domain domain_;
  int n_;
  Vec3 lo_;
  Vec3 dx_;
  std::vector<Vec3> centers_;
  std::vector<std::array<int, 3>> box_;
  std::vector<int> lookup_;  // box linear index -> active cell
};

/// Distribution f(x, v) on spatial cells x velocity nodes.
/// values(k, a) is f at cell k and node a; the storage is velocity-major so
/// column a is contiguous over cells.
class Field {
 public:
  Field(std::shared_ptr<const SpatialGrid> space, std::shared_ptr<const VelocityGrid> velocity);

  const SpatialGrid& space() const { return *space_; }
  const VelocityGrid& velocity() const { return *velocity_; }
  const std::shared_ptr<const SpatialGrid>& space_ptr() const { return space_; }
  const std::shared_ptr<const VelocityGrid>& velocity_ptr() const { return velocity_; }

  Eigen::MatrixXd& values() { return values_; }
  const Eigen::MatrixXd& values() const { return values_; }
  int n_cells() const { return static_cast<int>(values_.rows()); }
  int n_velocities() const { return static_cast<int>(values_.cols()); }

  double& operator()(int cell, int node) { return values_(cell, node); }
  double operator()(int cell, int node) const { return values_(cell, node); }

  /// Phase-space integral of f * psi(v).
  double moment(const Eigen::VectorXd& psi) const;
  double mass() const;
  double energy() const;  // integral of |v|^2 f
  Vec3 momentum() const;

  /// Interpolated value at an arbitrary phase point (linear in x, trilinear
  /// in v; zero outside the velocity lattice).
  double interpolate(const Vec3& x, const Vec3& v) const;

  /// f(x, v) = F(x) G(v) style fill from a closure.
  template <class Fn>
  void fill(Fn&& fn) {
    for (int k = 0; k < n_cells(); ++k)
      for (int a = 0; a < n_velocities(); ++a)
        values_(k, a) = fn(space_->center(k), velocity_->node(a));
  }

  Field zeros_like() const;

 private:
  std::shared_ptr<const SpatialGrid> space_;
  std::shared_ptr<const VelocityGrid> velocity_;
  Eigen::MatrixXd values_;
};

}  // namespace kinetic
