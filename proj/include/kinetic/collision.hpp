#pragma once

#include "kinetic/geometry.hpp"
#include "kinetic/quadrature.hpp"
#include "kinetic/velocity_grid.hpp"

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

namespace kinetic {

/// Angular part b(cos theta) of the cutoff kernel, as a polynomial in
/// cos theta. Hard spheres are the constant 1.
class AngularKernel {
 public:
  static AngularKernel hard_spheres() { return AngularKernel({1.0}); }
  explicit AngularKernel(std::vector<double> coefficients);

  double operator()(double cos_theta) const;
  const std::vector<double>& coefficients() const { return coeffs_; }

 private:
  std::vector<double> coeffs_;
};

struct CollisionParams {
  double gamma = 1.0;
  double c_phi = 1.0;
  std::vector<double> b_coefficients{1.0};
  int sphere_polar = 16;
  int sphere_azimuth = 16;
};

/// Cutoff hard-potential kernel B = C_phi |v - v_*|^gamma b(cos theta).
class CollisionModel {
 public:
  explicit CollisionModel(const CollisionParams& params);

  double gamma() const { return gamma_; }
  double c_phi() const { return c_phi_; }
  const AngularKernel& b() const { return b_; }
  double b_inf() const { return b_inf_; }
  double l_b() const { return l_b_; }
  const SphereQuadrature& sphere() const { return sphere_; }
  const CollisionParams& params() const { return params_; }

  /// Kinetic factor Phi(z) = C_phi z^gamma.
  double phi(double z) const;

  /// Collision frequency nu(v) interpolated from a cached radial table.
  double nu(const Vec3& v) const { return nu_speed(v.norm()); }
  double nu_speed(double speed) const;

 private:
  CollisionParams params_;
  double gamma_;
  double c_phi_;
  AngularKernel b_;
  SphereQuadrature sphere_;
  double b_inf_ = 0.0;
  double l_b_ = 0.0;
  double table_dr_ = 0.0;
  std::vector<double> nu_table_;
};

/// Post-collisional velocities (v', v'_*) for the sigma-representation.
std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& v_star, const Vec3& sigma);

struct NuEvaluation {
  double value;
  double richardson_error;  // |coarse - fine| estimate
  bool under_resolved;
};

/// nu(v) = C_phi int int b |v - v_*|^gamma mu_* dsigma dv_* by a 3D quadrature
/// in spherical coordinates centred at v, with a Richardson check against the
/// half-resolution rule.
NuEvaluation collision_frequency(const CollisionModel& model, const Vec3& v,
                                 double tol = 1e-8);

struct NuBounds {
  double nu_min;  // inf of nu over the nodes
  double nu0;     // largest nu0 with nu0 (1 + |v|^gamma) <= nu(v) at every node
  double nu1;     // smallest nu1 with nu(v) <= nu1 (1 + |v|^gamma)
};

NuBounds fit_nu_bounds(const VelocityGrid& grid, const Eigen::VectorXd& nu, double gamma);

}  // namespace kinetic
