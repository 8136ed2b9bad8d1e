#pragma once

#include "kinetic/boundary.hpp"
#include "kinetic/phase_grid.hpp"
#include "kinetic/velocity_grid.hpp"

#include <Eigen/Core>

#include <utility>

namespace kinetic {

/// phi_0 = 1, phi_{1..3} = v_i, phi_4 = (|v|^2 - 3) / sqrt(6) at the nodes
/// (columns of the returned matrix).
Eigen::MatrixXd collision_invariants(const VelocityGrid& grid);

struct VelocitySplit {
  Eigen::VectorXd fluid;
  Eigen::VectorXd micro;
};

/// Orthogonal projection onto span{phi_i mu} in L^2(mu^{-1}) using the
/// discrete Gram matrix, so fluid is exactly idempotent on the grid.
VelocitySplit project_piL(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f);

struct FieldSplit {
  Field conserved;
  Field orthogonal;
  Eigen::VectorXd coefficients;  // on mu (and |v|^2 mu for specular walls)
};

/// Global projection onto the x-independent span{mu, |v|^2 mu} (specular) or
/// span{mu} (diffuse) in L^2_{x,v}(mu^{-1}).
FieldSplit project_PiG(const Field& f, BoundaryCondition bc);

}  // namespace kinetic
