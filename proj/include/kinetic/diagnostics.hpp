#pragma once

#include "kinetic/boundary.hpp"
#include "kinetic/phase_grid.hpp"
#include "kinetic/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kinetic {

struct ConservationRecord {
  double mass_drift = 0.0;  // max_t |M(t) - M(0)| / scale
  double energy_drift = 0.0;
  double angular_drift = 0.0;
  double horizon = 0.0;
  bool energy_checked = false;   // specular walls only
  bool angular_checked = false;  // axisymmetric quadric with specular walls
  Vec3 axis = Vec3::Zero();

  double mass_rate() const { return horizon > 0.0 ? mass_drift / horizon : mass_drift; }
  double energy_rate() const { return horizon > 0.0 ? energy_drift / horizon : energy_drift; }
};

/// Symmetry axis of a ball or of an ellipsoid of revolution.
std::optional<Vec3> symmetry_axis(const Domain& domain);

/// Angular momentum about the symmetry axis through the domain centre.
double angular_momentum(const Field& f, const Vec3& axis);

/// Relative drifts of mass, energy and angular momentum along a trajectory.
/// Each drift is scaled by the initial moment, or by the matching moment of
/// |f(0)| when the initial moment vanishes.
ConservationRecord check_conservation(const Trajectory& traj, BoundaryCondition bc);

struct ProbeLine {
  Vec3 x0;
  Vec3 x1;
  Vec3 v;
};

struct ContinuityReport {
  double max_jump = 0.0;
  int n_probes = 0;
  int n_skipped = 0;
  std::vector<std::string> notices;
};

/// Largest second difference of f along each probe line (sampled at the cell
/// spacing) over the variation of f on that line. Lines passing within
/// `collar` of the grazing set are skipped.
ContinuityReport continuity_probe(const Field& f, const std::vector<ProbeLine>& lines,
                                  double collar = 0.05);

struct LowerBoundReport {
  double rho_hat = 0.0;
  double theta_hat = 0.0;
  bool pass = false;
  double mass = 0.0;
  double local_energy_sup = 0.0;
  double min_value = 0.0;
  std::string failure;
};

/// Maxwellian lower bound rho (2 pi theta)^{-3/2} e^{-|v|^2 / (2 theta)} <= F at
/// every node with |v| <= v_cap and every snapshot t >= tau. For each theta rho
/// is the largest admissible value; theta maximizes the node mass of the bound
/// (golden-section search in log theta). v_cap <= 0 means V_max - 1.
LowerBoundReport check_lower_bound(const Trajectory& F, double tau, double tol_pos = 1e-8,
                                   double v_cap = 0.0);

}  // namespace kinetic
