#pragma once

#include "kinetic/dvm.hpp"
#include "kinetic/geometry.hpp"
#include "kinetic/weights.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>

namespace kinetic {

/// C-infinity step: 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s);

/// Theta_delta as a product of three ramps: in |v|, in |v - v_*| and in
/// |cos theta|. Equal to 1 on the inner set and 0 off the support set.
double theta_cutoff(double delta, const Vec3& v, const Vec3& v_star, const Vec3& sigma);
double theta_speed(double delta, double speed);
double theta_relative(double delta, double rel);
double theta_angle(double delta, double cos_theta);
/// Mean of theta_angle over the cos-band of width 2/N around cos_theta
/// (shifted inside [-1, 1]); the angular cell of a lattice direction.
double theta_angle_band(double delta, double cos_theta, int shell_count);

/// A^{(delta)} and B_2^{(delta)} assembled as dense matrices on the grid, so
/// that A + B_2 - diag(nu) = L exactly.
class SplitOperator {
 public:
  SplitOperator(const CollisionTable& table, double delta);

  double delta() const { return delta_; }
  double R_delta() const { return 2.0 / delta_; }
  const CollisionTable& table() const { return table_; }
  const VelocityGrid& grid() const { return table_.grid(); }
  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B2() const { return B2_; }
  const Eigen::VectorXd& nu() const { return table_.nu(); }

  Eigen::VectorXd apply_A(const Eigen::Ref<const Eigen::VectorXd>& h) const { return A_ * h; }
  Eigen::VectorXd apply_B2(const Eigen::Ref<const Eigen::VectorXd>& h) const { return B2_ * h; }

  /// Largest |v| among rows of A with a nonzero entry.
  double measured_support_radius() const;
  /// ||A||_{L^inf -> L^inf} on the grid (the constant C_A for q = infinity).
  double C_A() const;

 private:
  const CollisionTable& table_;
  double delta_;
  Eigen::MatrixXd A_;
  Eigen::MatrixXd B2_;
};

/// k_q^* = (16 pi b_inf / l_b - 2)^{1/q} (1 + gamma + 16 pi b_inf / l_b)^{1 - 1/q};
/// q = infinity is passed as std::numeric_limits<double>::infinity().
double kq_star(double q, double gamma, double b_inf, double l_b);
/// phi_q(k) = (16 pi b_inf / l_b) (k + 2)^{-1/q} (k - 1 - gamma)^{-(1 - 1/q)}.
double phi_q(double q, double k, double gamma, double b_inf, double l_b);

struct ProbeFamily {
  bool tails = true;       // m^{-1} and sign-alternating m^{-1}
  bool bumps = true;       // node indicators
  bool row_signs = true;   // sign(B_2[a, .]) m^{-1} for every row a
  int n_random = 32;
  std::uint64_t seed = 1;
};

struct DeltaEstimate {
  double value = 0.0;
  int n_probes = 0;
  std::string argmax_kind;
};

/// max over probes of ||B_2 h||_{L^q(nu^{-1} m)} / ||h||_{L^q(m)}.
DeltaEstimate estimate_Delta(const SplitOperator& split, const Weight& m, double q,
                             const ProbeFamily& probes = {});
/// max over probes of ||B_2 h||_{L^1(<v>^2)} / ||h||_{L^inf(<v>^k)}.
DeltaEstimate estimate_Delta_tilde(const SplitOperator& split, double k,
                                   const ProbeFamily& probes = {});

}  // namespace kinetic
