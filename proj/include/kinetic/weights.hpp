#pragma once

#include "kinetic/geometry.hpp"
#include "kinetic/phase_grid.hpp"

#include <Eigen/Core>

#include <string>

namespace kinetic {

enum class WeightKind { StretchExp, Polynomial, Guo };

/// m(v) = exp(kappa |v|^alpha), <v>^k, or <v>^beta mu^{-1/2}.
class Weight {
 public:
  static Weight stretch_exp(double kappa, double alpha);
  static Weight polynomial(double k);
  static Weight guo(double beta);

  WeightKind kind() const { return kind_; }
  double kappa() const { return kappa_; }
  double alpha() const { return alpha_; }
  double k() const { return k_; }
  double beta() const { return beta_; }

  double operator()(const Vec3& v) const { return at_speed(v.norm()); }
  double at_speed(double speed) const;
  /// m sampled at the velocity nodes.
  Eigen::VectorXd sample(const VelocityGrid& grid) const;

  /// Polynomial kind: k > k_q^* for q = 1 and q = infinity.
  bool admissible_q1(double gamma, double b_inf, double l_b) const;
  bool admissible_qinf(double gamma, double b_inf, double l_b) const;
  /// Polynomial kind: k > 5 + gamma.
  bool admissible_mixed(double gamma) const;

  std::string describe() const;

 private:
  Weight(WeightKind kind, double kappa, double alpha, double k, double beta)
      : kind_(kind), kappa_(kappa), alpha_(alpha), k_(k), beta_(beta) {}
  WeightKind kind_;
  double kappa_, alpha_, k_, beta_;
};

/// <v> = sqrt(1 + |v|^2).
inline double japanese(double speed) { return std::sqrt(1.0 + speed * speed); }

enum class NormTag { LinfXVm, L1vLinfXm, L2Mu, LinfBoundaryM };

struct NormReport {
  double value = 0.0;
  NormTag tag = NormTag::LinfXVm;
  /// Weighted mass carried by the outermost velocity shell, relative to the
  /// total; a proxy for the truncation error of the lattice.
  double truncation_mass = 0.0;
  bool overflow = false;
};

NormReport norm(const Field& f, const Weight& m, NormTag tag);

/// Velocity-only versions used by the splitting estimates.
double linf_weighted(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::VectorXd& m);
double l1_weighted(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                   const Eigen::VectorXd& m);

/// True iff m(v) / (<v>^beta mu^{-1/2}) stays bounded as |v| -> infinity.
bool embed_check(const Weight& m, const Weight& guo);
/// Same test for a raw exponential exp(kappa |v|^alpha), alpha in (0, 2].
bool embed_check_exponential(double kappa, double alpha, const Weight& guo);

}  // namespace kinetic
