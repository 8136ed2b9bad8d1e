#pragma once

#include "kinetic/boundary.hpp"
#include "kinetic/collision.hpp"
#include "kinetic/dvm.hpp"
#include "kinetic/phase_grid.hpp"
#include "kinetic/splitting.hpp"
#include "kinetic/transport.hpp"
#include "kinetic/weights.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace kinetic {

struct SolverConfig {
  double delta = 0.05;
  double dt = 0.01;
  double T = 2.0;
  double tol_fixed_point = 1e-8;
  int max_inner_iters = 60;
  int max_outer_iters = 10;
  BoundaryCondition bc = BoundaryCondition::Specular;
  Weight weight = Weight::polynomial(10.0);
  // smallness thresholds in the weighted sup norm
  double eta0 = 1e-2;
  double eta1 = 3e-2;
  double eta2 = 3e-2;
  double burn_in = 0.5;
  double tol_moment = 1e-10;
  double tol_pos = 1e-8;
  bool strang = false;
  // test hooks
  bool disable_B2 = false;
  bool disable_Q = false;

  int n_steps() const;
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> fields;

  std::size_t size() const { return fields.size(); }
  const Field& back() const { return fields.back(); }
};

/// sup_{x,v} |f| m(v) with m pre-sampled on the velocity grid.
double sup_weighted(const Field& f, const Eigen::VectorXd& m);
/// max over time of sup_weighted.
double sup_weighted(const Trajectory& traj, const Eigen::VectorXd& m);
/// max over time of sup_weighted(a(t) - b(t)); trajectories must align.
double sup_weighted_distance(const Trajectory& a, const Trajectory& b, const Eigen::VectorXd& m);

/// Grids, collision table, splitting and transport shared by every solver.
///
/// One step of every scheme has the form f -> T(s + dt R(s)) with s = f, or
/// with s = T_{dt/2} f and a final T_{dt/2} for Strang splitting. T is free
/// transport with the wall law and nu = 0, so the -nu f part of L sits in R
/// and the scheme conserves mass (and energy for specular walls) exactly.
class KineticSystem {
 public:
  KineticSystem(std::shared_ptr<const SpatialGrid> space,
                std::shared_ptr<const VelocityGrid> velocity, const CollisionParams& collision,
                const SolverConfig& cfg);

  const SolverConfig& config() const { return cfg_; }
  const SpatialGrid& space() const { return *space_; }
  const VelocityGrid& velocity() const { return *velocity_; }
  const std::shared_ptr<const SpatialGrid>& space_ptr() const { return space_; }
  const std::shared_ptr<const VelocityGrid>& velocity_ptr() const { return velocity_; }
  const CollisionModel& model() const { return *model_; }
  const CollisionTable& table() const { return *table_; }
  const SplitOperator& split() const { return *split_; }
  const Eigen::MatrixXd& L() const { return L_; }
  const Eigen::VectorXd& nu() const { return table_->nu(); }
  const Eigen::VectorXd& weight_samples() const { return m_; }
  const TransportStep& transport() const { return *transport_; }

  Field zeros() const { return Field(space_, velocity_); }
  Trajectory zero_trajectory() const;

  /// out += c f M^T (a velocity operator applied in every cell).
  void add_matrix(const Eigen::MatrixXd& M, const Field& f, double c, Field& out) const;
  /// out += c Q(f, g) in every cell.
  void add_Q(const Field& f, const Field& g, double c, Field& out) const;
  /// out -= c nu f.
  void add_absorption(const Field& f, double c, Field& out) const;

  /// Stage state: f itself, or T_{dt/2} f under Strang splitting.
  Field stage(const Field& f) const;
  /// Completes a step from the updated stage state.
  Field finish(const Field& updated) const;

 private:
  SolverConfig cfg_;
  std::shared_ptr<const SpatialGrid> space_;
  std::shared_ptr<const VelocityGrid> velocity_;
  std::unique_ptr<CollisionModel> model_;
  std::unique_ptr<CollisionTable> table_;
  std::unique_ptr<SplitOperator> split_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd m_;
  std::unique_ptr<TransportStep> transport_;
};

struct F1Result {
  Trajectory trajectory;
  int iterations = 0;
  /// Ratio of successive iterate distances at exit.
  double contraction = 0.0;
  std::vector<double> distances;
};

/// Duhamel iteration for df1/dt = B f1 + Q(f1, f1 + 2 g) with f1(0) = f0:
/// h_{l+1} = S(t) f0 + int_0^t S(t - s)[B2 h_l + Q(h_l, h_l + 2 g)] ds, each
/// iterate realized by time stepping. `g` may be null (g = 0); `start` is the
/// iterate h_0 (zero when null).
F1Result solve_f1(const KineticSystem& sys, const Field& f0, const Trajectory* g,
                  const Trajectory* start = nullptr, double tol = -1.0);

struct F2Result {
  Trajectory trajectory;
  /// Largest Pi_G(f2 + g) coefficient before and after the drift correction.
  double max_drift = 0.0;
  double max_moment = 0.0;
};

/// df2/dt = G f2 + Q(f2, f2) + A g with f2(0) = 0; the Pi_G(f2 + g) drift is
/// subtracted from f2 after every step.
F2Result solve_f2(const KineticSystem& sys, const Trajectory& g);

struct CoupledOptions {
  /// Outer order: f2 from the free semigroup of f0 first, then f1.
  bool f2_first = false;
  /// Start each inner iteration from the previous outer iterate.
  bool warm_start = true;
};

struct CoupledResult {
  Trajectory f1;
  Trajectory f2;
  Trajectory f;
  int outer_iterations = 0;
  std::vector<double> outer_distances;
  std::vector<int> inner_iterations;
  std::vector<double> inner_contraction;
  double max_moment = 0.0;
};

/// Outer iteration f1^{(l+1)} = f1[f0, f2^{(l)}], f2^{(l+1)} = f2[f1^{(l+1)}]
/// until successive f = f1 + f2 agree to tol_fixed_point (relative).
CoupledResult solve_coupled(const KineticSystem& sys, const Field& f0,
                            const CoupledOptions& opts = {});

enum class FullForm { Full, Perturbation };

struct FullResult {
  Trajectory trajectory;
  double min_value = 0.0;
  bool negativity_flag = false;
};

/// Direct scheme: F -> T(s + dt Q(s, s)) (full form) or
/// f -> T(s + dt (L s + Q(s, s))) (perturbation form).
FullResult solve_full(const KineticSystem& sys, const Field& init, FullForm form);

/// Largest relative residual of the perturbation-form step along a trajectory:
/// max_n |f^{n+1} - step(f^n)|_m / (dt max_n |f^n|_m).
double step_residual(const KineticSystem& sys, const Trajectory& f);

struct DecayFit {
  double C_hat = 0.0;
  double lambda_hat = 0.0;
  double residual = 0.0;
  int n_points = 0;
  bool truncated = false;  // fitted on the positive prefix only
};

/// Least-squares line through (t, log value) for t >= burn_in.
DecayFit decay_fit(const std::vector<std::pair<double, double>>& series, double burn_in = 0.0);

/// Weighted sup-norm series of a trajectory.
std::vector<std::pair<double, double>> norm_series(const Trajectory& traj, const Eigen::VectorXd& m);

struct UniquenessReport {
  double restart_distance = 0.0;    // two outer orders, no perturbation
  double perturbed_distance = 0.0;  // perturbed f0 vs unperturbed
  double injected = 0.0;            // perturbation size relative to |f0|
  double distance = 0.0;            // max of the two, relative to |f0|
  double bound = 0.0;
  bool pass = false;
};

/// Divergence between coupled solutions from f0 under a different iteration
/// order and from f0 plus noise of relative size scale * tol_fixed_point.
/// Throws SolverError when |f0| exceeds eta0. `base` reuses an existing
/// default-order solution from f0.
UniquenessReport uniqueness_probe(const KineticSystem& sys, const Field& f0, double scale,
                                  std::uint64_t seed, const CoupledResult* base = nullptr);

}  // namespace kinetic
