#pragma once

#include "kinetic/boundary.hpp"
#include "kinetic/collision.hpp"
#include "kinetic/geometry.hpp"
#include "kinetic/phase_grid.hpp"
#include "kinetic/quadrature.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace kinetic {

using PhaseFunction = std::function<double(const Vec3& x, const Vec3& v)>;

/// d sigma_x(v) = c_mu mu(v) |v.n| dv on {v.n > 0}.
class WallMeasure {
 public:
  struct Node {
    Vec3 v;
    double w;
  };

  explicit WallMeasure(int n_normal = 24, int n_tangential = 12);

  /// c_mu from a radial Gauss-Legendre quadrature of the half-space flux.
  double c_mu() const { return c_mu_; }
  /// Total mass of the deterministic rule (1 up to quadrature error).
  double quadrature_mass() const;
  /// Gauss-Laguerre (normal, via s = sqrt(2E)) x Gauss-Hermite (tangential)
  /// nodes oriented along the unit normal n.
  std::vector<Node> quadrature(const Vec3& n) const;
  /// Tangential components standard normal, normal component Rayleigh.
  Vec3 sample(const Vec3& n, std::mt19937_64& gen) const;

 private:
  double c_mu_;
  Rule1D normal_;
  Rule1D tangential_;
};

/// Orthonormal (t1, t2) completing the unit vector n.
std::pair<Vec3, Vec3> tangent_frame(const Vec3& n);

/// Smallest collision frequency of the model over speeds in [0, 20].
double nu_floor(const CollisionModel& model);

/// e^{-nu(v) t} f0(X, V) with (X, V) the backward specular footprint.
double semigroup_specular(const Domain& domain, const CollisionModel& model,
                          const PhaseFunction& f0, double t, const Vec3& x, const Vec3& v,
                          const TraceOptions& opts = {});

/// Backward chain with diffuse re-emission from d sigma at every wall hit;
/// marked active after p_max rebounds.
ReboundChain sample_diffusive_chain(const Domain& domain, const WallMeasure& wall, double t,
                                    const Vec3& x, const Vec3& v, std::mt19937_64& gen,
                                    int p_max);

struct DiffusiveEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  double active_fraction = 0.0;
  /// sup |f0 / mu| times the active fraction: bound on the dropped tail.
  double truncation_bound = 0.0;
};

/// Monte-Carlo evaluation of S_{G_nu}(t) f0 (x, v) under diffuse walls.
/// f0 / mu must be bounded for the estimator to have finite variance.
DiffusiveEstimate semigroup_diffusive(const Domain& domain, const CollisionModel& model,
                                      const WallMeasure& wall, const PhaseFunction& f0, double t,
                                      const Vec3& x, const Vec3& v, int n_chains, int p_max,
                                      std::uint64_t seed, double f0_over_mu_sup = 0.0);

struct EscapeEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Fraction of diffusive chains still active after p rebounds within time t.
EscapeEstimate escape_probability(const Domain& domain, const WallMeasure& wall, double t,
                                  const Vec3& x, const Vec3& v, int p, int n_chains,
                                  std::uint64_t seed);

/// escape_probability for every p in `p_values` from one set of chains, so the
/// values are non-increasing in p by construction. Each entry equals the
/// single-p estimate with the same seed.
std::vector<EscapeEstimate> escape_profile(const Domain& domain, const WallMeasure& wall,
                                           double t, const Vec3& x, const Vec3& v,
                                           const std::vector<int>& p_values, int n_chains,
                                           std::uint64_t seed);

/// Free transport with absorption on the phase grid over one step dt.
///
/// Slab: cell averages are shifted exactly along x1; specular walls are
/// handled on the doubled periodic line (v1, -v1), diffuse walls collect the
/// outflow in a per-wall pool and re-emit it with the discrete flux profile
/// mu |v1|. Ball / ellipsoid: every (cell, node) parcel is flowed with
/// flow_specular and deposited with linear weights in x and a moment-exact
/// stencil in v. Weights landing on cells outside the domain are mirrored
/// across the wall with the reflected velocity (specular) or collected in the
/// pool of the nearest wall cell (diffuse). Mass is conserved exactly when
/// nu = 0, energy too for specular walls.
class TransportStep {
 public:
  TransportStep(std::shared_ptr<const SpatialGrid> space,
                std::shared_ptr<const VelocityGrid> velocity, BoundaryCondition bc, double dt,
                Eigen::VectorXd nu = {});

  double dt() const { return dt_; }
  BoundaryCondition bc() const { return bc_; }
  /// dt V_max exceeds the domain width: several wall crossings per step.
  bool cfl_warning() const { return cfl_warning_; }

  void apply(const Field& in, Field& out) const;
  Field apply(const Field& in) const;

 private:
  void apply_slab(const Field& in, Field& out) const;
  void apply_box(const Field& in, Field& out) const;
  void build_box();

  std::shared_ptr<const SpatialGrid> space_;
  std::shared_ptr<const VelocityGrid> velocity_;
  BoundaryCondition bc_;
  double dt_;
  Eigen::VectorXd nu_;
  bool cfl_warning_ = false;

  // A parcel is the content of one (cell, node) pair after one step: a list
  // of pieces (spatial targets x velocity targets) and wall-pool shares.
  struct Piece {
    std::uint32_t x_begin, x_end;  // into x_targets_
    std::uint32_t v_begin, v_end;  // into v_targets_
  };
  struct Parcel {
    std::uint32_t piece_begin, piece_end;  // into pieces_
    std::uint32_t pool_begin, pool_end;    // into pool_targets_
  };
  std::vector<Parcel> parcels_;  // cell-major: k * n_vel + a
  std::vector<Piece> pieces_;
  std::vector<std::pair<int, double>> x_targets_;
  std::vector<std::pair<int, double>> v_targets_;
  std::vector<std::pair<int, double>> pool_targets_;
  struct Pool {
    std::vector<std::pair<int, double>> x_targets;  // per emitting node, flattened
    std::vector<int> nodes;
    std::vector<double> probability;
    std::vector<std::uint32_t> offsets;  // into x_targets, size nodes + 1
  };
  std::vector<Pool> pools_;
};

/// One-off convenience wrapper around TransportStep.
Field step_transport(const Field& f, double dt, BoundaryCondition bc,
                     const Eigen::VectorXd& nu = {});

}  // namespace kinetic
