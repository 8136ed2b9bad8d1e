#pragma once

#include <Eigen/Core>

#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace kinetic {

using Vec3 = Eigen::Vector3d;

/// Absolute tolerance on the level-set value for "on the boundary".
inline constexpr double kTolBoundary = 1e-10;
/// Absolute tolerance on v.n below which a boundary phase point is grazing.
inline constexpr double kTolGraze = 1e-9;

enum class DomainKind { Ball, Ellipsoid, Slab };

struct LevelSet {
  double value;
  Vec3 gradient;
};

/// Bounded convex body Omega = {xi < 0}.
///
/// Ball and ellipsoid are quadrics xi(x) = sum_i (x_i - c_i)^2 / a_i^2 - 1.
/// The slab is {0 < x_1 < 1}, periodic in x_2 and x_3, with
/// xi(x) = x_1 (x_1 - 1).
class Domain {
 public:
  static Domain ball(const Vec3& center, double radius);
  static Domain ellipsoid(const Vec3& center, const Vec3& semi_axes);
  static Domain slab();

  DomainKind kind() const { return kind_; }
  const Vec3& center() const { return center_; }
  const Vec3& semi_axes() const { return axes_; }

  LevelSet xi(const Vec3& x) const;
  double convexity_constant() const { return c_xi_; }

  /// Smallest eigenvalue of the Hessian of xi over c_xi, minimized over the
  /// sampled directions. Values >= 1 mean the convexity bound holds.
  double convexity_margin(int n_directions, unsigned seed) const;

  bool contains(const Vec3& x) const { return xi(x).value < 0.0; }
  bool in_closure(const Vec3& x) const { return xi(x).value <= kTolBoundary; }

  /// Lebesgue measure of Omega (per unit tangential area for the slab).
  double volume() const;
  /// Axis-aligned bounding box of Omega; the slab reports [0,1] x [0,1]^2.
  std::pair<Vec3, Vec3> bounding_box() const;
  /// One Newton step of xi toward the zero level set.
  Vec3 project_to_boundary(const Vec3& x) const;
  /// Radial projection of an interior point onto the boundary (quadrics), or
  /// the nearest wall for the slab.
  Vec3 nearest_boundary_point(const Vec3& x) const;

 private:
  Domain(DomainKind kind, Vec3 center, Vec3 axes, double c_xi)
      : kind_(kind), center_(std::move(center)), axes_(std::move(axes)), c_xi_(c_xi) {}

  DomainKind kind_;
  Vec3 center_;
  Vec3 axes_;
  double c_xi_;
};

enum class BoundaryClass { Incoming, Outgoing, Grazing };

struct BoundaryPhasePoint {
  Vec3 x;
  Vec3 v;
  double dot;  // v . n(x)
  BoundaryClass cls;
};

struct Interior {};

using PhaseClassification = std::variant<Interior, BoundaryPhasePoint>;

/// Unit outward normal; throws GeometryError("not on boundary") when
/// |xi(x)| > tol_boundary.
Vec3 outward_normal(const Domain& domain, const Vec3& x);

/// Specular wall law v - 2 (v.n) n.
Vec3 specular_reflect(const Vec3& n, const Vec3& v);

struct ExitResult {
  double t_b;
  Vec3 x_b;
  bool degenerate = false;  // grazing with no interior segment
};

/// Backward exit time t_b(x,v) = inf{t > 0 : x - t v not in Omega}.
/// For the slab with v_1 = 0 the time is +infinity.
ExitResult backward_exit_time(const Domain& domain, const Vec3& x, const Vec3& v);

/// Same quantity obtained by bisection on xi(x - t v); test oracle and
/// fallback for near-degenerate quadratics.
double backward_exit_time_bisection(const Domain& domain, const Vec3& x, const Vec3& v,
                                    double t_max = 1e6);

PhaseClassification classify_phase_point(const Domain& domain, const Vec3& x, const Vec3& v);

struct PhasePoint {
  double t;
  Vec3 x;
  Vec3 v;
};

struct ReachedInitialPlane {
  Vec3 x;
  Vec3 v;
};

struct ActiveChain {
  double t;  // remaining backward time t_p > 0
  Vec3 x;
  Vec3 v;
};

enum class ChainKind { Specular, Diffusive };

/// Backward characteristic with its wall rebounds. hits[i] stores the rebound
/// time t_{i+1}, the footprint x_{i+1} and the velocity leaving the wall
/// backward in time (reflected or redrawn).
struct ReboundChain {
  PhasePoint origin;
  std::vector<PhasePoint> hits;
  std::variant<ReachedInitialPlane, ActiveChain> terminal;
  ChainKind kind = ChainKind::Specular;

  bool reached_initial_plane() const {
    return std::holds_alternative<ReachedInitialPlane>(terminal);
  }
  std::size_t rebounds() const { return hits.size(); }
};

struct TraceOptions {
  int max_rebounds = 10000;
};

/// Backward specular billiard from (t, x, v) down to time 0.
/// Throws GeometryError("rebound budget exhausted") past max_rebounds.
ReboundChain trace_specular(const Domain& domain, double t, const Vec3& x, const Vec3& v,
                            const TraceOptions& opts = {});

/// Forward specular flight over time dt: returns the phase point reached.
std::pair<Vec3, Vec3> flow_specular(const Domain& domain, double dt, const Vec3& x,
                                    const Vec3& v, const TraceOptions& opts = {});

}  // namespace kinetic
