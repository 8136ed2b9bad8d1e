#include "kinetic/geometry.hpp"

#include "kinetic/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace kinetic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Roots of a t^2 + b t + c = 0 without cancellation; returns the larger one.
double larger_root(double a, double b, double c, bool& real) {
  const double disc = b * b - 4.0 * a * c;
  real = disc >= 0.0;
  const double sq = std::sqrt(std::max(disc, 0.0));
  const double q = -0.5 * (b + std::copysign(sq, b));
  if (q == 0.0) return 0.0;
  return std::max(q / a, c / q);
}

}  // namespace

Domain Domain::ball(const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw GeometryError("ball radius must be positive");
  return Domain(DomainKind::Ball, center, Vec3::Constant(radius), 2.0 / (radius * radius));
}

Domain Domain::ellipsoid(const Vec3& center, const Vec3& semi_axes) {
  if (!(semi_axes.minCoeff() > 0.0)) throw GeometryError("semi-axes must be positive");
  const double amax = semi_axes.maxCoeff();
  return Domain(DomainKind::Ellipsoid, center, semi_axes, 2.0 / (amax * amax));
}

Domain Domain::slab() { return Domain(DomainKind::Slab, Vec3::Zero(), Vec3::Ones(), 0.0); }

LevelSet Domain::xi(const Vec3& x) const {
  if (kind_ == DomainKind::Slab) {
    return {x[0] * (x[0] - 1.0), Vec3(2.0 * x[0] - 1.0, 0.0, 0.0)};
  }
  const Vec3 y = (x - center_).cwiseQuotient(axes_);
  return {y.squaredNorm() - 1.0, 2.0 * y.cwiseQuotient(axes_)};
}

double Domain::convexity_margin(int n_directions, unsigned seed) const {
  if (c_xi_ == 0.0) return kInf;
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  const Vec3 hess = (2.0 * axes_.cwiseProduct(axes_).cwiseInverse());
  double margin = kInf;
  for (int i = 0; i < n_directions; ++i) {
    const Vec3 d(normal(gen), normal(gen), normal(gen));
    const double q = (hess.array() * d.array().square()).sum();
    margin = std::min(margin, q / (c_xi_ * d.squaredNorm()));
  }
  return margin;
}

double Domain::volume() const {
  if (kind_ == DomainKind::Slab) return 1.0;
  return 4.0 / 3.0 * std::numbers::pi * axes_.prod();
}

std::pair<Vec3, Vec3> Domain::bounding_box() const {
  if (kind_ == DomainKind::Slab) return {Vec3::Zero(), Vec3::Ones()};
  return {center_ - axes_, center_ + axes_};
}

Vec3 Domain::project_to_boundary(const Vec3& x) const {
  if (kind_ == DomainKind::Slab) {
    Vec3 y = x;
    y[0] = (x[0] < 0.5) ? 0.0 : 1.0;
    return y;
  }
  const LevelSet ls = xi(x);
  const double g2 = ls.gradient.squaredNorm();
  if (g2 == 0.0) return x;
  return x - (ls.value / g2) * ls.gradient;
}

Vec3 Domain::nearest_boundary_point(const Vec3& x) const {
  if (kind_ == DomainKind::Slab) return project_to_boundary(x);
  const Vec3 y = x - center_;
  double s = y.cwiseQuotient(axes_).norm();
  if (s == 0.0) return center_ + Vec3(axes_[0], 0.0, 0.0);
  return project_to_boundary(center_ + y / s);
}

Vec3 outward_normal(const Domain& domain, const Vec3& x) {
  const LevelSet ls = domain.xi(x);
  if (std::abs(ls.value) > kTolBoundary) throw GeometryError("not on boundary");
  return ls.gradient.normalized();
}

Vec3 specular_reflect(const Vec3& n, const Vec3& v) { return v - 2.0 * v.dot(n) * n; }

ExitResult backward_exit_time(const Domain& domain, const Vec3& x, const Vec3& v) {
  if (v.squaredNorm() == 0.0) throw GeometryError("stationary velocity has no exit time");
  double t_b = 0.0;
  if (domain.kind() == DomainKind::Slab) {
    if (v[0] > 0.0) {
      t_b = std::max(x[0], 0.0) / v[0];
    } else if (v[0] < 0.0) {
      t_b = std::max(1.0 - x[0], 0.0) / -v[0];
    } else {
      return {kInf, x, false};
    }
    Vec3 xb = x - t_b * v;
    xb[0] = v[0] > 0.0 ? 0.0 : 1.0;
    return {t_b, xb, t_b == 0.0};
  }

  const Vec3& a = domain.semi_axes();
  const Vec3 y = (x - domain.center()).cwiseQuotient(a);
  const Vec3 w = v.cwiseQuotient(a);
  const double qa = w.squaredNorm();
  const double qb = -2.0 * y.dot(w);
  const double qc = y.squaredNorm() - 1.0;
  bool real = true;
  t_b = larger_root(qa, qb, qc, real);
  if (!real) {
    // Tangent line grazing a point marginally outside: fall back to bisection.
    t_b = backward_exit_time_bisection(domain, x, v);
  }
  t_b = std::max(t_b, 0.0);
  const Vec3 xb = domain.project_to_boundary(x - t_b * v);
  return {t_b, xb, t_b <= 0.0};
}

double backward_exit_time_bisection(const Domain& domain, const Vec3& x, const Vec3& v,
                                    double t_max) {
  auto phi = [&](double t) { return domain.xi(x - t * v).value; };
  double hi = 1e-3;
  while (phi(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > t_max) return kInf;
  }
  // phi is convex along the line: locate its minimum on [0, hi] first.
  double lo = 0.0, up = hi;
  for (int i = 0; i < 200; ++i) {
    const double m1 = lo + (up - lo) / 3.0;
    const double m2 = up - (up - lo) / 3.0;
    if (phi(m1) < phi(m2)) up = m2; else lo = m1;
  }
  double left = 0.5 * (lo + up);
  if (phi(left) >= 0.0) return 0.0;
  double right = hi;
  for (int i = 0; i < 200 && right - left > 0.0; ++i) {
    const double mid = 0.5 * (left + right);
    if (mid == left || mid == right) break;
    if (phi(mid) < 0.0) left = mid; else right = mid;
  }
  return 0.5 * (left + right);
}

PhaseClassification classify_phase_point(const Domain& domain, const Vec3& x, const Vec3& v) {
  const LevelSet ls = domain.xi(x);
  if (ls.value > kTolBoundary) throw GeometryError("outside domain");
  if (ls.value < -kTolBoundary) return Interior{};
  const Vec3 n = ls.gradient.normalized();
  const double dot = v.dot(n);
  BoundaryClass cls = BoundaryClass::Grazing;
  if (dot > kTolGraze) cls = BoundaryClass::Outgoing;
  else if (dot < -kTolGraze) cls = BoundaryClass::Incoming;
  return BoundaryPhasePoint{x, v, dot, cls};
}

ReboundChain trace_specular(const Domain& domain, double t, const Vec3& x, const Vec3& v,
                            const TraceOptions& opts) {
  ReboundChain chain;
  chain.origin = {t, x, v};
  chain.kind = ChainKind::Specular;
  if (v.squaredNorm() == 0.0 || t <= 0.0) {
    chain.terminal = ReachedInitialPlane{x, v};
    return chain;
  }
  const auto cls = classify_phase_point(domain, x, v);
  if (const auto* bp = std::get_if<BoundaryPhasePoint>(&cls);
      bp != nullptr && bp->cls == BoundaryClass::Grazing) {
    throw GeometryError("grazing phase point");
  }

  double remaining = t;
  Vec3 cx = x, cv = v;
  while (true) {
    const ExitResult ex = backward_exit_time(domain, cx, cv);
    if (!(ex.t_b < remaining)) {
      chain.terminal = ReachedInitialPlane{cx - remaining * cv, cv};
      return chain;
    }
    if (static_cast<int>(chain.hits.size()) >= opts.max_rebounds) {
      throw GeometryError("rebound budget exhausted");
    }
    remaining -= ex.t_b;
    const Vec3 xi_hit = domain.project_to_boundary(ex.x_b);
    const Vec3 n = domain.xi(xi_hit).gradient.normalized();
    cv = specular_reflect(n, cv);
    cx = xi_hit;
    chain.hits.push_back({remaining, cx, cv});
  }
}

std::pair<Vec3, Vec3> flow_specular(const Domain& domain, double dt, const Vec3& x,
                                    const Vec3& v, const TraceOptions& opts) {
  const ReboundChain back = trace_specular(domain, dt, x, -v, opts);
  const auto& end = std::get<ReachedInitialPlane>(back.terminal);
  return {end.x, -end.v};
}

}  // namespace kinetic
