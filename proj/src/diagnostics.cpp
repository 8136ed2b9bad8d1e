#include "kinetic/diagnostics.hpp"

#include "kinetic/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace kinetic {

std::optional<Vec3> symmetry_axis(const Domain& domain) {
  if (domain.kind() == DomainKind::Slab) return std::nullopt;
  const Vec3& a = domain.semi_axes();
  const auto eq = [](double p, double q) { return std::abs(p - q) <= 1e-12 * std::max(p, q); };
  if (eq(a[0], a[1])) return Vec3::UnitZ();
  if (eq(a[0], a[2])) return Vec3::UnitY();
  if (eq(a[1], a[2])) return Vec3::UnitX();
  return std::nullopt;
}

double angular_momentum(const Field& f, const Vec3& axis) {
  const SpatialGrid& sg = f.space();
  const VelocityGrid& vg = f.velocity();
  const Vec3 c = sg.domain().center();
  double acc = 0.0;
  for (int k = 0; k < sg.size(); ++k) {
    const Vec3 r = sg.center(k) - c;
    for (int a = 0; a < vg.size(); ++a) acc += f(k, a) * r.cross(vg.node(a)).dot(axis);
  }
  return acc * sg.cell_volume() * vg.weight();
}

namespace {

double abs_angular(const Field& f, const Vec3& axis) {
  const SpatialGrid& sg = f.space();
  const VelocityGrid& vg = f.velocity();
  const Vec3 c = sg.domain().center();
  double acc = 0.0;
  for (int k = 0; k < sg.size(); ++k) {
    const Vec3 r = sg.center(k) - c;
    for (int a = 0; a < vg.size(); ++a) acc += std::abs(f(k, a) * r.cross(vg.node(a)).dot(axis));
  }
  return acc * sg.cell_volume() * vg.weight();
}

double scale_or(double value, double fallback) {
  if (std::abs(value) > 0.0) return std::abs(value);
  return fallback > 0.0 ? fallback : 1.0;
}

}  // namespace

ConservationRecord check_conservation(const Trajectory& traj, BoundaryCondition bc) {
  ConservationRecord rec;
  if (traj.size() == 0) return rec;
  const Field& f0 = traj.fields.front();
  rec.horizon = traj.times.back() - traj.times.front();
  Field abs0 = f0;
  abs0.values() = f0.values().cwiseAbs();
  const double m0 = f0.mass(), e0 = f0.energy();
  const double ms = scale_or(m0, abs0.mass()), es = scale_or(e0, abs0.energy());
  rec.energy_checked = bc == BoundaryCondition::Specular;
  const auto axis = symmetry_axis(f0.space().domain());
  rec.angular_checked = rec.energy_checked && axis.has_value();
  double l0 = 0.0, ls = 1.0;
  if (rec.angular_checked) {
    rec.axis = *axis;
    l0 = angular_momentum(f0, rec.axis);
    // l0 is often roundoff-sized by symmetry
    ls = scale_or(std::max(std::abs(l0), abs_angular(f0, rec.axis)), 1.0);
  }
  for (const Field& f : traj.fields) {
    rec.mass_drift = std::max(rec.mass_drift, std::abs(f.mass() - m0) / ms);
    rec.energy_drift = std::max(rec.energy_drift, std::abs(f.energy() - e0) / es);
    if (rec.angular_checked)
      rec.angular_drift =
          std::max(rec.angular_drift, std::abs(angular_momentum(f, rec.axis) - l0) / ls);
  }
  return rec;
}

namespace {

bool near_grazing(const Domain& dom, const Vec3& x, const Vec3& v, double collar) {
  const LevelSet ls = dom.xi(x);
  const double g = ls.gradient.norm();
  if (g == 0.0) return false;
  const double dist = std::abs(ls.value) / g;
  if (dist > collar) return false;
  const double vn = std::abs(v.dot(ls.gradient)) / (g * std::max(v.norm(), 1e-300));
  return vn < collar;
}

}  // namespace

ContinuityReport continuity_probe(const Field& f, const std::vector<ProbeLine>& lines,
                                  double collar) {
  ContinuityReport rep;
  const SpatialGrid& sg = f.space();
  const Domain& dom = sg.domain();
  const double h = dom.kind() == DomainKind::Slab ? sg.spacing()[0] : sg.spacing().minCoeff();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const ProbeLine& p = lines[i];
    const double len = (p.x1 - p.x0).norm();
    const int n = std::max(2, static_cast<int>(std::ceil(len / h)));
    std::vector<Vec3> pts;
    bool skip = false;
    for (int j = 0; j <= n; ++j) {
      const Vec3 x = p.x0 + (p.x1 - p.x0) * (static_cast<double>(j) / n);
      if (near_grazing(dom, x, p.v, collar)) skip = true;
      pts.push_back(x);
    }
    if (skip) {
      ++rep.n_skipped;
      std::ostringstream os;
      os << "probe " << i << " crosses the grazing collar; skipped";
      rep.notices.push_back(os.str());
      continue;
    }
    ++rep.n_probes;
    std::vector<double> y;
    for (const Vec3& x : pts) y.push_back(f.interpolate(x, p.v));
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    const double var = std::max(*hi - *lo, std::max(std::abs(*hi), std::abs(*lo)));
    if (var <= 0.0) continue;
    for (std::size_t j = 1; j + 1 < y.size(); ++j)
      rep.max_jump = std::max(rep.max_jump, std::abs(y[j + 1] - 2.0 * y[j] + y[j - 1]) / var);
  }
  return rep;
}

LowerBoundReport check_lower_bound(const Trajectory& F, double tau, double tol_pos,
                                   double v_cap) {
  LowerBoundReport rep;
  if (F.size() == 0) throw Error("empty trajectory");
  const VelocityGrid& vg = F.fields.front().velocity();
  const SpatialGrid& sg = F.fields.front().space();
  if (v_cap <= 0.0) v_cap = vg.v_max() - 1.0;
  const int nv = vg.size();

  Eigen::VectorXd node_min = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());
  rep.min_value = std::numeric_limits<double>::infinity();
  rep.mass = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t n = 0; n < F.size(); ++n) {
    if (F.times[n] < tau - 1e-12) continue;
    any = true;
    const Field& f = F.fields[n];
    const double mn = f.values().minCoeff();
    if (mn < rep.min_value) rep.min_value = mn;
    if (mn < -tol_pos && rep.failure.empty()) {
      Eigen::Index k = 0, a = 0;
      f.values().minCoeff(&k, &a);
      std::ostringstream os;
      os << "negative value " << mn << " at t=" << F.times[n] << " cell " << k << " node " << a;
      rep.failure = os.str();
    }
    node_min = node_min.cwiseMin(f.values().colwise().minCoeff().transpose());
    rep.mass = std::min(rep.mass, f.mass());
    // local energy: sup over cells of int |v|^2 F dv
    for (int k = 0; k < sg.size(); ++k) {
      double e = 0.0;
      for (int a = 0; a < nv; ++a) e += vg.node(a).squaredNorm() * f(k, a);
      rep.local_energy_sup = std::max(rep.local_energy_sup, e * vg.weight());
    }
  }
  if (!any) throw Error("no snapshot at or after tau");
  if (!rep.failure.empty()) return rep;
  if (!(rep.mass > 0.0)) {
    rep.failure = "non-positive mass";
    return rep;
  }
  if (!std::isfinite(rep.local_energy_sup)) {
    rep.failure = "unbounded local energy";
    return rep;
  }

  std::vector<int> nodes;
  for (int a = 0; a < nv; ++a)
    if (vg.node(a).norm() <= v_cap) nodes.push_back(a);
  if (nodes.empty()) throw Error("no velocity node below the cap");
  auto rho_of = [&](double log_theta) {
    const double th = std::exp(log_theta);
    const double norm = std::pow(2.0 * std::numbers::pi * th, -1.5);
    double r = std::numeric_limits<double>::infinity();
    for (int a : nodes) {
      const double M = norm * std::exp(-vg.node(a).squaredNorm() / (2.0 * th));
      r = std::min(r, node_min[a] / M);
    }
    return r;
  };
  // rho alone is unbounded as theta -> 0 when no node sits at v = 0, so the
  // fit maximizes the mass of the bound on the fitted nodes
  auto mass_of = [&](double log_theta) {
    const double th = std::exp(log_theta);
    const double norm = std::pow(2.0 * std::numbers::pi * th, -1.5);
    double m = 0.0;
    for (int a : nodes) m += norm * std::exp(-vg.node(a).squaredNorm() / (2.0 * th));
    return rho_of(log_theta) * m;
  };
  // coarse scan, then golden-section refinement around the best bracket
  const double lo = std::log(0.05), hi = std::log(20.0);
  const int scan = 80;
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan; ++i) {
    const double r = mass_of(lo + (hi - lo) * i / scan);
    if (r > best_val) {
      best_val = r;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best - 1) / scan;
  double b = lo + (hi - lo) * std::min(scan, best + 1) / scan;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = mass_of(c), fd = mass_of(d);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = mass_of(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = mass_of(d);
    }
  }
  const double lt = 0.5 * (a + b);
  rep.theta_hat = std::exp(lt);
  rep.rho_hat = std::max(0.0, rho_of(lt));
  rep.pass = rep.rho_hat > 0.0 && rep.theta_hat > 0.0;
  if (!rep.pass) rep.failure = "no positive Maxwellian lies below F";
  return rep;
}

}  // namespace kinetic
