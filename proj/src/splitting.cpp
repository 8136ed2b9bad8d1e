#include "kinetic/splitting.hpp"

#include "kinetic/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace kinetic {

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

double theta_speed(double delta, double speed) { return 1.0 - smooth_step(delta * speed - 1.0); }

double theta_relative(double delta, double rel) {
  return smooth_step(rel / delta - 1.0) * (1.0 - smooth_step(delta * rel - 1.0));
}

double theta_angle(double delta, double cos_theta) {
  return 1.0 - smooth_step((std::abs(cos_theta) - (1.0 - 2.0 * delta)) / delta);
}

double theta_angle_band(double delta, double cos_theta, int shell_count) {
  const double half = 1.0 / shell_count;
  double lo = cos_theta - half, hi = cos_theta + half;
  if (lo < -1.0) {
    hi += -1.0 - lo;
    lo = -1.0;
  }
  if (hi > 1.0) {
    lo -= hi - 1.0;
    hi = 1.0;
  }
  lo = std::max(lo, -1.0);
  static const Rule1D rule = gauss_legendre(24);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double c = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[i];
    acc += rule.weights[i] * theta_angle(delta, c);
  }
  return 0.5 * acc;
}

double theta_cutoff(double delta, const Vec3& v, const Vec3& v_star, const Vec3& sigma) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0,1)");
  const Vec3 u = v - v_star;
  const double rel = u.norm();
  if (rel == 0.0) return 0.0;
  return theta_speed(delta, v.norm()) * theta_relative(delta, rel) *
         theta_angle(delta, sigma.dot(u) / rel);
}

SplitOperator::SplitOperator(const CollisionTable& table, double delta)
    : table_(table), delta_(delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0,1)");
  const VelocityGrid& g = table.grid();
  const int n = g.size();
  const Eigen::VectorXd& mu = g.mu();
  A_ = Eigen::MatrixXd::Zero(n, n);
  B2_ = Eigen::MatrixXd::Zero(n, n);

  std::vector<double> ts(n);
  for (int a = 0; a < n; ++a) ts[a] = theta_speed(delta, g.node(a).norm());
  const int k2_max = table.n_shell_keys() / 8;
  std::vector<double> tr(k2_max + 1, 0.0);
  for (int k2 = 1; k2 <= k2_max; ++k2) tr[k2] = theta_relative(delta, g.spacing() * std::sqrt(k2));
  std::vector<std::vector<double>> ta(table.n_shell_keys());

  table.for_each_ordered([&](const CollisionTable::Ordered& o) {
    auto& cache = ta[o.shell_key];
    if (cache.empty()) cache.assign(2 * o.k2 + 1, -1.0);
    double& angle = cache[o.dot + o.k2];
    if (angle < 0.0) angle = theta_angle_band(delta, o.cos_theta, o.shell_count);
    const double th = ts[o.a] * tr[o.k2] * angle;
    for (const auto& [M, s] : {std::pair<Eigen::MatrixXd*, double>{&A_, th},
                               std::pair<Eigen::MatrixXd*, double>{&B2_, 1.0 - th}}) {
      if (s == 0.0) continue;
      const double w = s * o.w;
      (*M)(o.a, o.c) += w * mu[o.d];
      (*M)(o.a, o.d) += w * mu[o.c];
      (*M)(o.a, o.b) -= w * mu[o.a];
    }
  });
}

double SplitOperator::measured_support_radius() const {
  double r = 0.0;
  for (int a = 0; a < A_.rows(); ++a)
    if (A_.row(a).cwiseAbs().maxCoeff() > 0.0) r = std::max(r, grid().node(a).norm());
  return r;
}

double SplitOperator::C_A() const { return A_.cwiseAbs().rowwise().sum().maxCoeff(); }

namespace {

double inv_q(double q) { return std::isinf(q) ? 0.0 : 1.0 / q; }

double ratio_x(double b_inf, double l_b) { return 16.0 * std::numbers::pi * b_inf / l_b; }

}  // namespace

double kq_star(double q, double gamma, double b_inf, double l_b) {
  if (!(q == 1.0 || std::isinf(q))) throw MathDomainError("q must be 1 or infinity");
  const double x = ratio_x(b_inf, l_b);
  if (x <= 2.0) throw MathDomainError("16 pi b_inf / l_b must exceed 2");
  const double s = inv_q(q);
  return std::pow(x - 2.0, s) * std::pow(1.0 + gamma + x, 1.0 - s);
}

double phi_q(double q, double k, double gamma, double b_inf, double l_b) {
  if (!(q == 1.0 || std::isinf(q))) throw MathDomainError("q must be 1 or infinity");
  if (k <= 1.0 + gamma) throw MathDomainError("phi_q needs k > 1 + gamma");
  const double s = inv_q(q);
  return ratio_x(b_inf, l_b) * std::pow(1.0 / (k + 2.0), s) *
         std::pow(1.0 / (k - 1.0 - gamma), 1.0 - s);
}

namespace {

struct Probe {
  Eigen::VectorXd h;
  const char* kind;
};

std::vector<Probe> generic_probes(const Eigen::VectorXd& m, const ProbeFamily& pf) {
  std::vector<Probe> out;
  const int n = static_cast<int>(m.size());
  if (pf.tails) {
    out.push_back({m.cwiseInverse(), "tail"});
    Eigen::VectorXd alt = m.cwiseInverse();
    for (int a = 1; a < n; a += 2) alt[a] = -alt[a];
    out.push_back({alt, "alternating-tail"});
  }
  std::mt19937_64 gen(pf.seed);
  std::normal_distribution<double> normal;
  for (int r = 0; r < pf.n_random; ++r) {
    Eigen::VectorXd h(n);
    for (int a = 0; a < n; ++a) h[a] = normal(gen) / m[a];
    out.push_back({h, "random"});
  }
  return out;
}

}  // namespace

DeltaEstimate estimate_Delta(const SplitOperator& split, const Weight& m, double q,
                             const ProbeFamily& pf) {
  if (!(q == 1.0 || std::isinf(q))) throw MathDomainError("q must be 1 or infinity");
  if (!pf.tails && !pf.bumps && !pf.row_signs && pf.n_random <= 0)
    throw Error("empty probe family");
  const VelocityGrid& g = split.grid();
  const Eigen::VectorXd mv = m.sample(g);
  const Eigen::VectorXd out_w = mv.cwiseQuotient(split.nu());
  const Eigen::MatrixXd& B2 = split.B2();
  const bool inf = std::isinf(q);
  auto in_norm = [&](const Eigen::VectorXd& h) {
    return inf ? linf_weighted(h, mv) : l1_weighted(g, h, mv);
  };
  auto out_norm = [&](const Eigen::VectorXd& y) {
    return inf ? linf_weighted(y, out_w) : l1_weighted(g, y, out_w);
  };

  DeltaEstimate est;
  auto consider = [&](double r, const char* kind) {
    ++est.n_probes;
    if (r > est.value) {
      est.value = r;
      est.argmax_kind = kind;
    }
  };
  for (const Probe& p : generic_probes(mv, pf)) {
    const double d = in_norm(p.h);
    if (d > 0.0) consider(out_norm(B2 * p.h) / d, p.kind);
  }
  if (pf.bumps) {
    for (int b = 0; b < g.size(); ++b) {
      const double d = inf ? mv[b] : g.weight() * mv[b];
      consider(out_norm(B2.col(b)) / d, "bump");
    }
  }
  if (pf.row_signs && inf) {
    // For h = sign(B2[a, .]) / m the a-th output entry alone gives
    // |(B2 h)_a| out_w[a] = out_w[a] sum_b |B2[a, b]| / m_b, and no probe
    // exceeds the largest of these, so the matrix-vector product is skipped.
    const Eigen::VectorXd rows = B2.cwiseAbs() * mv.cwiseInverse();
    for (int a = 0; a < g.size(); ++a)
      if (rows[a] > 0.0) consider(rows[a] * out_w[a], "row-sign");
  }
  return est;
}

DeltaEstimate estimate_Delta_tilde(const SplitOperator& split, double k, const ProbeFamily& pf) {
  if (!pf.tails && !pf.bumps && !pf.row_signs && pf.n_random <= 0)
    throw Error("empty probe family");
  const VelocityGrid& g = split.grid();
  const Weight in_w = Weight::polynomial(k);
  const Eigen::VectorXd mv = in_w.sample(g);
  const Eigen::VectorXd out_w = Weight::polynomial(2.0).sample(g);
  const Eigen::MatrixXd& B2 = split.B2();

  DeltaEstimate est;
  auto consider = [&](const Eigen::VectorXd& y, double d, const char* kind) {
    ++est.n_probes;
    if (d <= 0.0) return;
    const double r = l1_weighted(g, y, out_w) / d;
    if (r > est.value) {
      est.value = r;
      est.argmax_kind = kind;
    }
  };
  for (const Probe& p : generic_probes(mv, pf)) consider(B2 * p.h, linf_weighted(p.h, mv), p.kind);
  if (pf.bumps)
    for (int b = 0; b < g.size(); ++b) consider(B2.col(b), mv[b], "bump");
  if (pf.row_signs) {
    Eigen::MatrixXd H(g.size(), g.size());
    for (int a = 0; a < g.size(); ++a)
      for (int b = 0; b < g.size(); ++b) {
        const double s = B2(a, b);
        H(b, a) = (s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0)) / mv[b];
      }
    const Eigen::MatrixXd Y = B2 * H;
    for (int a = 0; a < g.size(); ++a) {
      const double d = linf_weighted(H.col(a), mv);
      consider(Y.col(a), d, "row-sign");
    }
  }
  return est;
}

}  // namespace kinetic
