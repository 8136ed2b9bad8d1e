#include "kinetic/dvm.hpp"

#include "kinetic/errors.hpp"

#include <cmath>

namespace kinetic {

CollisionTable::CollisionTable(const VelocityGrid& grid, const CollisionModel& model)
    : grid_(grid), model_(model) {
  const int n = grid.n_per_axis();
  if (n > 24) throw Error("lattice collision table limited to 24 nodes per axis");
  const int k2_max = 3 * (n - 1) * (n - 1);
  const int r = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k2_max))));
  shells_.resize(8 * (k2_max + 1));
  for (int x = -r; x <= r; ++x)
    for (int y = -r; y <= r; ++y)
      for (int z = -r; z <= r; ++z) {
        const int k2 = x * x + y * y + z * z;
        if (k2 == 0 || k2 > k2_max) continue;
        const std::array<int, 3> u{x, y, z};
        shells_[shell_key(u)].vectors.push_back(u);
      }

  const Eigen::VectorXd& mu = grid.mu();
  nu_ = Eigen::VectorXd::Zero(grid.size());
  std::size_t kept = 0, dropped = 0;
  const double h = grid.spacing();
  const double h3 = grid.weight();
  const double four_pi = 4.0 * 3.14159265358979323846;
  for (int a = 0; a < grid.size(); ++a) {
    const auto ia = grid.multi_index(a);
    for (int b = 0; b < grid.size(); ++b) {
      const auto ib = grid.multi_index(b);
      const std::array<int, 3> u{ia[0] - ib[0], ia[1] - ib[1], ia[2] - ib[2]};
      const int k2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
      if (k2 == 0) continue;
      const Shell& sh = shell(u);
      const double omega = four_pi / static_cast<double>(sh.vectors.size());
      const double kin = model.phi(h * std::sqrt(static_cast<double>(k2)));
      for (const auto& up : sh.vectors) {
        std::array<int, 3> ic{}, id{};
        bool inside = true;
        for (int q = 0; q < 3; ++q) {
          ic[q] = (ia[q] + ib[q] + up[q]) / 2;
          id[q] = (ia[q] + ib[q] - up[q]) / 2;
          inside = inside && ic[q] >= 0 && ic[q] < n && id[q] >= 0 && id[q] < n;
        }
        if (!inside) {
          ++dropped;
          continue;
        }
        ++kept;
        const double cos_t =
            static_cast<double>(u[0] * up[0] + u[1] * up[1] + u[2] * up[2]) / k2;
        const double base = h3 * omega * kin;
        nu_[a] += base * model.b()(cos_t) * mu[b];
        if (a >= b) continue;
        const int c = grid.index(ic[0], ic[1], ic[2]);
        const int d = grid.index(id[0], id[1], id[2]);
        // one representative per unordered class {(a,b),(c,d)}
        if (c >= d) continue;
        if (c < a || (c == a && d <= b)) continue;
        const double w = base * 0.5 * (model.b()(cos_t) + model.b()(-cos_t));
        entries_.push_back({a, b, c, d, w});
      }
    }
  }
  truncated_fraction_ = static_cast<double>(dropped) / static_cast<double>(kept + dropped);
}

Eigen::VectorXd CollisionTable::q_bilinear(const Eigen::Ref<const Eigen::VectorXd>& f,
                                           const Eigen::Ref<const Eigen::VectorXd>& g) const {
  if (f.size() != grid_.size() || g.size() != grid_.size())
    throw Error("velocity function size does not match grid");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid_.size());
  for (const Entry& e : entries_) {
    // grouped so that swapping f and g rounds identically
    const double br =
        e.w * ((f[e.c] * g[e.d] + g[e.c] * f[e.d]) - (f[e.a] * g[e.b] + g[e.a] * f[e.b]));
    out[e.a] += br;
    out[e.b] += br;
    out[e.c] -= br;
    out[e.d] -= br;
  }
  return out;
}

void CollisionTable::q_bilinear_batch(const double* f, const double* g, double* out,
                                      int n_cells) const {
  for (const Entry& e : entries_) {
    const double* fa = f + static_cast<std::size_t>(e.a) * n_cells;
    const double* fb = f + static_cast<std::size_t>(e.b) * n_cells;
    const double* fc = f + static_cast<std::size_t>(e.c) * n_cells;
    const double* fd = f + static_cast<std::size_t>(e.d) * n_cells;
    const double* ga = g + static_cast<std::size_t>(e.a) * n_cells;
    const double* gb = g + static_cast<std::size_t>(e.b) * n_cells;
    const double* gc = g + static_cast<std::size_t>(e.c) * n_cells;
    const double* gd = g + static_cast<std::size_t>(e.d) * n_cells;
    double* oa = out + static_cast<std::size_t>(e.a) * n_cells;
    double* ob = out + static_cast<std::size_t>(e.b) * n_cells;
    double* oc = out + static_cast<std::size_t>(e.c) * n_cells;
    double* od = out + static_cast<std::size_t>(e.d) * n_cells;
    const double w = e.w;
    for (int k = 0; k < n_cells; ++k) {
      const double br = w * ((fc[k] * gd[k] + gc[k] * fd[k]) - (fa[k] * gb[k] + ga[k] * fb[k]));
      oa[k] += br;
      ob[k] += br;
      oc[k] -= br;
      od[k] -= br;
    }
  }
}

Eigen::VectorXd CollisionTable::linear_L(const Eigen::Ref<const Eigen::VectorXd>& f) const {
  return 2.0 * q_bilinear(grid_.mu(), f);
}

Eigen::VectorXd CollisionTable::linear_K(const Eigen::Ref<const Eigen::VectorXd>& f) const {
  Eigen::VectorXd k = linear_L(f);
  k += nu_.cwiseProduct(f);
  return k;
}

Eigen::MatrixXd CollisionTable::dense_L() const {
  const Eigen::VectorXd& mu = grid_.mu();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(grid_.size(), grid_.size());
  for (const Entry& e : entries_) {
    // Q(mu, h) bracket: mu_c h_d + h_c mu_d - mu_a h_b - h_a mu_b
    const double w2 = 2.0 * e.w;
    for (int row : {e.a, e.b}) {
      L(row, e.d) += w2 * mu[e.c];
      L(row, e.c) += w2 * mu[e.d];
      L(row, e.b) -= w2 * mu[e.a];
      L(row, e.a) -= w2 * mu[e.b];
    }
    for (int row : {e.c, e.d}) {
      L(row, e.d) -= w2 * mu[e.c];
      L(row, e.c) -= w2 * mu[e.d];
      L(row, e.b) += w2 * mu[e.a];
      L(row, e.a) += w2 * mu[e.b];
    }
  }
  return L;
}

}  // namespace kinetic
