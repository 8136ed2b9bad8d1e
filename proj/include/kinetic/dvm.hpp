#pragma once

#include "kinetic/collision.hpp"
#include "kinetic/velocity_grid.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace kinetic {

/// Lattice collision rule on a VelocityGrid.
///
/// A pre-collision pair (a, b) with index difference u scatters to (c, d) with
/// c = (a + b + u') / 2, d = (a + b - u') / 2 for every lattice vector u' with
/// |u'| = |u| and u' = u mod 2. Each such u' carries the solid angle
/// 4 pi / N, N being the number of lattice vectors on that shell and parity
/// class. Momentum and energy are conserved node by node, so the discrete Q
/// has the collision invariants exactly and mu_c mu_d = mu_a mu_b.
/// Pairs whose image leaves the lattice are dropped (and counted).
class CollisionTable {
 public:
  struct Entry {
    std::int32_t a, b, c, d;
    double w;
  };

  CollisionTable(const VelocityGrid& grid, const CollisionModel& model);

  const VelocityGrid& grid() const { return grid_; }
  int n_shell_keys() const { return static_cast<int>(shells_.size()); }
  const CollisionModel& model() const { return model_; }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Fraction of ordered collision partners dropped at the lattice edge.
  double truncated_fraction() const { return truncated_fraction_; }

  /// Discrete loss frequency nu_a = sum_{b, u'} W mu_b.
  const Eigen::VectorXd& nu() const { return nu_; }

  /// Q(f, g) at every node; symmetric in f and g.
  Eigen::VectorXd q_bilinear(const Eigen::Ref<const Eigen::VectorXd>& f,
                             const Eigen::Ref<const Eigen::VectorXd>& g) const;

  /// Batched Q over many cells. Arrays are velocity-major:
  /// value(node a, cell k) = data[a * n_cells + k]. `out` is accumulated into.
  void q_bilinear_batch(const double* f, const double* g, double* out, int n_cells) const;

  /// L f = 2 Q(mu, f).
  Eigen::VectorXd linear_L(const Eigen::Ref<const Eigen::VectorXd>& f) const;
  /// K f = L f + nu f.
  Eigen::VectorXd linear_K(const Eigen::Ref<const Eigen::VectorXd>& f) const;
  /// Dense matrix of L (grid size squared).
  Eigen::MatrixXd dense_L() const;

  /// One ordered in-lattice collision (a, b) -> (c, d).
  struct Ordered {
    int a, b, c, d;
    double w;          // h^3 (4 pi / N) B(|v_a - v_b|, cos theta)
    double cos_theta;  // u . u' / |u|^2
    int k2;            // |u|^2 in lattice units
    int dot;           // u . u'
    int shell_key;     // 8 |u|^2 + parity mask of u
    int shell_count;   // N
  };

  /// Visits every ordered in-lattice collision, the trivial ones u' = +-u
  /// included.
  template <class Fn>
  void for_each_ordered(Fn&& fn) const;

 private:
  struct Shell {
    std::vector<std::array<int, 3>> vectors;
  };
  const Shell& shell(const std::array<int, 3>& u) const { return shells_[shell_key(u)]; }
  static int shell_key(const std::array<int, 3>& u) {
    return 8 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]) + (u[0] & 1) + ((u[1] & 1) << 1) +
           ((u[2] & 1) << 2);
  }

  const VelocityGrid& grid_;
  const CollisionModel& model_;
  std::vector<Shell> shells_;  // keyed by 8 |u|^2 + parity mask
  std::vector<Entry> entries_;
  Eigen::VectorXd nu_;
  double truncated_fraction_ = 0.0;
};

template <class Fn>
void CollisionTable::for_each_ordered(Fn&& fn) const {
  const int n = grid_.n_per_axis();
  const double h = grid_.spacing();
  const double h3 = grid_.weight();
  const double four_pi = 4.0 * 3.14159265358979323846;
  for (int a = 0; a < grid_.size(); ++a) {
    const auto ia = grid_.multi_index(a);
    for (int b = 0; b < grid_.size(); ++b) {
      const auto ib = grid_.multi_index(b);
      const std::array<int, 3> u{ia[0] - ib[0], ia[1] - ib[1], ia[2] - ib[2]};
      const int k2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
      if (k2 == 0) continue;
      const int key = shell_key(u);
      const Shell& sh = shells_[key];
      const double omega = four_pi / static_cast<double>(sh.vectors.size());
      const double kin = model_.phi(h * std::sqrt(static_cast<double>(k2)));
      for (const auto& up : sh.vectors) {
        std::array<int, 3> ic{}, id{};
        bool inside = true;
        for (int q = 0; q < 3; ++q) {
          ic[q] = (ia[q] + ib[q] + up[q]) / 2;
          id[q] = (ia[q] + ib[q] - up[q]) / 2;
          inside = inside && ic[q] >= 0 && ic[q] < n && id[q] >= 0 && id[q] < n;
        }
        if (!inside) continue;
        const int dot = u[0] * up[0] + u[1] * up[1] + u[2] * up[2];
        const double cos_t = static_cast<double>(dot) / k2;
        fn(Ordered{a, b, grid_.index(ic[0], ic[1], ic[2]), grid_.index(id[0], id[1], id[2]),
                   h3 * omega * kin * model_.b()(cos_t), cos_t, k2, dot, key,
                   static_cast<int>(sh.vectors.size())});
      }
    }
  }
}

}  // namespace kinetic
