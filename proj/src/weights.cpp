#include "kinetic/weights.hpp"

#include "kinetic/errors.hpp"
#include "kinetic/splitting.hpp"

#include <cmath>
#include <sstream>

namespace kinetic {

Weight Weight::stretch_exp(double kappa, double alpha) {
  if (!(kappa > 0.0)) throw Error("stretch-exponential weight needs kappa > 0");
  if (!(alpha > 0.0 && alpha < 2.0)) throw Error("stretch-exponential weight needs alpha in (0,2)");
  return Weight(WeightKind::StretchExp, kappa, alpha, 0.0, 0.0);
}

Weight Weight::polynomial(double k) {
  if (!(k >= 0.0)) throw Error("polynomial weight needs k >= 0");
  return Weight(WeightKind::Polynomial, 0.0, 0.0, k, 0.0);
}

Weight Weight::guo(double beta) {
  if (!(beta >= 0.0)) throw Error("Guo weight needs beta >= 0");
  return Weight(WeightKind::Guo, 0.0, 0.0, 0.0, beta);
}

double Weight::at_speed(double s) const {
  switch (kind_) {
    case WeightKind::StretchExp:
      return std::exp(kappa_ * std::pow(s, alpha_));
    case WeightKind::Polynomial:
      return std::pow(japanese(s), k_);
    case WeightKind::Guo:
      return std::pow(japanese(s), beta_) / std::sqrt(maxwellian(s * s));
  }
  return 1.0;
}

Eigen::VectorXd Weight::sample(const VelocityGrid& grid) const {
  Eigen::VectorXd m(grid.size());
  for (int a = 0; a < grid.size(); ++a) m[a] = (*this)(grid.node(a));
  return m;
}

bool Weight::admissible_q1(double gamma, double b_inf, double l_b) const {
  return kind_ == WeightKind::Polynomial && k_ > kq_star(1.0, gamma, b_inf, l_b);
}

bool Weight::admissible_qinf(double gamma, double b_inf, double l_b) const {
  return kind_ == WeightKind::Polynomial &&
         k_ > kq_star(std::numeric_limits<double>::infinity(), gamma, b_inf, l_b);
}

bool Weight::admissible_mixed(double gamma) const {
  return kind_ == WeightKind::Polynomial && k_ > 5.0 + gamma;
}

std::string Weight::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case WeightKind::StretchExp:
      os << "exp(" << kappa_ << "|v|^" << alpha_ << ")";
      break;
    case WeightKind::Polynomial:
      os << "<v>^" << k_;
      break;
    case WeightKind::Guo:
      os << "<v>^" << beta_ << " mu^-1/2";
      break;
  }
  return os.str();
}

double linf_weighted(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::VectorXd& m) {
  return f.cwiseAbs().cwiseProduct(m).maxCoeff();
}

double l1_weighted(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                   const Eigen::VectorXd& m) {
  return grid.weight() * f.cwiseAbs().cwiseProduct(m).sum();
}

NormReport norm(const Field& f, const Weight& m, NormTag tag) {
  const VelocityGrid& vg = f.velocity();
  const Eigen::VectorXd mv = m.sample(vg);
  NormReport rep;
  rep.tag = tag;
  const Eigen::MatrixXd& F = f.values();
  // sup over x of |f| for each velocity node
  const Eigen::VectorXd sup_x = F.cwiseAbs().colwise().maxCoeff().transpose();
  double edge = 0.0, total = 0.0;
  for (int a = 0; a < vg.size(); ++a) {
    const double c = sup_x[a] * mv[a];
    total += c;
    if (vg.on_edge(a)) edge += c;
  }
  rep.truncation_mass = total > 0.0 ? edge / total : 0.0;

  switch (tag) {
    case NormTag::LinfXVm: {
      int arg = 0;
      rep.value = sup_x.cwiseProduct(mv).maxCoeff(&arg);
      if (m.kind() == WeightKind::Guo && rep.value > 0.0 && vg.on_edge(arg)) rep.overflow = true;
      break;
    }
    case NormTag::L1vLinfXm:
      rep.value = vg.weight() * sup_x.cwiseProduct(mv).sum();
      break;
    case NormTag::L2Mu: {
      double acc = 0.0;
      const Eigen::VectorXd& mu = vg.mu();
      for (int a = 0; a < vg.size(); ++a) acc += F.col(a).squaredNorm() / mu[a];
      rep.value = std::sqrt(acc * vg.weight() * f.space().cell_volume());
      break;
    }
    case NormTag::LinfBoundaryM: {
      const SpatialGrid& sg = f.space();
      double best = 0.0;
      for (int k = 0; k < sg.size(); ++k) {
        const auto& b = sg.box_index(k);
        bool boundary = false;
        if (sg.domain().kind() == DomainKind::Slab) {
          boundary = b[0] == 0 || b[0] == sg.n() - 1;
        } else {
          for (int d = 0; d < 3 && !boundary; ++d)
            for (int s : {-1, 1}) {
              auto nb = b;
              nb[d] += s;
              if (sg.cell_at(nb[0], nb[1], nb[2]) < 0) boundary = true;
            }
        }
        if (boundary) best = std::max(best, F.row(k).cwiseAbs().cwiseProduct(mv.transpose()).maxCoeff());
      }
      rep.value = best;
      break;
    }
  }
  if (!std::isfinite(rep.value)) rep.overflow = true;
  return rep;
}

bool embed_check(const Weight& m, const Weight& guo) {
  if (guo.kind() != WeightKind::Guo) throw Error("embed_check compares against a Guo weight");
  switch (m.kind()) {
    case WeightKind::Polynomial:
      return true;
    case WeightKind::StretchExp:
      return embed_check_exponential(m.kappa(), m.alpha(), guo);
    case WeightKind::Guo:
      return m.beta() <= guo.beta();
  }
  return false;
}

bool embed_check_exponential(double kappa, double alpha, const Weight& guo) {
  if (guo.kind() != WeightKind::Guo) throw Error("embed_check compares against a Guo weight");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw Error("exponent alpha must lie in (0,2]");
  if (alpha < 2.0) return true;
  // mu^{-1/2} = (2 pi)^{3/4} exp(|v|^2 / 4)
  return kappa <= 0.25;
}

}  // namespace kinetic
