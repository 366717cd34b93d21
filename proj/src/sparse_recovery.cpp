#include "reprocs/sparse_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reprocs {

Vec ProjectedOperator::apply(const Vec& v) const {
  if (v.size() != p_.n()) throw std::invalid_argument("ProjectedOperator: dimension mismatch");
  if (p_.empty()) return v;
  return v - p_.data() * (p_.data().transpose() * v);
}

double ProjectedOperator::complement_norm(const Vec& v) const {
  if (p_.empty()) return 0.0;
  return (p_.data().transpose() * v).norm();
}

namespace {

// Projection onto {x : ||y - Phi x|| <= xi}. Only the range-of-Phi part of
// x enters the constraint, so the projection is a ball projection there.
struct FeasibleSet {
  const ProjectedOperator& phi;
  const Vec& y;
  double radius;

  Vec project(const Vec& v) const {
    Vec w = phi.apply(v - y);
    const double nw = w.norm();
    if (nw <= radius) return v;
    return v - (1.0 - radius / nw) * w;
  }
};

Vec soft(const Vec& v, double tau) {
  return v.unaryExpr([tau](double a) {
    if (a > tau) return a - tau;
    if (a < -tau) return a + tau;
    return 0.0;
  });
}

double residual(const ProjectedOperator& phi, const Vec& y, const Vec& x) {
  return (y - phi.apply(x)).norm();
}

}  // namespace

BpdnSolution solve_bpdn(const ProjectedOperator& phi, const Vec& y, double xi, const BpdnSettings& cfg) {
  if (y.size() != phi.n()) throw std::invalid_argument("solve_bpdn: y has wrong length");
  if (!(xi >= 0.0)) throw std::invalid_argument("solve_bpdn: xi must be >= 0");
  if (!(cfg.rho > 0.0) || cfg.max_iters < 1) throw std::invalid_argument("solve_bpdn: bad settings");

  const double out_of_range = phi.complement_norm(y);
  double radius2 = xi * xi - out_of_range * out_of_range;
  if (radius2 < 0.0) {
    if (out_of_range > xi * (1.0 + cfg.feas_slack) + 1e-14 * y.norm()) {
      throw std::invalid_argument("solve_bpdn: no x satisfies the residual bound");
    }
    radius2 = 0.0;
  }
  const FeasibleSet set{phi, y, std::sqrt(radius2)};
  const double limit = xi * (1.0 + cfg.feas_slack);

  BpdnSolution sol;
  if (residual(phi, y, Vec::Zero(y.size())) <= xi) {
    sol.x_hat = Vec::Zero(y.size());
    sol.residual_norm = y.norm();
    sol.converged = true;
    return sol;
  }

  const Index n = y.size();
  const double inv_rho = 1.0 / cfg.rho;
  const double scale = std::max(1.0, y.norm());
  Vec x = Vec::Zero(n), z = Vec::Zero(n), u = Vec::Zero(n), z_old(n);
  int it = 0;
  bool done = false;
  while (it < cfg.max_iters) {
    ++it;
    x = set.project(z - u);
    z_old = z;
    z = soft(x + u, inv_rho);
    u += x - z;
    const double r_pri = (x - z).norm();
    const double r_dual = cfg.rho * (z - z_old).norm();
    if (r_pri <= cfg.tol * scale && r_dual <= cfg.tol * scale) {
      done = true;
      break;
    }
  }
  sol.iterations = it;
  sol.converged = done;
  const double rz = residual(phi, y, z);
  if (rz <= limit) {
    sol.x_hat = std::move(z);
    sol.residual_norm = rz;
  } else {
    sol.residual_norm = residual(phi, y, x);
    sol.x_hat = std::move(x);
  }
  return sol;
}

IndexSet estimate_support(const Vec& x, double omega) {
  if (!(omega >= 0.0)) throw std::invalid_argument("estimate_support: omega must be >= 0");
  IndexSet t;
  for (Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > omega) t.push_back(i);
  }
  return t;
}

Vec ls_refit(const ProjectedOperator& phi, const Vec& y, const IndexSet& t) {
  const Index n = phi.n();
  if (y.size() != n) throw std::invalid_argument("ls_refit: y has wrong length");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0 || t[i] >= n || (i > 0 && t[i] <= t[i - 1])) {
      throw std::invalid_argument("ls_refit: support must be sorted, unique and in range");
    }
  }
  Vec out = Vec::Zero(n);
  if (t.empty()) return out;

  const Index m = static_cast<Index>(t.size());
  const Vec py = phi.apply(y);
  Vec rhs(m);
  for (Index i = 0; i < m; ++i) rhs(i) = py(t[static_cast<std::size_t>(i)]);

  // (Phi_T)' Phi_T = I_T' Phi I_T = I - Q_T Q_T' with Q_T the rows T of P.
  Mat gram = Mat::Identity(m, m);
  if (!phi.basis().empty()) {
    const Mat qt = restrict_rows(phi.basis().data(), t);
    gram.noalias() -= qt * qt.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > kMaxGramCondition) {
    throw std::runtime_error("ill-conditioned support");
  }
  const Vec sol = es.eigenvectors() *
                  (es.eigenvalues().cwiseInverse().asDiagonal() * (es.eigenvectors().transpose() * rhs));
  for (Index i = 0; i < m; ++i) out(t[static_cast<std::size_t>(i)]) = sol(i);
  return out;
}

}  // namespace reprocs
