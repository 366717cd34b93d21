#pragma once

#include "reprocs/linalg.hpp"

namespace reprocs {

/// Phi = I - P P', applied matrix-free.
class ProjectedOperator {
 public:
  explicit ProjectedOperator(BasisMatrix p_hat) : p_(std::move(p_hat)) {}

  Index n() const { return p_.n(); }
  const BasisMatrix& basis() const { return p_; }

  Vec apply(const Vec& v) const;
  /// ||(I - Phi) v||_2 = ||P' v||_2.
  double complement_norm(const Vec& v) const;

 private:
  BasisMatrix p_;
};

struct BpdnSettings {
  double rho = 1.0;
  int max_iters = 20000;
  double tol = 1e-7;
  double feas_slack = 1e-6;
};

struct BpdnSolution {
  Vec x_hat;
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
};

/// min ||x||_1 s.t. ||y - Phi x||_2 <= xi.
BpdnSolution solve_bpdn(const ProjectedOperator& phi, const Vec& y, double xi,
                        const BpdnSettings& cfg = {});

/// {i : |x_i| > omega}.
IndexSet estimate_support(const Vec& x, double omega);

/// Least-squares refit of y on the columns T of Phi; zero off T.
Vec ls_refit(const ProjectedOperator& phi, const Vec& y, const IndexSet& t);

/// Gram condition number above which ls_refit refuses a support.
inline constexpr double kMaxGramCondition = 1e12;

}  // namespace reprocs
