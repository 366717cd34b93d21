#include "reprocs/baseline_pcp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reprocs {

double default_pcp_lambda(Index n, Index T) {
  return 1.0 / std::sqrt(static_cast<double>(std::max(n, T)));
}

namespace {

Mat shrink(const Mat& x, double tau) {
  return x.unaryExpr([tau](double a) {
    if (a > tau) return a - tau;
    if (a < -tau) return a + tau;
    return 0.0;
  });
}

Mat svt(const Mat& x, double tau) {
  const ThinSvd svd = thin_svd(x);
  Index keep = 0;
  while (keep < svd.sigma.size() && svd.sigma(keep) > tau) ++keep;
  if (keep == 0) return Mat::Zero(x.rows(), x.cols());
  const Vec sig = svd.sigma.head(keep).array() - tau;
  return svd.u.leftCols(keep) * sig.asDiagonal() * svd.v.leftCols(keep).transpose();
}

}  // namespace

PcpSolution solve_pcp(const Mat& m, double lambda, const PcpSettings& cfg) {
  if (m.rows() < 1 || m.cols() < 1) throw std::invalid_argument("solve_pcp: empty matrix");
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_pcp: lambda must be > 0");
  if (!m.allFinite()) throw std::invalid_argument("solve_pcp: non-finite entries");

  PcpSolution sol;
  sol.L = Mat::Zero(m.rows(), m.cols());
  sol.S = Mat::Zero(m.rows(), m.cols());
  const double m_fro = m.norm();
  if (m_fro == 0.0) {
    sol.converged = true;
    return sol;
  }

  const double m_two = spectral_norm(m);
  const double m_inf = m.cwiseAbs().maxCoeff();
  Mat y = m / std::max(m_two, m_inf / lambda);
  double mu = 1.25 / m_two;
  const double mu_max = mu * 1e7;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    sol.L = svt(m - sol.S + y / mu, 1.0 / mu);
    sol.S = shrink(m - sol.L + y / mu, lambda / mu);
    const Mat z = m - sol.L - sol.S;
    y += mu * z;
    mu = std::min(mu * cfg.mu_growth, mu_max);
    sol.iterations = it;
    sol.primal_residual = z.norm() / m_fro;
    sol.residual_history.push_back(sol.primal_residual);
    if (sol.primal_residual <= cfg.tol) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

}  // namespace reprocs
