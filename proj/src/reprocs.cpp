#include "reprocs/reprocs.hpp"

#include <stdexcept>

namespace reprocs {

void ReprocsParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("reprocs params: " + what); };
  if (alpha < 1) fail("alpha must be >= 1");
  if (K < 1) fail("K must be >= 1");
  if (!(omega > 0.0)) fail("omega must be > 0");
  if (!(xi > 0.0)) fail("xi must be > 0");
  if (r0 < 0 || c < 0) fail("r0 and c must be >= 0");
  for (std::size_t i = 1; i < t_change.size(); ++i) {
    if (t_change[i] <= t_change[i - 1]) fail("t_change must be strictly increasing");
  }
  if (ar_whitening && !(b >= 0.0 && b < 1.0)) fail("b must lie in [0,1) when ar_whitening is set");
}

std::vector<std::string> ReprocsParams::warnings() const {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < t_change.size(); ++i) {
    if (t_change[i] - t_change[i - 1] < K * alpha) {
      out.push_back("change times " + std::to_string(t_change[i - 1]) + " and " + std::to_string(t_change[i]) +
                    " are closer than K*alpha = " + std::to_string(K * alpha) + " frames");
    }
  }
  return out;
}

BasisMatrix ReprocsState::current_basis() const {
  if (P_hat_new.empty()) return P_hat_star;
  return hcat(P_hat_star, P_hat_new);
}

BasisMatrix proj_pca(const Mat& d, const BasisMatrix& p, Index r) {
  if (d.cols() < 1) throw std::invalid_argument("proj_pca: need at least one column");
  if (p.n() != d.rows()) throw std::invalid_argument("proj_pca: dimension mismatch");
  if (r < 0 || r > d.rows()) throw std::invalid_argument("proj_pca: r out of range");
  if (r == 0) return BasisMatrix(d.rows());

  const Mat dp = project_out(p, d);
  Mat cov = dp * dp.transpose() / static_cast<double>(d.cols());
  cov = 0.5 * (cov + cov.transpose()).eval();
  SymEig eig = top_r_evd(cov, r);
  if (eig.values(0) < 1e-12) throw std::runtime_error("no energy in projected data");
  if (p.empty()) return std::move(eig.vectors);

  // Eigenvectors of zero eigenvalues may leak into Span(P); project them out.
  BasisMatrix q = orthonormalize(project_out(p, eig.vectors.data()));
  if (q.r() < r) throw std::runtime_error("no energy in projected data");
  return q;
}

ReprocsState init(const Mat& training, Index r0) {
  if (r0 < 0) throw std::invalid_argument("init: r0 must be >= 0");
  if (training.cols() < r0) throw std::invalid_argument("init: need t_train >= r0");
  ReprocsState st;
  const Index n = training.rows();
  st.P_hat_star = training.cols() == 0 ? BasisMatrix(n) : proj_pca(training, BasisMatrix(n), r0);
  st.P_hat_new = BasisMatrix(n);
  st.j = 1;
  st.k = 1;
  st.t = training.cols() - 1;
  if (training.cols() > 0) st.prev_L_hat = training.col(training.cols() - 1);
  return st;
}

FrameEstimate process_frame(ReprocsState& st, const Vec& m_t, Index t, const ReprocsParams& prm) {
  if (t <= st.t) throw std::invalid_argument("process_frame: t must be strictly increasing");
  if (m_t.size() != st.P_hat_star.n()) throw std::invalid_argument("process_frame: M_t has wrong length");

  FrameEstimate fe;
  fe.basis = st.current_basis();
  fe.star_rank = st.P_hat_star.r();
  const ProjectedOperator phi(fe.basis);
  fe.y = phi.apply(m_t);

  const BpdnSolution cs = solve_bpdn(phi, fe.y, prm.xi, prm.bpdn);
  fe.converged = cs.converged;
  fe.bpdn_iterations = cs.iterations;
  fe.S_cs = cs.x_hat;
  fe.T_hat = estimate_support(fe.S_cs, prm.omega);
  try {
    fe.S_hat = ls_refit(phi, fe.y, fe.T_hat);
  } catch (const std::runtime_error&) {
    fe.ill_conditioned = true;
    fe.S_hat = Vec::Zero(m_t.size());
    for (Index i : fe.T_hat) fe.S_hat(i) = fe.S_cs(i);
  }
  fe.L_hat = m_t - fe.S_hat;

  const Index J = static_cast<Index>(prm.t_change.size());
  if (st.j <= J) {
    const Index tj = prm.t_change[static_cast<std::size_t>(st.j - 1)];
    if (t >= tj) {
      if (prm.ar_whitening && st.prev_L_hat.size() == m_t.size()) {
        st.buffer.push_back(fe.L_hat - prm.b * st.prev_L_hat);
      } else {
        st.buffer.push_back(fe.L_hat);
      }
      if (static_cast<Index>(st.buffer.size()) > prm.alpha) st.buffer.erase(st.buffer.begin());
      if (t == tj + st.k * prm.alpha - 1) {
        Mat d(m_t.size(), static_cast<Index>(st.buffer.size()));
        for (std::size_t i = 0; i < st.buffer.size(); ++i) d.col(static_cast<Index>(i)) = st.buffer[i];
        st.P_hat_new = proj_pca(d, st.P_hat_star, prm.c);
        st.buffer.clear();
        fe.updated = true;
        if (st.k == prm.K) {
          st.P_hat_star = hcat(st.P_hat_star, st.P_hat_new);
          st.P_hat_new = BasisMatrix(m_t.size());
          ++st.j;
          st.k = 1;
          fe.merged = true;
        } else {
          ++st.k;
        }
      }
    }
  }
  st.prev_L_hat = fe.L_hat;
  st.t = t;
  return fe;
}

std::pair<FrameEstimate, ReprocsState> process_frame(const ReprocsState& state, const Vec& m_t, Index t,
                                                     const ReprocsParams& params) {
  ReprocsState next = state;
  FrameEstimate fe = process_frame(next, m_t, t, params);
  return {std::move(fe), std::move(next)};
}

}  // namespace reprocs
