#pragma once

#include "reprocs/linalg.hpp"
#include "reprocs/sparse_recovery.hpp"

#include <string>
#include <utility>
#include <vector>

namespace reprocs {

struct ReprocsParams {
  double xi = 0.1;
  double omega = 1.0;
  Index alpha = 25;
  Index K = 5;
  std::vector<Index> t_change;
  Index r0 = 0;
  Index c = 0;
  BpdnSettings bpdn;
  /// Run proj-PCA on L_hat_t - b L_hat_{t-1} instead of L_hat_t.
  bool ar_whitening = false;
  double b = 0.0;

  /// Throws std::invalid_argument on hard violations.
  void validate() const;
  /// Soft problems, e.g. change times closer than K alpha.
  std::vector<std::string> warnings() const;
};

struct ReprocsState {
  BasisMatrix P_hat_star;
  BasisMatrix P_hat_new;
  /// 1-based index of the next change to be tracked.
  Index j = 1;
  Index k = 1;
  std::vector<Vec> buffer;
  Index t = -1;
  Vec prev_L_hat;

  /// [P_hat_star P_hat_new], the basis projected out at the next frame.
  BasisMatrix current_basis() const;
};

struct FrameEstimate {
  Vec S_hat;
  Vec L_hat;
  IndexSet T_hat;
  Vec y;
  Vec S_cs;
  bool converged = true;
  bool ill_conditioned = false;
  int bpdn_iterations = 0;
  bool updated = false;
  bool merged = false;
  /// The basis projected out at this frame; its first star_rank columns
  /// are P_hat_star.
  BasisMatrix basis;
  Index star_rank = 0;
};

/// Top-r eigenvectors of (1/alpha_D) (I - PP') D D' (I - PP').
BasisMatrix proj_pca(const Mat& d, const BasisMatrix& p, Index r);

ReprocsState init(const Mat& training, Index r0);

/// Advances state in place.
FrameEstimate process_frame(ReprocsState& state, const Vec& m_t, Index t, const ReprocsParams& params);

std::pair<FrameEstimate, ReprocsState> process_frame(const ReprocsState& state, const Vec& m_t, Index t,
                                                     const ReprocsParams& params);

}  // namespace reprocs
