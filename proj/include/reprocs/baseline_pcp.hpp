#pragma once

#include "reprocs/linalg.hpp"

#include <vector>

namespace reprocs {

struct PcpSettings {
  int max_iters = 1000;
  /// Stop when ||M - L - S||_F <= tol ||M||_F.
  double tol = 1e-7;
  double mu_growth = 1.5;
};

struct PcpSolution {
  Mat L;
  Mat S;
  int iterations = 0;
  double primal_residual = 0.0;
  bool converged = false;
  /// ||M - L - S||_F / ||M||_F after each outer iteration.
  std::vector<double> residual_history;
};

/// 1 / sqrt(max(n, T)).
double default_pcp_lambda(Index n, Index T);

/// min ||L||_* + lambda ||S||_1 s.t. L + S = M, inexact augmented Lagrangian.
PcpSolution solve_pcp(const Mat& m, double lambda, const PcpSettings& cfg = {});

}  // namespace reprocs
