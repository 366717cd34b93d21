#pragma once

#include "reprocs/linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace reprocs {

struct ModelConfig {
  Index n = 200;
  Index r0 = 12;
  Index c = 2;
  Index J = 2;
  std::vector<Index> t_change{100, 300};
  Index t_train = 40;
  Index total_T = 500;
  double b = 0.5;
  double gamma_star = 1.0;
  double gamma_new = 0.05;
  double v = 1.1;
  double lambda_minus = 0.05;
  double lambda_plus = 1.0 / 9.0;
  Index s = 7;
  double S_min = 2.0;
  double S_max = 3.0;
  Index support_dwell = 50;
  /// Frames per gamma_new,k step of the new-direction amplitude schedule.
  Index gamma_interval = 25;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the violated condition.
  void validate() const;
};

/// Largest lambda^+ whose uniform innovations stay inside (1-b) gamma_*.
double max_lambda_plus(double b, double gamma_star);

struct GroundTruth {
  /// P[j] is the basis in force after j changes; P[j] = [P[j-1] P_{j,new}].
  std::vector<BasisMatrix> P;
  /// Number of changes that have occurred at frame t.
  std::vector<Index> phase;
  std::vector<Vec> a;
  std::vector<Vec> nu;
  std::vector<IndexSet> support;
  Mat S;
  Mat L;
  Mat M;

  Index n() const { return M.rows(); }
  Index frames() const { return M.cols(); }
  const BasisMatrix& basis_at(Index t) const { return P[static_cast<std::size_t>(phase[static_cast<std::size_t>(t)])]; }
};

double gamma_new_k(Index k, double v, double gamma_new, double gamma_star);

GroundTruth gen_model(const ModelConfig& config);

/// Writes M.csv, L.csv, S.csv (rows "t,x_0,...,x_{n-1}") and supports.csv
/// (rows "t,i;j;...") into dir, which must exist.
void write_dump(const GroundTruth& truth, const std::string& dir);

}  // namespace reprocs
