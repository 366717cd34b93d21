#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace reprocs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;
/// Sorted, duplicate-free list of coordinates.
using IndexSet = std::vector<Index>;

/// n x r matrix with orthonormal columns. r = 0 is the empty basis.
class BasisMatrix {
 public:
  static constexpr double kOrthoTol = 1e-10;

  BasisMatrix() = default;
  explicit BasisMatrix(Index n);
  /// Validates Q'Q = I within tol; throws std::invalid_argument otherwise.
  explicit BasisMatrix(Mat q, double tol = kOrthoTol);

  const Mat& data() const { return q_; }
  Index n() const { return q_.rows(); }
  Index r() const { return q_.cols(); }
  bool empty() const { return q_.cols() == 0; }

  /// Largest |(Q'Q - I)_ij|.
  double orthonormality_defect() const;

 private:
  Mat q_;
};

/// [A B]; the caller guarantees B'A = 0.
BasisMatrix hcat(const BasisMatrix& a, const BasisMatrix& b, double tol = 1e-8);

struct SymEig {
  BasisMatrix vectors;
  Vec values;
};

enum class DensenessMode { exact, loose };

struct DensenessReport {
  double kappa = 0.0;
  Index s = 0;
  DensenessMode mode = DensenessMode::exact;
  std::uint64_t subsets_evaluated = 0;
};

inline constexpr std::uint64_t kDefaultSubsetCap = 2000000;

BasisMatrix orthonormalize(const Mat& m, double rank_tol = 1e-10);

SymEig top_r_evd(const Mat& a, Index r);

double subspace_error(const BasisMatrix& p_hat, const BasisMatrix& p);

/// max over |T| = s of ||I_T' basis(B)||_2, or the s * kappa_1 bound.
DensenessReport denseness_coeff(const Mat& b, Index s, DensenessMode mode,
                                std::uint64_t cap = kDefaultSubsetCap);

/// delta_s(I - PP') = kappa_s(P)^2.
double ric_projector(const BasisMatrix& p, Index s, std::uint64_t cap = kDefaultSubsetCap);

double spectral_norm(const Mat& m);

/// (I - PP') m without forming the n x n projector.
Mat project_out(const BasisMatrix& p, const Mat& m);

/// Rows T of m.
Mat restrict_rows(const Mat& m, const IndexSet& t);

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

struct ThinSvd {
  Mat u;
  Vec sigma;
  Mat v;
};

ThinSvd thin_svd(const Mat& m);

}  // namespace reprocs
