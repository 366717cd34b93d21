#include "reprocs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace reprocs {

BasisMatrix::BasisMatrix(Index n) : q_(n, 0) {}

BasisMatrix::BasisMatrix(Mat q, double tol) : q_(std::move(q)) {
  if (q_.cols() > q_.rows()) {
    throw std::invalid_argument("basis matrix has more columns than rows");
  }
  if (orthonormality_defect() > tol) {
    throw std::invalid_argument("basis matrix columns are not orthonormal");
  }
}

double BasisMatrix::orthonormality_defect() const {
  if (q_.cols() == 0) return 0.0;
  Mat g = q_.transpose() * q_;
  g -= Mat::Identity(g.rows(), g.cols());
  return g.cwiseAbs().maxCoeff();
}

BasisMatrix hcat(const BasisMatrix& a, const BasisMatrix& b, double tol) {
  if (a.n() != b.n()) throw std::invalid_argument("hcat: dimension mismatch");
  Mat q(a.n(), a.r() + b.r());
  q << a.data(), b.data();
  return BasisMatrix(std::move(q), tol);
}

BasisMatrix orthonormalize(const Mat& m, double rank_tol) {
  const Index n = m.rows();
  if (n < 1) throw std::invalid_argument("orthonormalize: n must be >= 1");
  if (!(rank_tol > 0)) throw std::invalid_argument("orthonormalize: rank_tol must be > 0");

  Mat q(n, std::min(n, m.cols()));
  Index r = 0;
  for (Index j = 0; j < m.cols() && r < n; ++j) {
    const double norm0 = m.col(j).norm();
    if (norm0 == 0.0) continue;
    Vec v = m.col(j);
    // Two passes of modified Gram-Schmidt keep the columns orthonormal to
    // working precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < r; ++i) v -= q.col(i).dot(v) * q.col(i);
    }
    const double res = v.norm();
    if (res <= rank_tol * norm0) continue;
    q.col(r++) = v / res;
  }
  return BasisMatrix(q.leftCols(r));
}

SymEig top_r_evd(const Mat& a, Index r) {
  if (a.rows() != a.cols()) throw std::invalid_argument("top_r_evd: matrix not square");
  const Index n = a.rows();
  if (r < 0 || r > n) throw std::invalid_argument("top_r_evd: r out of range");
  const double scale = std::max(1.0, n ? a.cwiseAbs().maxCoeff() : 0.0);
  if (n && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("not Hermitian");
  }
  SymEig out{BasisMatrix(n), Vec(r)};
  if (r == 0) return out;

  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("top_r_evd: eigensolver failed");

  Mat vecs(n, r);
  for (Index i = 0; i < r; ++i) {
    const Index src = n - 1 - i;
    out.values(i) = es.eigenvalues()(src);
    Vec q = es.eigenvectors().col(src);
    for (Index k = 0; k < n; ++k) {
      if (std::abs(q(k)) > 1e-12) {
        if (q(k) < 0) q = -q;
        break;
      }
    }
    vecs.col(i) = q;
  }
  out.vectors = BasisMatrix(std::move(vecs), 1e-9);
  return out;
}

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

Mat project_out(const BasisMatrix& p, const Mat& m) {
  if (p.n() != m.rows()) throw std::invalid_argument("project_out: dimension mismatch");
  if (p.empty()) return m;
  return m - p.data() * (p.data().transpose() * m);
}

double subspace_error(const BasisMatrix& p_hat, const BasisMatrix& p) {
  if (p_hat.n() != p.n()) throw std::invalid_argument("subspace_error: dimension mismatch");
  if (p.empty()) return 0.0;
  return std::min(1.0, spectral_norm(project_out(p_hat, p.data())));
}

Mat restrict_rows(const Mat& m, const IndexSet& t) {
  Mat out(static_cast<Index>(t.size()), m.cols());
  for (std::size_t i = 0; i < t.size(); ++i) out.row(static_cast<Index>(i)) = m.row(t[i]);
  return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(acc);
}

namespace {

double largest_sq_singular(const Mat& rows) {
  Mat g = rows.rows() <= rows.cols() ? Mat(rows * rows.transpose())
                                     : Mat(rows.transpose() * rows);
  if (g.rows() == 1) return g(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

DensenessReport denseness_coeff(const Mat& b, Index s, DensenessMode mode, std::uint64_t cap) {
  if (s < 0) throw std::invalid_argument("denseness_coeff: s must be >= 0");
  BasisMatrix q = orthonormalize(b);
  if (q.empty()) throw std::invalid_argument("denseness_coeff: B must be nonzero");
  const Index n = q.n();
  s = std::min(s, n);

  DensenessReport rep;
  rep.s = s;
  rep.mode = mode;
  if (s == 0) return rep;

  if (mode == DensenessMode::loose) {
    rep.kappa = static_cast<double>(s) * q.data().rowwise().norm().maxCoeff();
    rep.subsets_evaluated = 0;
    return rep;
  }

  const std::uint64_t count = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s));
  if (count > cap) {
    throw std::invalid_argument("denseness_coeff: C(" + std::to_string(n) + "," +
                                std::to_string(s) + ") subsets exceed the enumeration cap; use loose mode");
  }

  std::vector<Index> idx(static_cast<std::size_t>(s));
  std::iota(idx.begin(), idx.end(), Index{0});
  Mat rows(s, q.r());
  double best = 0.0;
  std::uint64_t evaluated = 0;
  while (true) {
    for (Index i = 0; i < s; ++i) rows.row(i) = q.data().row(idx[static_cast<std::size_t>(i)]);
    best = std::max(best, largest_sq_singular(rows));
    ++evaluated;
    Index i = s - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - s + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (Index k = i + 1; k < s; ++k) {
      idx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k - 1)] + 1;
    }
  }
  rep.kappa = std::min(1.0, std::sqrt(std::max(0.0, best)));
  rep.subsets_evaluated = evaluated;
  return rep;
}

double ric_projector(const BasisMatrix& p, Index s, std::uint64_t cap) {
  if (p.empty() || s == 0) return 0.0;
  const double k = denseness_coeff(p.data(), s, DensenessMode::exact, cap).kappa;
  return k * k;
}

ThinSvd thin_svd(const Mat& m) {
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return ThinSvd{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace reprocs
