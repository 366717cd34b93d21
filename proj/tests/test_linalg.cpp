#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "properties.hpp"

#include "reprocs/linalg.hpp"

#include <cmath>
#include <random>

using namespace reprocs;

namespace {

Vec unit(Index n, Index i) {
  Vec v = Vec::Zero(n);
  v(i) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("basis matrix validates orthonormality") {
  Mat q = Mat::Identity(4, 2);
  BasisMatrix b(q);
  CHECK(b.n() == 4);
  CHECK(b.r() == 2);
  CHECK(b.orthonormality_defect() == 0.0);
  q(0, 1) = 0.1;
  CHECK_THROWS_AS(BasisMatrix{q}, std::invalid_argument);
  CHECK(BasisMatrix(5).empty());
  CHECK(BasisMatrix(5).n() == 5);
}

TEST_CASE("hcat requires orthogonal blocks") {
  BasisMatrix a(Mat(unit(3, 0)));
  BasisMatrix b(Mat(unit(3, 2)));
  CHECK(hcat(a, b).r() == 2);
  CHECK_THROWS(hcat(a, a));
  CHECK(hcat(BasisMatrix(3), b).r() == 1);
}

TEST_CASE("orthonormalize") {
  std::mt19937_64 rng(11);
  SUBCASE("orthonormal input keeps its span") {
    const Mat m = oracle::random_orthonormal(rng, 5, 2);
    const BasisMatrix q = orthonormalize(m);
    CHECK(q.r() == 2);
    CHECK(oracle::svd_norm(q.data() * q.data().transpose() - m * m.transpose()) <= 1e-10);
  }
  SUBCASE("collinear columns collapse") {
    const Vec v = oracle::gaussian_vec(rng, 6);
    Mat m(6, 2);
    m << v, 2.0 * v;
    CHECK(orthonormalize(m).r() == 1);
  }
  SUBCASE("random 8x3 against a dense SVD") {
    const Mat m = oracle::gaussian(rng, 8, 3);
    const BasisMatrix q = orthonormalize(m);
    CHECK(q.r() == 3);
    CHECK((q.data().transpose() * q.data() - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
    const Mat resid = m - q.data() * (q.data().transpose() * m);
    CHECK(oracle::svd_norm(resid) <= 1e-8 * oracle::svd_norm(m));
  }
  SUBCASE("zero matrix gives the empty basis") { CHECK(orthonormalize(Mat::Zero(4, 2)).empty()); }
}

TEST_CASE("top_r_evd") {
  SUBCASE("diagonal") {
    Mat a = Vec(Eigen::Vector3d(3, 2, 1)).asDiagonal();
    const SymEig e = top_r_evd(a, 2);
    CHECK(e.values(0) == doctest::Approx(3.0));
    CHECK(e.values(1) == doctest::Approx(2.0));
    BasisMatrix ref(Mat(Mat::Identity(3, 2)));
    CHECK(subspace_error(e.vectors, ref) <= 1e-12);
  }
  SUBCASE("r = 0") {
    const SymEig e = top_r_evd(Mat::Identity(3, 3), 0);
    CHECK(e.vectors.empty());
    CHECK(e.values.size() == 0);
  }
  SUBCASE("constructed low-rank instance") {
    std::mt19937_64 rng(5);
    const BasisMatrix p = oracle::random_basis(rng, 10, 3);
    const Mat a = p.data() * Vec(Eigen::Vector3d(5, 4, 3)).asDiagonal() * p.data().transpose();
    const SymEig e = top_r_evd(0.5 * (a + a.transpose()), 3);
    CHECK(subspace_error(e.vectors, p) <= 1e-8);
    CHECK(e.values(0) == doctest::Approx(5.0).epsilon(1e-10));
  }
  SUBCASE("sign convention") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 1.0;
    const SymEig e = top_r_evd(a, 2);
    CHECK(e.vectors.data()(0, 0) > 0);
    CHECK(e.vectors.data()(1, 1) > 0);
  }
  SUBCASE("asymmetric input is rejected") {
    Mat a = Mat::Identity(3, 3);
    a(0, 1) = 0.5;
    CHECK_THROWS_WITH(top_r_evd(a, 1), "not Hermitian");
  }
}

TEST_CASE("subspace_error") {
  std::mt19937_64 rng(7);
  const BasisMatrix p = oracle::random_basis(rng, 6, 2);
  CHECK(subspace_error(p, p) <= 1e-12);
  CHECK(subspace_error(BasisMatrix(Mat(unit(2, 0))), BasisMatrix(Mat(unit(2, 1)))) == doctest::Approx(1.0));
  const BasisMatrix ph = oracle::random_basis(rng, 6, 2);
  const Mat I = Mat::Identity(6, 6);
  const double se = subspace_error(ph, p);
  CHECK(se == doctest::Approx(oracle::svd_norm((I - ph.data() * ph.data().transpose()) * p.data() * p.data().transpose())).epsilon(1e-10));
  CHECK(se == doctest::Approx(oracle::svd_norm((I - p.data() * p.data().transpose()) * ph.data() * ph.data().transpose())).epsilon(1e-10));
  CHECK(subspace_error(ph, BasisMatrix(6)) == 0.0);
}

TEST_CASE("denseness_coeff") {
  SUBCASE("sparse vector") {
    CHECK(denseness_coeff(Mat(unit(10, 3)), 1, DensenessMode::exact).kappa == doctest::Approx(1.0));
  }
  SUBCASE("maximally dense vector") {
    const Mat b = Vec::Constant(4, 0.5);
    CHECK(denseness_coeff(b, 2, DensenessMode::exact).kappa == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  }
  SUBCASE("random 8x2 against per-subset oracle") {
    std::mt19937_64 rng(3);
    const Mat b = oracle::gaussian(rng, 8, 2);
    const DensenessReport rep = denseness_coeff(b, 2, DensenessMode::exact);
    CHECK(rep.subsets_evaluated == 28);
    CHECK(rep.kappa == doctest::Approx(oracle::brute_kappa(b, 2)).epsilon(1e-12));
  }
  SUBCASE("loose mode bounds the exact value") {
    std::mt19937_64 rng(4);
    const Mat b = oracle::gaussian(rng, 9, 2);
    for (Index s = 1; s <= 4; ++s) {
      CHECK(denseness_coeff(b, s, DensenessMode::loose).kappa >= denseness_coeff(b, s, DensenessMode::exact).kappa - 1e-12);
    }
  }
  SUBCASE("nondecreasing in s") {
    std::mt19937_64 rng(8);
    const Mat b = oracle::gaussian(rng, 9, 3);
    double prev = 0.0;
    for (Index s = 1; s <= 9; ++s) {
      const double k = denseness_coeff(b, s, DensenessMode::exact).kappa;
      CHECK(k >= prev - 1e-12);
      prev = k;
    }
    CHECK(prev == doctest::Approx(1.0));
  }
  SUBCASE("enumeration cap") {
    CHECK_THROWS_AS(denseness_coeff(Mat::Ones(60, 1), 10, DensenessMode::exact), std::invalid_argument);
    CHECK_NOTHROW(denseness_coeff(Mat::Ones(60, 1), 10, DensenessMode::loose));
  }
}

TEST_CASE("ric_projector") {
  CHECK(ric_projector(BasisMatrix(Mat(unit(4, 0))), 1) == doctest::Approx(1.0));
  CHECK(ric_projector(BasisMatrix(Mat(Vec::Constant(4, 0.5))), 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ric_projector(BasisMatrix(4), 2) == 0.0);
  std::mt19937_64 rng(9);
  const BasisMatrix p = oracle::random_basis(rng, 8, 2);
  CHECK(ric_projector(p, 2) == doctest::Approx(oracle::brute_ric(oracle::projector_complement(p.data()), 2)).epsilon(1e-10));
}

TEST_CASE("spectral_norm") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -5.0;
  CHECK(spectral_norm(d) == doctest::Approx(5.0));
  std::mt19937_64 rng(12);
  const Vec u = oracle::gaussian_vec(rng, 5);
  const Vec v = oracle::gaussian_vec(rng, 4);
  CHECK(spectral_norm(u * v.transpose()) == doctest::Approx(u.norm() * v.norm()).epsilon(1e-12));
  const Mat m = oracle::gaussian(rng, 12, 7);
  Mat dil = Mat::Zero(19, 19);
  dil.topRightCorner(12, 7) = m;
  dil.bottomLeftCorner(7, 12) = m.transpose();
  const double ref = oracle::eigenvalues_desc(dil)(0);
  CHECK(std::abs(spectral_norm(m) - ref) <= 1e-9 * ref);
  CHECK(spectral_norm(Mat(0, 3)) == 0.0);
}

TEST_CASE("binomial saturates") {
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(64, 4) == 635376);
  CHECK(binomial(3, 5) == 0);
  CHECK(binomial(200, 100) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("property suites") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 50; ++i) {
    CHECK(props::basis_switch(rng) <= 0.0);
    CHECK(props::weyl(rng) <= 0.0);
    CHECK(props::ostrowski(rng) <= 0.0);
    CHECK(props::sin_theta(rng) <= 0.0);
    CHECK(props::ric_identity(rng) <= 0.0);
  }
}
