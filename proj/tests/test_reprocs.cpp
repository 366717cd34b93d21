#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "reprocs/reprocs.hpp"
#include "reprocs/signal_model.hpp"

#include <random>

using namespace reprocs;

namespace {

ModelConfig stream_config() {
  ModelConfig c;
  c.n = 60;
  c.r0 = 4;
  c.c = 1;
  c.J = 1;
  c.t_change = {100};
  c.t_train = 40;
  c.total_T = 200;
  c.s = 3;
  c.gamma_interval = 20;
  c.seed = 17;
  return c;
}

ReprocsParams stream_params(const ModelConfig& c) {
  ReprocsParams p;
  p.xi = 0.1;
  p.omega = 1.0;
  p.alpha = 20;
  p.K = 3;
  p.t_change = c.t_change;
  p.r0 = c.r0;
  p.c = c.c;
  p.b = c.b;
  return p;
}

}  // namespace

TEST_CASE("proj_pca") {
  std::mt19937_64 rng(1);
  SUBCASE("empty P is ordinary PCA") {
    const Mat d = oracle::gaussian(rng, 8, 30);
    const BasisMatrix q = proj_pca(d, BasisMatrix(8), 2);
    Eigen::JacobiSVD<Mat> svd(d, Eigen::ComputeThinU);
    const BasisMatrix ref(Mat(svd.matrixU().leftCols(2)), 1e-9);
    CHECK(subspace_error(q, ref) <= 1e-8);
  }
  SUBCASE("data inside Span(P) has nothing left") {
    const BasisMatrix p = oracle::random_basis(rng, 8, 2);
    const Mat d = p.data() * oracle::gaussian(rng, 2, 10);
    CHECK_THROWS_AS(proj_pca(d, p, 1), std::runtime_error);
  }
  SUBCASE("recovers the new directions") {
    const Mat joint = oracle::random_orthonormal(rng, 20, 5);
    const BasisMatrix p(Mat(joint.leftCols(3)), 1e-9);
    const BasisMatrix p_new(Mat(joint.rightCols(2)), 1e-9);
    Mat d = p.data() * oracle::gaussian(rng, 3, 50) + p_new.data() * oracle::gaussian(rng, 2, 50);
    d += 1e-9 * oracle::gaussian(rng, 20, 50);
    const BasisMatrix q = proj_pca(d, p, 2);
    CHECK(subspace_error(q, p_new) <= 1e-6);
    CHECK((q.data().transpose() * p.data()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("init") {
  std::mt19937_64 rng(2);
  SUBCASE("noiseless training") {
    const BasisMatrix p0 = oracle::random_basis(rng, 15, 3);
    const Mat train = p0.data() * oracle::gaussian(rng, 3, 40);
    const ReprocsState st = init(train, 3);
    CHECK(subspace_error(st.P_hat_star, p0) <= 1e-8);
    CHECK(st.t == 39);
    CHECK(st.P_hat_new.empty());
  }
  SUBCASE("r0 = 0") {
    const ReprocsState st = init(oracle::gaussian(rng, 6, 5), 0);
    CHECK(st.P_hat_star.empty());
    CHECK(st.current_basis().n() == 6);
  }
  SUBCASE("default stream training") {
    const ModelConfig c;
    const GroundTruth gt = gen_model(c);
    const ReprocsState st = init(gt.M.leftCols(c.t_train), c.r0);
    CHECK(st.P_hat_star.r() == c.r0);
    CHECK(subspace_error(st.P_hat_star, gt.P[0]) < 1.0);
  }
}

TEST_CASE("params validation") {
  ReprocsParams p;
  p.t_change = {100, 300};
  CHECK_NOTHROW(p.validate());
  CHECK(p.warnings().empty());
  p.K = 10;
  CHECK(p.warnings().size() == 1);
  auto bad = p;
  bad.alpha = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.xi = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.t_change = {5, 5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("outlier-free frame with exact basis") {
  std::mt19937_64 rng(3);
  const BasisMatrix p0 = oracle::random_basis(rng, 20, 3);
  ReprocsState st;
  st.P_hat_star = p0;
  st.P_hat_new = BasisMatrix(20);
  st.t = 0;
  ReprocsParams prm;
  prm.r0 = 3;
  const Vec m = p0.data() * oracle::gaussian_vec(rng, 3);
  const FrameEstimate fe = process_frame(st, m, 1, prm);
  CHECK(fe.y.norm() <= 1e-12);
  CHECK(fe.S_cs.isZero(0.0));
  CHECK(fe.T_hat.empty());
  CHECK(fe.S_hat.isZero(0.0));
  CHECK(fe.L_hat == m);
  CHECK_THROWS_AS(process_frame(st, m, 1, prm), std::invalid_argument);
}

TEST_CASE("update schedule and merge") {
  const ModelConfig c = stream_config();
  const GroundTruth gt = gen_model(c);
  const ReprocsParams prm = stream_params(c);
  ReprocsState st = init(gt.M.leftCols(c.t_train), c.r0);
  std::vector<Index> updates, merges;
  double se_before = 1.0;
  for (Index t = c.t_train; t < c.total_T; ++t) {
    const FrameEstimate fe = process_frame(st, gt.M.col(t), t, prm);
    if (fe.updated) {
      updates.push_back(t);
      if (!st.P_hat_new.empty()) CHECK((st.P_hat_new.data().transpose() * st.P_hat_star.data()).cwiseAbs().maxCoeff() <= 1e-8);
    }
    if (fe.merged) {
      merges.push_back(t);
      CHECK(st.P_hat_star.r() == c.r0 + c.c);
      CHECK(st.P_hat_new.empty());
    }
    if (t == 100) CHECK(subspace_error(fe.basis, gt.P[1]) > 0.9);
    if (fe.updated) {
      const double se = subspace_error(st.current_basis(), gt.P[1]);
      CHECK(se <= se_before);
      se_before = se;
    }
  }
  CHECK(updates == std::vector<Index>{119, 139, 159});
  CHECK(merges == std::vector<Index>{159});
  CHECK(st.j == 2);
  CHECK(se_before < 0.1);
}

TEST_CASE("pure and in-place steps agree bit for bit") {
  const ModelConfig c = stream_config();
  const GroundTruth gt = gen_model(c);
  ReprocsParams prm = stream_params(c);
  prm.ar_whitening = true;
  ReprocsState a = init(gt.M.leftCols(c.t_train), c.r0);
  ReprocsState b = a;
  for (Index t = c.t_train; t < c.total_T; ++t) {
    const FrameEstimate fa = process_frame(a, gt.M.col(t), t, prm);
    auto [fb, nb] = process_frame(static_cast<const ReprocsState&>(b), gt.M.col(t), t, prm);
    b = std::move(nb);
    CHECK(fa.S_hat == fb.S_hat);
    CHECK(fa.T_hat == fb.T_hat);
  }
  CHECK(a.P_hat_star.data() == b.P_hat_star.data());
}
