#include "reprocs/signal_model.hpp"

#include "rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace reprocs {

namespace {

constexpr int kBurnIn = 200;

void append_number(std::string& out, double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  out.append(buf, res.ptr);
}

void write_matrix_csv(const Mat& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  std::string line;
  for (Index t = 0; t < m.cols(); ++t) {
    line.clear();
    line += std::to_string(t);
    for (Index i = 0; i < m.rows(); ++i) {
      line += ',';
      append_number(line, m(i, t));
    }
    line += '\n';
    os << line;
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace

double max_lambda_plus(double b, double gamma_star) {
  return (1.0 - b) * gamma_star * gamma_star / (3.0 * (1.0 + b));
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("model config: " + what); };
  if (n < 1) fail("n must be >= 1");
  if (r0 < 0 || c < 0 || J < 0) fail("r0, c, J must be >= 0");
  if (r0 + J * c > n) fail("r0 + J*c must not exceed n");
  if (static_cast<Index>(t_change.size()) != J) fail("t_change must list exactly J change times");
  for (std::size_t i = 1; i < t_change.size(); ++i) {
    if (t_change[i] <= t_change[i - 1]) fail("t_change must be strictly increasing");
  }
  if (t_train < 0 || total_T < t_train) fail("need 0 <= t_train <= total_T");
  if (!t_change.empty() && (t_change.front() < t_train || t_change.back() >= total_T)) {
    fail("change times must lie in [t_train, total_T)");
  }
  if (!(b >= 0.0 && b < 1.0)) fail("b must lie in [0,1)");
  if (!(gamma_star > 0.0) || !(gamma_new > 0.0)) fail("gamma_star and gamma_new must be > 0");
  if (!(v > 1.0)) fail("v must be > 1");
  if (!(lambda_minus > 0.0 && lambda_minus <= lambda_plus)) fail("need 0 < lambda_minus <= lambda_plus");
  if (lambda_plus > max_lambda_plus(b, gamma_star) * (1.0 + 1e-12)) {
    fail("lambda_plus too large: uniform innovations would exceed (1-b)*gamma_star");
  }
  if (s < 0 || s > n) fail("s must lie in [0, n]");
  if (!(S_min > 0.0 && S_min <= S_max)) fail("need 0 < S_min <= S_max");
  if (support_dwell < 1) fail("support_dwell must be >= 1");
  if (gamma_interval < 1) fail("gamma_interval must be >= 1");
}

double gamma_new_k(Index k, double v, double gamma_new, double gamma_star) {
  if (k < 1) throw std::invalid_argument("gamma_new_k: k must be >= 1");
  return std::min(std::pow(v, static_cast<double>(k - 1)) * gamma_new, gamma_star);
}

GroundTruth gen_model(const ModelConfig& cfg) {
  cfg.validate();
  detail::Rng rng(cfg.seed);
  const Index n = cfg.n;
  const Index T = cfg.total_T;

  GroundTruth gt;
  {
    Mat g(n, cfg.r0);
    for (Index j = 0; j < g.cols(); ++j)
      for (Index i = 0; i < n; ++i) g(i, j) = rng.gaussian();
    BasisMatrix p0 = orthonormalize(g);
    if (p0.r() != cfg.r0) throw std::runtime_error("gen_model: rank-deficient P_0 draw");
    gt.P.push_back(std::move(p0));
  }
  for (Index j = 1; j <= cfg.J; ++j) {
    const BasisMatrix& prev = gt.P.back();
    Mat g(n, prev.r() + cfg.c);
    g.leftCols(prev.r()) = prev.data();
    for (Index col = prev.r(); col < g.cols(); ++col)
      for (Index i = 0; i < n; ++i) g(i, col) = rng.gaussian();
    BasisMatrix joint = orthonormalize(g);
    if (joint.r() != prev.r() + cfg.c) throw std::runtime_error("gen_model: rank-deficient P_new draw");
    Mat q(n, joint.r());
    q << prev.data(), joint.data().rightCols(cfg.c);
    gt.P.emplace_back(std::move(q));
  }

  // Innovation spreads of the initial directions: variances (1-b^2) lambda
  // at the two ends, spreads interpolated linearly in between.
  const double hi = std::sqrt(3.0 * (1.0 - cfg.b * cfg.b) * cfg.lambda_plus);
  const double lo = std::sqrt(3.0 * (1.0 - cfg.b * cfg.b) * cfg.lambda_minus);
  Vec spread0(cfg.r0);
  for (Index i = 0; i < cfg.r0; ++i) {
    spread0(i) = cfg.r0 == 1 ? hi : hi + (lo - hi) * static_cast<double>(i) / static_cast<double>(cfg.r0 - 1);
  }
  const double cap = (1.0 - cfg.b) * cfg.gamma_star;
  spread0 = spread0.cwiseMin(cap);

  const Index r_max = cfg.r0 + cfg.J * cfg.c;
  Vec a_full = Vec::Zero(r_max);
  for (int it = 0; it < kBurnIn; ++it) {
    for (Index i = 0; i < cfg.r0; ++i) a_full(i) = cfg.b * a_full(i) + rng.uniform(-spread0(i), spread0(i));
  }

  // Initial support: s distinct indices by a partial Fisher-Yates shuffle.
  IndexSet base(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) base[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < cfg.s; ++i) {
    const Index pick = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(base[static_cast<std::size_t>(i)], base[static_cast<std::size_t>(pick)]);
  }
  base.resize(static_cast<std::size_t>(cfg.s));

  gt.S = Mat::Zero(n, T);
  gt.L = Mat::Zero(n, T);
  gt.phase.assign(static_cast<std::size_t>(T), 0);
  gt.a.resize(static_cast<std::size_t>(T));
  gt.nu.resize(static_cast<std::size_t>(T));
  gt.support.resize(static_cast<std::size_t>(T));

  Index phase = 0;
  for (Index t = 0; t < T; ++t) {
    while (phase < cfg.J && cfg.t_change[static_cast<std::size_t>(phase)] <= t) ++phase;
    const Index r_t = cfg.r0 + phase * cfg.c;
    Vec nu(r_t);
    for (Index i = 0; i < cfg.r0; ++i) nu(i) = rng.uniform(-spread0(i), spread0(i));
    for (Index j = 1; j <= phase; ++j) {
      const Index tj = cfg.t_change[static_cast<std::size_t>(j - 1)];
      const Index k = (t - tj) / cfg.gamma_interval + 1;
      const double h = (1.0 - cfg.b) * gamma_new_k(k, cfg.v, cfg.gamma_new, cfg.gamma_star);
      for (Index i = 0; i < cfg.c; ++i) nu(cfg.r0 + (j - 1) * cfg.c + i) = rng.uniform(-h, h);
    }
    a_full.head(r_t) = cfg.b * a_full.head(r_t) + nu;

    const auto ts = static_cast<std::size_t>(t);
    gt.phase[ts] = phase;
    gt.nu[ts] = nu;
    gt.a[ts] = a_full.head(r_t);
    gt.L.col(t) = gt.P[static_cast<std::size_t>(phase)].data() * gt.a[ts];

    if (t >= cfg.t_train && cfg.s > 0) {
      const Index shift = (t - cfg.t_train) / cfg.support_dwell;
      IndexSet supp;
      supp.reserve(static_cast<std::size_t>(cfg.s));
      for (Index i : base) supp.push_back((i + shift) % n);
      std::sort(supp.begin(), supp.end());
      for (Index i : supp) {
        const double mag = rng.uniform(cfg.S_min, cfg.S_max);
        gt.S(i, t) = rng.sign() * mag;
      }
      gt.support[ts] = std::move(supp);
    }
  }
  gt.M = gt.L + gt.S;
  return gt;
}

void write_dump(const GroundTruth& truth, const std::string& dir) {
  write_matrix_csv(truth.M, dir + "/M.csv");
  write_matrix_csv(truth.L, dir + "/L.csv");
  write_matrix_csv(truth.S, dir + "/S.csv");
  const std::string path = dir + "/supports.csv";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t t = 0; t < truth.support.size(); ++t) {
    os << t << ',';
    for (std::size_t i = 0; i < truth.support[t].size(); ++i) {
      if (i) os << ';';
      os << truth.support[t][i];
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace reprocs
