#include "reprocs/theory_bounds.hpp"

#include "reprocs/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace reprocs {

namespace {

struct PlugIns {
  double z;   // zeta_*^+
  double F;   // zeta_*^+ f
  double R;   // zeta_*^+ r f
  double cz;  // c zeta
};

PlugIns resolve(const BoundParams& p) {
  const double zs = p.zeta_star_plus.value_or(static_cast<double>(p.r) * p.zeta);
  return PlugIns{
      zs,
      p.zeta_star_f.value_or(zs * p.f),
      p.zeta_star_rf.value_or(zs * static_cast<double>(p.r) * p.f),
      p.c_zeta.value_or(static_cast<double>(p.c) * p.zeta),
  };
}

// b^2 (1 - b^{2 alpha}) / (1 - b^2)
double ar_gain(double b, double alpha) {
  const double b2 = b * b;
  const double tail = std::isinf(alpha) ? 0.0 : std::pow(b2, alpha);
  return b2 * (1.0 - tail) / (1.0 - b2);
}

}  // namespace

void BoundParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("BoundParams: " + what); };
  if (!(b >= 0.0 && b < 1.0)) fail("b must lie in [0,1)");
  if (!(zeta > 0.0)) fail("zeta must be > 0");
  if (!(f >= 1.0)) fail("f must be >= 1");
  if (!(g >= 1.0)) fail("g must be >= 1");
  if (!(eta > 0.0)) fail("eta must be > 0");
  for (double k : {kappa_2s_star, kappa_2s_new, kappa_s, kappa_tilde_2s}) {
    if (!(k > 0.0 && k < 1.0)) fail("kappa bounds must lie in (0,1)");
  }
  if (!(phi_plus >= 1.0) || !(phi0_plus >= 1.0)) fail("phi bounds must be >= 1");
  if (!(alpha >= 1.0)) fail("alpha must be >= 1");
  if (r < 1 || c < 0 || J < 1) fail("r >= 1, c >= 0, J >= 1 required");
}

BoundParams theorem_constants() {
  BoundParams p;
  p.b = 0.4;
  p.eta = 1.7;
  p.g = std::sqrt(2.0);
  p.kappa_s = 0.15;
  p.phi_plus = 1.1735;
  p.phi0_plus = 1.1111;
  p.alpha = kInfiniteAlpha;
  p.zeta_star_plus = 1e-4;
  p.zeta_star_f = 1.5e-4;
  p.zeta_star_rf = 1.5e-4;
  p.c_zeta = 1e-4;
  return p;
}

int k_of_zeta(int c, double zeta) {
  const double arg = 0.85 * static_cast<double>(c) * zeta;
  if (!(arg > 0.0)) throw std::invalid_argument("k_of_zeta: 0.85 c zeta must be > 0");
  if (arg >= 1.0) throw std::invalid_argument("k_of_zeta: 0.85 c zeta must be < 1");
  const double q = std::log(arg) / std::log(0.6);
  const double nearest = std::round(q);
  if (nearest >= 1.0 && std::abs(q - nearest) <= 1e-9 * nearest) return static_cast<int>(nearest);
  return static_cast<int>(std::ceil(q));
}

double xi0(double c, double r, double zeta, double gamma_new) {
  return std::sqrt(c) * gamma_new + std::sqrt(zeta) * (std::sqrt(r) + std::sqrt(c));
}

double alpha_add(int K, int J, int n, double zeta, double lambda_minus,
                        double gamma_new, double gamma_star) {
  if (K <= 0 || J <= 0 || n <= 0 || !(zeta > 0) || !(lambda_minus > 0) || !(gamma_new > 0) ||
      !(gamma_star > 0)) {
    throw std::invalid_argument("alpha_add: inputs must be positive");
  }
  using LD = long double;
  const LD logs = std::log(61.0L * K * J) + 11.0L * std::log(static_cast<LD>(n));
  const LD gn4 = std::pow(1.2L, 4.0L * K) * std::pow(static_cast<LD>(gamma_new), 4.0L);
  const LD gs4 = std::pow(static_cast<LD>(gamma_star), 4.0L);
  const LD z = zeta;
  const LD lm = lambda_minus;
  const LD value = logs * 8.0L * 192.0L * 192.0L * std::min(gn4, gs4) / (z * z * lm * lm);
  const double up = static_cast<double>(std::ceil(value));
  if (!std::isfinite(up)) throw std::overflow_error("alpha_add: result is not representable");
  return up;
}

ZetaStep zeta_step(const BoundParams& p, double x, double phi, bool first_step) {
  const PlugIns q = resolve(p);
  const double z = q.z, F = q.F, R = q.R, cz = q.cz;
  const double kap = p.kappa_s;
  const double g = p.g;
  const double B = ar_gain(p.b, p.alpha);
  const double Bn = B * p.eta;
  const double s = std::sqrt(1.0 - z * z);
  const double phi2 = phi * phi;

  double atten = 0.0;
  if (p.ak_variant == AkVariant::hundred) {
    atten = B / 100.0;
  } else if (!std::isinf(p.alpha)) {
    atten = B / p.alpha;
  }

  ZetaStep st;
  st.b_A = (1.0 - z * z) * (1.0 - atten) - 2.0 * B * R * p.eta;
  st.b_A_perp = z * F + 2.0 * B * z * R * p.eta;

  double h = 0.0;
  h += phi2 * z * F;
  h += phi2 * kap * kap * x * x * g;
  h += 2.0 * Bn * R * x * kap * phi2;
  h += Bn * R * phi2 * z;
  if (!first_step) h += Bn * g * phi2 * kap * kap * x * x;
  h += 2.0 * phi * kap * (z / s) * (F + Bn * R);
  h += 2.0 * phi * std::max(0.15 * cz, x) * kap * kap / s * g * (1.0 + Bn);
  h += 4.0 * Bn * R * phi * kap / s;
  h += (1.0 + phi) * (1.0 + phi * kap / s) * z * F * (1.0 + Bn);
  h += x * phi * kap * g * (first_step ? 1.0 : (1.0 + Bn));
  h += Bn * R * ((1.0 + phi) * (1.0 + kap * kap * x * phi / s) + phi * kap * x * (1.0 + phi * kap / s));
  st.b_H = h;

  st.denominator = st.b_A - st.b_A_perp - st.b_H - 0.25 * cz;
  if (!(st.denominator > 0.0)) {
    throw std::runtime_error("zeta recursion: denominator b_A - b_A_perp - b_H - 0.25 c zeta <= 0");
  }
  st.value = (st.b_H + 0.125 * cz) / st.denominator;
  return st;
}

ZetaSequence zeta_plus_seq(const BoundParams& p, int K) {
  p.validate();
  if (K < 0) throw std::invalid_argument("zeta_plus_seq: K must be >= 0");
  const double cz = resolve(p).cz;
  ZetaSequence seq;
  seq.values.push_back(1.0);
  for (int k = 1; k <= K; ++k) {
    const bool first = (k == 1);
    const ZetaStep st = zeta_step(p, seq.values.back(), first ? p.phi0_plus : p.phi_plus, first);
    seq.values.push_back(st.value);
    seq.b_Ak.push_back(st.b_A);
    seq.b_Ak_perp.push_back(st.b_A_perp);
    seq.b_H.push_back(st.b_H);
  }
  for (int k = 0; k <= K; ++k) {
    if (seq.values[k] > std::pow(0.6, k) + 0.15 * cz) seq.envelope_ok = false;
    if (k >= 3 && seq.values[k] > seq.values[k - 1]) seq.monotone_from_3 = false;
  }
  return seq;
}

RicPhiBounds ric_phi_bounds(const BoundParams& p, double zeta_star_plus, double zeta_km1_plus) {
  if (zeta_star_plus < 0 || zeta_km1_plus < 0) {
    throw std::invalid_argument("ric_phi_bounds: zeta values must be >= 0");
  }
  RicPhiBounds out;
  out.delta2s_phi0_bound = p.kappa_2s_star * p.kappa_2s_star + 2.0 * zeta_star_plus;
  const double add = p.kappa_2s_new + p.kappa_tilde_2s * zeta_km1_plus + zeta_star_plus;
  out.delta2s_phik_bound = out.delta2s_phi0_bound + add * add;
  if (out.delta2s_phik_bound >= 1.0) throw std::runtime_error("RIC bound vacuous");
  out.phi_bound = 1.0 / (1.0 - out.delta2s_phik_bound);
  return out;
}

double zeta_cap(int r0, int J, int c, double gamma_star, double f) {
  const double r = static_cast<double>(r0 + (J - 1) * c);
  if (!(r > 0)) throw std::invalid_argument("zeta_cap: r0 + (J-1)c must be > 0");
  return std::min({1e-4 / (r * r), 1.5e-4 / (r * r * f), 1.0 / (r * r * r * gamma_star * gamma_star)});
}

std::vector<FactItem> fact_constants(const FactInputs& in) {
  const double cap = zeta_cap(in.r0, in.J, in.c, in.gamma_star, in.f);
  // Relative slack so that a zeta set exactly at the cap is accepted.
  if (!(in.zeta > 0) || in.zeta > cap * (1.0 + 1e-12)) {
    throw std::invalid_argument("fact_constants: zeta violates the cap min(1e-4/r^2, 1.5e-4/(r^2 f), 1/(r^3 gamma_*^2))");
  }
  const double r = static_cast<double>(in.r0 + (in.J - 1) * in.c);
  const double zeta = in.zeta;
  const double zs = r * zeta;
  const double sz = std::sqrt(zeta);
  const double gs = in.gamma_star;
  const double cz = static_cast<double>(in.c) * zeta;

  std::vector<FactItem> items;
  auto add = [&](int idx, double lhs, double rhs) {
    // Rounding slack for items that hold with equality at the cap.
    items.push_back(FactItem{idx, lhs, rhs, lhs <= rhs * (1.0 + 1e-12)});
  };
  add(1, zeta * gs, sz / std::pow(r, 1.5));
  add(2, zs, 1e-4 / r);
  add(3, zs * gs * gs, 1.0 / (r * r));
  add(4, zs * gs, sz / std::sqrt(r));
  add(5, zs * in.f, 1.5e-4 / r);

  const int K = in.K > 0 ? in.K : k_of_zeta(in.c, zeta);
  BoundParams p = theorem_constants();
  p.zeta_star_plus.reset();
  p.zeta_star_f.reset();
  p.zeta_star_rf.reset();
  p.c_zeta.reset();
  p.r = in.r0 + (in.J - 1) * in.c;
  p.c = in.c;
  p.J = in.J;
  p.zeta = zeta;
  p.f = in.f;
  const ZetaSequence seq = zeta_plus_seq(p, K);

  FactItem i6{6, 0, 0, true}, i7{7, 0, 0, true}, i8{8, 0, 0, true};
  double worst6 = -1e300, worst7 = -1e300, worst8 = -1e300;
  for (int k = 1; k <= K; ++k) {
    const double zp = seq.values[static_cast<std::size_t>(k - 1)];
    const double gk = gamma_new_k(k, 1.2, in.gamma_new, gs);
    const double l6 = zp, r6 = std::pow(0.6, k - 1) + 0.15 * cz;
    const double l7 = zp * gk, r7 = std::pow(0.72, k - 1) * in.gamma_new + 0.15 * sz;
    const double l8 = zp * gk * gk, r8 = std::pow(0.864, k - 1) * in.gamma_new * in.gamma_new + 0.15;
    if (l6 - r6 > worst6) { worst6 = l6 - r6; i6.lhs = l6; i6.rhs = r6; }
    if (l7 - r7 > worst7) { worst7 = l7 - r7; i7.lhs = l7; i7.rhs = r7; }
    if (l8 - r8 > worst8) { worst8 = l8 - r8; i8.lhs = l8; i8.rhs = r8; }
  }
  i6.pass = worst6 <= 0;
  i7.pass = worst7 <= 0;
  i8.pass = worst8 <= 0;
  items.push_back(i6);
  items.push_back(i7);
  items.push_back(i8);
  return items;
}

}  // namespace reprocs
