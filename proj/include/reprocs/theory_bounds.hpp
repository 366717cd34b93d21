#pragma once

#include <limits>
#include <optional>
#include <vector>

namespace reprocs {

inline constexpr double kInfiniteAlpha = std::numeric_limits<double>::infinity();

/// Which denominator the attenuation factor of b_A uses.
enum class AkVariant { hundred, alpha };

/// Inputs of the zeta_k^+ recursion. Plug-in slots left unset are derived
/// from r, c, zeta, f: zeta_*^+ = r zeta, zeta_*^+ f, zeta_*^+ r f, c zeta.
struct BoundParams {
  int r = 1;
  int c = 1;
  int J = 1;
  double zeta = 1e-4;
  double b = 0.4;
  double f = 1.0;
  double g = 1.4142135623730951;
  double eta = 1.7;
  double gamma_star = 1.0;
  double gamma_new = 1.0;
  double v = 1.2;
  double lambda_minus = 1.0;
  double lambda_plus = 1.0;
  double lambda_new_minus = 1.0;
  double lambda_new_plus = 1.4142135623730951;
  double kappa_2s_star = 0.3;
  double kappa_2s_new = 0.15;
  double kappa_s = 0.15;
  double kappa_tilde_2s = 0.15;
  double phi_plus = 1.1735;
  double phi0_plus = 1.1111;
  double alpha = kInfiniteAlpha;
  AkVariant ak_variant = AkVariant::hundred;

  std::optional<double> zeta_star_plus;
  std::optional<double> zeta_star_f;
  std::optional<double> zeta_star_rf;
  std::optional<double> c_zeta;

  void validate() const;
};

/// The plug-in values that define f~_inc: zeta_*^+ = 1e-4, zeta_*^+ f =
/// zeta_*^+ r f = 1.5e-4, c zeta = 1e-4, kappa_s^+ = 0.15, b = 0.4,
/// alpha = infinity, eta = 1.7, g = sqrt(2).
BoundParams theorem_constants();

/// Terms of one recursion step, normalized by lambda_new,k^-.
struct ZetaStep {
  double b_A = 0.0;
  double b_A_perp = 0.0;
  double b_H = 0.0;
  double denominator = 0.0;
  double value = 0.0;
};

struct ZetaSequence {
  std::vector<double> values;  ///< zeta_0^+ .. zeta_K^+
  std::vector<double> b_Ak;
  std::vector<double> b_Ak_perp;
  std::vector<double> b_H;
  bool envelope_ok = true;  ///< zeta_k^+ <= 0.6^k + 0.15 c zeta for all k
  bool monotone_from_3 = true;
};

/// K(zeta) = ceil(log(0.85 c zeta) / log 0.6).
int k_of_zeta(int c, double zeta);

/// xi_0 = sqrt(c) gamma_new + sqrt(zeta) (sqrt(r) + sqrt(c)).
double xi0(double c, double r, double zeta, double gamma_new);

/// ceil((log 61KJ + 11 log n) 8 192^2 min(1.2^{4K} gamma_new^4, gamma_*^4) / (zeta^2 lambda_-^2)).
/// Exact below 2^53; larger counts are rounded to the nearest double.
double alpha_add(int K, int J, int n, double zeta, double lambda_minus,
                        double gamma_new, double gamma_star);

/// One step zeta_{k-1}^+ -> zeta_k^+ with the given phi. first_step selects
/// the b_H1 form used for k = 1.
ZetaStep zeta_step(const BoundParams& p, double zeta_prev, double phi, bool first_step);

ZetaSequence zeta_plus_seq(const BoundParams& p, int K);

struct RicPhiBounds {
  double delta2s_phi0_bound = 0.0;
  double delta2s_phik_bound = 0.0;
  double phi_bound = 0.0;
};

RicPhiBounds ric_phi_bounds(const BoundParams& p, double zeta_star_plus, double zeta_km1_plus);

struct FactItem {
  int index = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct FactInputs {
  int r0 = 1;
  int J = 1;
  int c = 1;
  double zeta = 1e-4;
  double gamma_star = 1.0;
  double f = 1.0;
  double gamma_new = 1.0;
  /// Number of steps for items 6-8; 0 means K(zeta).
  int K = 0;
};

/// min(1e-4/r^2, 1.5e-4/(r^2 f), 1/(r^3 gamma_*^2)) with r = r0 + (J-1)c.
double zeta_cap(int r0, int J, int c, double gamma_star, double f);

/// Items 1-5 are scalar checks; items 6-8 report the worst k over 1..K.
std::vector<FactItem> fact_constants(const FactInputs& in);

}  // namespace reprocs
