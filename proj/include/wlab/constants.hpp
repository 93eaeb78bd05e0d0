#pragma once

// Explicit ultracontractivity constants: the P and Q rate functions, the
// integrals I_{1..5} and J_{1..5} on both sides, k_1..k_6, and the derived
// kappa, gamma, C, C' (Hoelder case) and kappa, C_0, C_0' (Lipschitz case).

#include "wlab/grid.hpp"
#include "wlab/quadrature.hpp"
#include "wlab/varexp.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace wlab {

/// a = min(r^-, s^-), b, c = branch values of p_m, q_m in the rate P,
/// p, q = branch values of p_m, q_m in the S-functional sign, d1 = p_M^+,
/// d2 = q_M^+.
struct BranchInputs {
  double a = 2.0;
  double b = 2.0;
  double c = 2.0;
  double p = 4.0;
  double q = 4.0;
  double d1 = 4.0;
  double d2 = 4.0;

  void validate() const {
    const std::array<double, 7> all{a, b, c, p, q, d1, d2};
    for (double v : all) {
      if (!std::isfinite(v)) throw std::invalid_argument("branch inputs must be finite");
    }
    if (a < 2.0) throw std::invalid_argument("branch inputs: need a >= 2");
    if (!(p > 2.0) || !(q > 2.0)) throw std::invalid_argument("branch inputs: need p > 2 and q > 2");
    if (b < 2.0 || c < 2.0) throw std::invalid_argument("branch inputs: need b, c >= 2");
    if (d1 < p || d2 < q) throw std::invalid_argument("branch inputs: need d1 >= p and d2 >= q");
  }
  /// (b-2)p/(p-2) and (c-2)q/(q-2).
  double ep() const { return (b - 2.0) * p / (p - 2.0); }
  double eq() const { return (c - 2.0) * q / (q - 2.0); }
  double Lp(double x) const { return 1.0 - (p - 2.0) * x / (a + p - 2.0); }
  double Lq(double x) const { return 1.0 - (q - 2.0) * x / (a + q - 2.0); }
  bool lipschitz() const { return b == 2.0 && c == 2.0; }
};

/// Constants the analysis proves to exist without giving values.
struct UnknownConstants {
  double c_star_p = 1.0;  // frak C*_p
  double c_star_q = 1.0;  // frak C*_q
  double c_eps = 1.0;     // C'_eps
  double c_eps2 = 1.0;    // C''_eps'
  double kappa_p = 1.0;
  double kappa_q = 1.0;
  double G_p = 1.0;
  double G_q = 1.0;
  double C1 = 1.0;

  void validate() const {
    const std::array<double, 9> all{c_star_p, c_star_q, c_eps, c_eps2, kappa_p, kappa_q, G_p, G_q, C1};
    for (double v : all) {
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("unknown constants must be positive and finite");
    }
    if (kappa_p < 1.0 || kappa_q < 1.0) throw std::invalid_argument("unknown constants: need kappa_p, kappa_q >= 1");
  }
};

enum class Side { p, q };

inline const char* side_name(Side s) { return s == Side::p ? "p" : "q"; }

// ---------------------------------------------------------------- P and Q

inline void check_xi(double xi, double t) {
  if (!(t > 0.0)) throw std::domain_error("rate functions need t > 0");
  if (xi < 0.0 || !(xi < t)) throw std::domain_error("rate functions need 0 <= xi < t");
}

inline double eval_P(double xi, double t, const BranchInputs& in) {
  check_xi(xi, t);
  const double a = in.a, p = in.p, q = in.q;
  return (in.b - 2.0) * p / ((a + p - 2.0) * t - (p - 2.0) * xi) +
         (in.c - 2.0) * q / ((a + q - 2.0) * t - (q - 2.0) * xi);
}

/// Closed-form antiderivative of P on [0, xi].
inline double integral_P(double xi, double t, const BranchInputs& in) {
  check_xi(xi, t);
  const double a = in.a, p = in.p, q = in.q;
  return in.ep() * std::log((a + p - 2.0) * t / ((a + p - 2.0) * t - (p - 2.0) * xi)) +
         in.eq() * std::log((a + q - 2.0) * t / ((a + q - 2.0) * t - (q - 2.0) * xi));
}

inline double eval_Q(double xi, double t, const BranchInputs& in, const UnknownConstants& k) {
  check_xi(xi, t);
  const double a = in.a;
  auto side = [&](double r, double d, double cstar, double ceps, double kap) {
    const double D = (a + r - 2.0) * t - (r - 2.0) * xi;
    const double arg = cstar * std::pow(r, d - 1.0) * (a * t - xi) * std::pow(t - xi, d - 1.0) / (ceps * std::pow(D, d - 1.0));
    if (!(arg > 0.0)) throw std::domain_error("eval_Q: log argument must be positive");
    const double base = r * std::pow(a * t - xi, 1.0 / d) * std::pow(t - xi, (d - 1.0) / d) / D;
    return r / D * std::log(arg) - 2.0 * cstar * kap * std::pow(base, d);
  };
  return side(in.p, in.d1, k.c_star_p, k.c_eps, k.kappa_p) + side(in.q, in.d2, k.c_star_q, k.c_eps2, k.kappa_q);
}

// ------------------------------------------------------------- integrals

struct IntegralValue {
  double value = 0.0;
  double error = 0.0;   // adaptive Simpson error estimate
  double gauss = 0.0;   // independent Gauss-Legendre value
  double closed = std::numeric_limits<double>::quiet_NaN();  // closed form where one exists
  long evaluations = 0;

  double dual_gap() const { return std::abs(value - gauss); }
  bool has_closed() const { return !std::isnan(closed); }
};

inline std::function<double(double)> integrand_I(int index, Side side, const BranchInputs& in) {
  if (index < 1 || index > 5) throw std::out_of_range("integral index must be in 1..5");
  const double ep = in.ep(), eq = in.eq(), a = in.a;
  const double r = side == Side::p ? in.p : in.q;
  const double d = side == Side::p ? in.d1 : in.d2;
  // weight = Lp^{ep - dp} Lq^{eq - dq}
  double dp = side == Side::p ? 1.0 : 0.0;
  double dq = side == Side::q ? 1.0 : 0.0;
  if (index == 5) {
    dp = side == Side::p ? d : 0.0;
    dq = side == Side::q ? d : 0.0;
  }
  auto weight = [in, ep, eq, dp, dq](double x) { return std::pow(in.Lp(x), ep - dp) * std::pow(in.Lq(x), eq - dq); };
  switch (index) {
    case 1: return [weight](double x) { return weight(x); };
    case 2: return [weight](double x) { return weight(x) * std::log1p(-x); };
    case 3: return [weight, a, r](double x) { return weight(x) * std::log(a + (r - 2.0) * (1.0 - x)); };
    case 4: return [weight, a](double x) { return weight(x) * std::log(a - x); };
    default: return [weight, a, d](double x) { return (a - x) * std::pow(1.0 - x, d - 1.0) * weight(x); };
  }
}

inline std::function<double(double)> integrand_J(int index, Side side, const BranchInputs& in) {
  if (index < 1 || index > 5) throw std::out_of_range("integral index must be in 1..5");
  const double a = in.a;
  const double r = side == Side::p ? in.p : in.q;
  const double d = side == Side::p ? in.d1 : in.d2;
  switch (index) {
    case 1: return [a, r](double x) { return 1.0 / (a + (r - 2.0) * (1.0 - x)); };
    case 2: return [a, r](double x) {
      const double s = a + (r - 2.0) * (1.0 - x);
      return std::log(s) / s;
    };
    case 3: return [a, r](double x) { return std::log1p(-x) / (a + (r - 2.0) * (1.0 - x)); };
    case 4: return [a, r](double x) { return std::log(a - x) / (a + (r - 2.0) * (1.0 - x)); };
    default: return [a, r, d](double x) {
      return (a - x) * std::pow(1.0 - x, d - 1.0) / std::pow((a + r - 2.0) - (r - 2.0) * x, d);
    };
  }
}

namespace detail {

inline IntegralValue integrate_both(const std::function<double(double)>& f, double tol) {
  IntegralValue v;
  const auto r = integrate_toward_one(f, 1e-11);
  if (r.error > tol) {
    throw QuadratureError("constant integral: error estimate " + std::to_string(r.error) + " above tolerance");
  }
  v.value = r.value;
  v.error = r.error;
  v.evaluations = r.evaluations;
  v.gauss = gauss_toward_one(f);
  return v;
}

}  // namespace detail

/// J_1 closed form (log(a+r-2) - log a)/(r-2).
inline double closed_J1(double a, double r) { return (std::log(a + r - 2.0) - std::log(a)) / (r - 2.0); }
/// J_2 closed form ((log(a+r-2))^2 - (log a)^2)/(2(r-2)).
inline double closed_J2(double a, double r) {
  const double u = std::log(a + r - 2.0);
  const double l = std::log(a);
  return (u * u - l * l) / (2.0 * (r - 2.0));
}
/// Variant of the q-side J_2 closed form with (log q)^2 in place of (log a)^2.
inline double closed_J2q_log_q(double a, double q) {
  const double u = std::log(a + q - 2.0);
  const double l = std::log(q);
  return (u * u - l * l) / (2.0 * (q - 2.0));
}
/// I_1 when b = c = 2: (a+r-2)/(r-2) log((a+r-2)/a).
inline double closed_I1_flat(double a, double r) { return (a + r - 2.0) / (r - 2.0) * std::log((a + r - 2.0) / a); }

/// J_5 through its Gamma-function representation; the two inner integrals
/// are smooth and integrated by adaptive Simpson.
inline double closed_J5_gamma(double a, double r, double d) {
  const double z = (r - 2.0) / (a + r - 2.0);
  const auto i1 = adaptive_simpson([&](double s) { return std::pow(s, d - 1.0) / (1.0 - z * s); }, 0.0, 1.0, 1e-13);
  const auto i2 = adaptive_simpson([&](double s) { return std::pow(s, d - 1.0) * (1.0 - s) / (1.0 - z * s); }, 0.0, 1.0, 1e-13);
  const double g1 = std::tgamma(1.0 + d) / std::tgamma(d);
  const double g2 = std::tgamma(2.0 + d) / std::tgamma(d);
  return (a * a * (1.0 + d) * g1 * i1.value + (a * d + r - 2.0) * g2 * i2.value - (1.0 + d) * (a + r - 2.0)) /
         (a * d * (1.0 + d) * std::pow(a + r - 2.0, d));
}

inline IntegralValue integral_I(int index, Side side, const BranchInputs& in, double tol = 1e-10) {
  in.validate();
  auto v = detail::integrate_both(integrand_I(index, side, in), tol);
  if (index == 1 && in.lipschitz()) v.closed = closed_I1_flat(in.a, side == Side::p ? in.p : in.q);
  return v;
}

inline IntegralValue integral_J(int index, Side side, const BranchInputs& in, double tol = 1e-10) {
  in.validate();
  auto v = detail::integrate_both(integrand_J(index, side, in), tol);
  const double r = side == Side::p ? in.p : in.q;
  if (index == 1) v.closed = closed_J1(in.a, r);
  if (index == 2) v.closed = closed_J2(in.a, r);
  if (index == 5) v.closed = closed_J5_gamma(in.a, r, side == Side::p ? in.d1 : in.d2);
  return v;
}

// -------------------------------------------------------------- constants

struct ConstantsK {
  std::array<IntegralValue, 5> Ip, Iq, Jp, Jq;
  double k1 = 0, k2 = 0, k3 = 0, k4 = 0, k5 = 0, k6 = 0;
  /// -k2, the opposite sign convention.
  double k2_negated = 0;
  /// k2 with (a+p-2)^{d1}, (a+q-2)^{d2} in the denominators; this is the
  /// value for which the limit identity of the weighted Q integral holds.
  double k2_rederived = 0;
  /// J_{2,q} from the variant closed form containing (log q)^2.
  double J2q_log_q = 0;
};

inline ConstantsK constants_k(const BranchInputs& in, const UnknownConstants& unk) {
  in.validate();
  unk.validate();
  ConstantsK k;
  for (int i = 1; i <= 5; ++i) {
    const auto s = static_cast<std::size_t>(i - 1);
    k.Ip[s] = integral_I(i, Side::p, in);
    k.Iq[s] = integral_I(i, Side::q, in);
    k.Jp[s] = integral_J(i, Side::p, in);
    k.Jq[s] = integral_J(i, Side::q, in);
  }
  const double a = in.a, p = in.p, q = in.q, d1 = in.d1, d2 = in.d2;
  auto I = [](const std::array<IntegralValue, 5>& arr, int i) { return arr[static_cast<std::size_t>(i - 1)].value; };
  const double wp = p / (a + p - 2.0);
  const double wq = q / (a + q - 2.0);
  const double lp = std::log(unk.c_star_p * std::pow(p, d1 - 1.0) / unk.c_eps);
  const double lq = std::log(unk.c_star_q * std::pow(q, d2 - 1.0) / unk.c_eps2);
  const double mp = 2.0 * unk.c_star_p * unk.kappa_p * std::pow(p, d1);
  const double mq = 2.0 * unk.c_star_q * unk.kappa_q * std::pow(q, d2);

  k.k1 = wp * I(k.Ip, 1) + wq * I(k.Iq, 1);
  k.k2 = mp / (a + p - 2.0) * I(k.Ip, 5) + mq / (a + q - 2.0) * I(k.Iq, 5);
  k.k2_negated = -k.k2;
  k.k2_rederived = mp / std::pow(a + p - 2.0, d1) * I(k.Ip, 5) + mq / std::pow(a + q - 2.0, d2) * I(k.Iq, 5);
  k.k3 = wp * (lp * I(k.Ip, 1) + (d1 - 1.0) * (I(k.Ip, 2) - I(k.Ip, 3)) + I(k.Ip, 4)) +
         wq * (lq * I(k.Iq, 1) + (d2 - 1.0) * (I(k.Iq, 2) - I(k.Iq, 3)) + I(k.Iq, 4));
  k.k4 = p / (p - 2.0) * std::log((a + p - 2.0) / a) + q / (q - 2.0) * std::log((a + q - 2.0) / a);
  k.k5 = mp * I(k.Jp, 5) + mq * I(k.Jq, 5);
  k.k6 = p * (lp * I(k.Jp, 1) + (d1 - 1.0) * (I(k.Jp, 3) - I(k.Jp, 2)) + I(k.Jp, 4)) +
         q * (lq * I(k.Jq, 1) + (d2 - 1.0) * (I(k.Jq, 3) - I(k.Jq, 2)) + I(k.Jq, 4));
  k.J2q_log_q = closed_J2q_log_q(a, q);
  return k;
}

/// k_4 from the J_1 quadratures, p J_{1,p} + q J_{1,q}.
inline double k4_from_J(const ConstantsK& k, const BranchInputs& in) {
  return in.p * k.Jp[0].value + in.q * k.Jq[0].value;
}

inline double gamma_exponent(const BranchInputs& in) {
  const double a = in.a;
  return std::pow(a / (a + in.p - 2.0), in.ep()) * std::pow(a / (a + in.q - 2.0), in.eq());
}

struct UltracontractivityParams {
  ConstantsK k;
  double gamma = 1.0;
  double kappa = 0.0;      // k1
  double kappa_alt = 0.0;  // gamma k1, the factor produced by the limit
  double C_prime = 0.0;    // k2
  double C_prime_alt = 0.0;  // gamma k2
  double C = 0.0;          // e^{-k3} c_Omega
  double C_alt = 0.0;      // e^{-gamma k3} c_Omega
  bool lipschitz = false;
  double kappa_L = 0.0;    // Lipschitz case: k4
  double C0_prime = 0.0;   // k5; the opposite sign is also reported
  double C0 = 0.0;         // c_Omega e^{k6}
  double C0_alt = 0.0;     // c_Omega e^{-k6}, from exponentiating -L
};

inline UltracontractivityParams ultracontractivity_params(const BranchInputs& in, const UnknownConstants& unk,
                                                          double c_omega = 1.0) {
  if (!(c_omega > 0.0)) throw std::invalid_argument("c_omega must be positive");
  UltracontractivityParams u;
  u.k = constants_k(in, unk);
  u.gamma = gamma_exponent(in);
  u.kappa = u.k.k1;
  u.kappa_alt = u.gamma * u.k.k1;
  u.C_prime = u.k.k2;
  u.C_prime_alt = u.gamma * u.k.k2;
  u.C = std::exp(-u.k.k3) * c_omega;
  u.C_alt = std::exp(-u.gamma * u.k.k3) * c_omega;
  u.lipschitz = in.lipschitz();
  if (u.lipschitz) {
    u.kappa_L = u.k.k4;
    u.C0_prime = u.k.k5;
    u.C0 = c_omega * std::exp(u.k.k6);
    u.C0_alt = c_omega * std::exp(-u.k.k6);
  }
  return u;
}

/// Lipschitz-case parameters; rejects b != 2 or c != 2.
inline UltracontractivityParams lipschitz_params(const BranchInputs& in, const UnknownConstants& unk,
                                                 double c_omega = 1.0) {
  if (!in.lipschitz()) throw std::invalid_argument("Lipschitz constants need b = c = 2");
  return ultracontractivity_params(in, unk, c_omega);
}

/// int_0^t Q(tau) exp(-int_0^tau P) dtau, the weighted integral whose limit
/// is k1 log t - k2' t + k3 (k2' = k2_rederived).
inline QuadResult weighted_Q_integral(double t, const BranchInputs& in, const UnknownConstants& unk) {
  return integrate_toward_one([&](double x) {
    const double xi = x * t;
    return t * eval_Q(xi, t, in, unk) * std::exp(-integral_P(xi, t, in));
  });
}

/// int_0^t Q(tau) dtau, whose limit is k4 log t - k5 t + k6 when b = c = 2.
inline QuadResult plain_Q_integral(double t, const BranchInputs& in, const UnknownConstants& unk) {
  return integrate_toward_one([&](double x) { return t * eval_Q(x * t, t, in, unk); });
}

// ----------------------------------------------- branch selection helpers

struct BranchSelection {
  double b = 0, c = 0, p = 0, q = 0;
  double norm_omega = 0;  // ||w||_{r + p_m - 2, Omega}
  double norm_gamma = 0;  // ||w||_{r + q_m - 2, Gamma}
  double S_omega = 0;
  double S_gamma = 0;
};

namespace detail {

/// int (|f|/mu)^eta log(|f|/mu) with 0 log 0 = 0.
inline double s_functional(const Field& f, const ExponentField& eta, const Field& weights, double mu) {
  if (mu == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    const double z = std::abs(f[k]) / mu;
    if (z > 0.0) s += weights[k] * std::pow(z, eta[k]) * std::log(z);
  }
  return s;
}

}  // namespace detail

/// Branch values from the difference w = u(t) - v(t) of two states at a
/// snapshot with current exponent r: b (resp. c) is p_m^- (q_m^-) when the
/// norm of w in L^{r + p_m - 2} (L^{r + q_m - 2}) exceeds 1, and the upper
/// value otherwise; p (resp. q) is p_m^- (q_m^-) when the S-functional is
/// <= 0 and the upper value otherwise. The normaliser in S is the pair norm
/// with exponents (r + p_m - 2, r + q_m - 2).
inline BranchSelection derive_branches(const Grid& g, const PairFunction& w, double r, const VectorExponent& ex) {
  ex.check_carriers(g);
  const ExponentField eta_o(ex.p_min.values().array() + (r - 2.0));
  const ExponentField eta_g(ex.q_min.values().array() + (r - 2.0));
  BranchSelection s;
  s.norm_omega = luxemburg_norm(w.u, eta_o, g.interior_weights());
  s.norm_gamma = luxemburg_norm(w.w, eta_g, g.surface_weights());
  const double pn = s.norm_omega + s.norm_gamma;
  s.S_omega = detail::s_functional(w.u, eta_o, g.interior_weights(), pn);
  s.S_gamma = detail::s_functional(w.w, eta_g, g.surface_weights(), pn);
  s.b = s.norm_omega > 1.0 ? ex.p_min.min() : ex.p_min.max();
  s.c = s.norm_gamma > 1.0 ? ex.q_min.min() : ex.q_min.max();
  s.p = s.S_omega <= 0.0 ? ex.p_min.min() : ex.p_min.max();
  s.q = s.S_gamma <= 0.0 ? ex.q_min.min() : ex.q_min.max();
  return s;
}

}  // namespace wlab
