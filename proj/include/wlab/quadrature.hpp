#pragma once

// One-dimensional quadrature: adaptive Simpson, composite Gauss-Legendre, and
// geometric splitting toward an endpoint log singularity at x = 1.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace wlab {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  long evaluations = 0;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                       int depth, double& err, long& evals, bool& exhausted) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  evals += 2;
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || depth <= 0 || !(m > a && m < b)) {
    if (depth <= 0 && std::abs(delta) > 15.0 * tol) exhausted = true;
    err += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err, evals, exhausted) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err, evals, exhausted);
}

}  // namespace detail

/// Adaptive Simpson on [a, b] with Richardson correction. Throws
/// QuadratureError if the recursion depth runs out before the local
/// tolerance is met or the integrand is not finite.
template <class F>
QuadResult adaptive_simpson(const F& f, double a, double b, double tol = 1e-11, int max_depth = 48) {
  QuadResult r;
  if (a == b) return r;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  r.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  bool exhausted = false;
  r.value = detail::simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth, r.error, r.evaluations, exhausted);
  if (!std::isfinite(r.value)) throw QuadratureError("adaptive_simpson: non-finite integrand");
  if (exhausted) {
    throw QuadratureError("adaptive_simpson: tolerance not met on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return r;
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_rule: n must be positive");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
    return rule;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

/// Composite Gauss-Legendre over the given panel breakpoints.
template <class F>
double gauss_legendre_panels(const F& f, const std::vector<double>& breaks, const GaussRule& rule) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(c + h * rule.nodes[i]);
    sum += h * s;
  }
  return sum;
}

template <class F>
double composite_gauss_legendre(const F& f, double a, double b, int panels, int order = 10) {
  std::vector<double> breaks(static_cast<std::size_t>(panels) + 1);
  for (int k = 0; k <= panels; ++k) breaks[static_cast<std::size_t>(k)] = a + (b - a) * k / panels;
  return gauss_legendre_panels(f, breaks, gauss_legendre_rule(order));
}

/// Breakpoints 0, 1/2, 3/4, ..., 1 - 2^-levels.
inline std::vector<double> geometric_breaks(int levels) {
  std::vector<double> br{0.0};
  for (int k = 1; k <= levels; ++k) br.push_back(1.0 - std::ldexp(1.0, -k));
  return br;
}

/// Integral over [0, 1] of an integrand that is smooth on [0, 1) with at most
/// a logarithmic singularity at x = 1. The interval is split at 1 - 2^-k and
/// each piece is integrated by adaptive Simpson. The remaining tail
/// [1 - delta, 1] is modelled as c log(1 - x), matched at the last breakpoint.
template <class F>
QuadResult integrate_toward_one(const F& f, double tol = 1e-11, int levels = 46) {
  const auto br = geometric_breaks(levels);
  QuadResult total;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    const auto r = adaptive_simpson(f, br[k], br[k + 1], tol);
    total.value += r.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
  }
  const double delta = std::ldexp(1.0, -levels);
  const double edge = f(br.back());
  ++total.evaluations;
  const double logd = std::log(delta);
  const double c = edge / logd;
  const double tail = c * (delta * logd - delta);
  total.value += tail;
  // the model is exact for c log(1-x) and bounded by |edge| delta otherwise
  total.error += std::abs(edge) * delta;
  if (!std::isfinite(total.value)) throw QuadratureError("integrate_toward_one: non-finite result");
  return total;
}

/// Independent check for integrate_toward_one: graded Gauss-Legendre panels
/// reaching to within 2^-levels of x = 1; the neglected tail is below
/// |f| 2^-levels.
template <class F>
double gauss_toward_one(const F& f, int levels = 50, int order = 20) {
  return gauss_legendre_panels(f, geometric_breaks(levels), gauss_legendre_rule(order));
}

}  // namespace wlab
