#pragma once

// Variable-exponent Lebesgue calculus on discrete carriers: modulars,
// Luxemburg norms and the pair-space norms on Omega x Gamma.

#include "wlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wlab {

/// Exponent values on the nodes of one carrier (interior nodes or boundary
/// slots), with cached extrema. Only finite exponents >= 1 are admitted.
class ExponentField {
 public:
  ExponentField() = default;
  explicit ExponentField(Field values) : values_(std::move(values)) {
    if (values_.size() == 0) throw std::invalid_argument("exponent field is empty");
    if (!values_.allFinite()) throw std::invalid_argument("exponent field must be finite");
    min_ = values_.minCoeff();
    max_ = values_.maxCoeff();
    if (min_ < 1.0) throw std::invalid_argument("exponent field must satisfy r >= 1");
  }
  static ExponentField constant(std::size_t n, double r) {
    return ExponentField(Field::Constant(static_cast<Eigen::Index>(n), r));
  }

  const Field& values() const { return values_; }
  double operator[](Eigen::Index i) const { return values_[i]; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double min() const { return min_; }
  double max() const { return max_; }

  /// Pointwise conjugate exponent r' with 1/r + 1/r' = 1 (requires r > 1).
  ExponentField conjugate() const {
    if (min_ <= 1.0) throw std::domain_error("conjugate exponent needs r > 1");
    return ExponentField(values_.unaryExpr([](double r) { return r / (r - 1.0); }));
  }

 private:
  Field values_;
  double min_ = 1.0;
  double max_ = 1.0;
};

/// Nodewise minimum and maximum across exponent components sharing a carrier.
inline std::pair<ExponentField, ExponentField> pointwise_extrema(const std::vector<ExponentField>& comps) {
  if (comps.empty()) throw std::invalid_argument("pointwise_extrema: no components");
  const auto n = comps.front().size();
  Field lo = comps.front().values();
  Field hi = lo;
  for (const auto& c : comps) {
    if (c.size() != n) throw std::invalid_argument("pointwise_extrema: mismatched carriers");
    lo = lo.cwiseMin(c.values());
    hi = hi.cwiseMax(c.values());
  }
  return {ExponentField(std::move(lo)), ExponentField(std::move(hi))};
}

/// Anisotropic exponent vectors: p_1..p_N on Omega, q_1..q_{N-1} on Gamma.
struct VectorExponent {
  std::vector<ExponentField> p;
  std::vector<ExponentField> q;
  ExponentField p_min, p_max, q_min, q_max;

  VectorExponent() = default;
  VectorExponent(std::vector<ExponentField> interior, std::vector<ExponentField> boundary)
      : p(std::move(interior)), q(std::move(boundary)) {
    std::tie(p_min, p_max) = pointwise_extrema(p);
    std::tie(q_min, q_max) = pointwise_extrema(q);
    if (!(p_min.min() > 1.0) || !(q_min.min() > 1.0)) {
      throw std::invalid_argument("vector exponent needs p_m^- > 1 and q_m^- > 1");
    }
  }

  /// Constant exponents on a grid.
  static VectorExponent constant(const Grid& g, double pval, double qval) {
    std::vector<ExponentField> pi(static_cast<std::size_t>(g.dimension()), ExponentField::constant(g.num_nodes(), pval));
    std::vector<ExponentField> qj(static_cast<std::size_t>(g.dimension() - 1),
                                  ExponentField::constant(g.num_boundary(), qval));
    return VectorExponent(std::move(pi), std::move(qj));
  }

  void check_carriers(const Grid& g) const {
    if (p.size() != static_cast<std::size_t>(g.dimension()) || q.size() != static_cast<std::size_t>(g.dimension() - 1)) {
      throw std::invalid_argument("vector exponent: need N interior and N-1 boundary components");
    }
    for (const auto& e : p) {
      if (e.size() != g.num_nodes()) throw std::invalid_argument("vector exponent: interior carrier mismatch");
    }
    for (const auto& e : q) {
      if (e.size() != g.num_boundary()) throw std::invalid_argument("vector exponent: boundary carrier mismatch");
    }
  }
};

/// A pair (u on Omega nodes, w on Gamma slots). Conforming when w = trace(u).
struct PairFunction {
  Field u;
  Field w;

  static PairFunction conforming(const Grid& g, Field interior) {
    Field b = trace(g, interior);
    return {std::move(interior), std::move(b)};
  }
  static PairFunction zero(const Grid& g) {
    return {Field::Zero(static_cast<Eigen::Index>(g.num_nodes())), Field::Zero(static_cast<Eigen::Index>(g.num_boundary()))};
  }
  PairFunction operator-(const PairFunction& o) const { return {u - o.u, w - o.w}; }
  PairFunction operator+(const PairFunction& o) const { return {u + o.u, w + o.w}; }
  PairFunction operator*(double s) const { return {u * s, w * s}; }
};

using StateFunction = PairFunction;

inline bool is_conforming(const Grid& g, const PairFunction& f) {
  if (static_cast<std::size_t>(f.u.size()) != g.num_nodes() || static_cast<std::size_t>(f.w.size()) != g.num_boundary()) {
    return false;
  }
  const auto& nodes = g.boundary_nodes();
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    if (f.w[static_cast<Eigen::Index>(s)] != f.u[static_cast<Eigen::Index>(nodes[s])]) return false;
  }
  return true;
}

/// Theta_r(f) = sum_k weight_k |f_k|^{r_k}.
inline double modular(const Field& f, const ExponentField& r, const Field& weights) {
  if (f.size() != weights.size() || static_cast<std::size_t>(f.size()) != r.size()) {
    throw std::invalid_argument("modular: carrier mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    const double a = std::abs(f[k]);
    if (a != 0.0) sum += weights[k] * std::pow(a, r[k]);
  }
  return sum;
}

/// Modular of f / mu without materialising the scaled field.
inline double scaled_modular(const Field& f, const ExponentField& r, const Field& weights, double mu) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    const double a = std::abs(f[k]) / mu;
    if (a != 0.0) sum += weights[k] * std::pow(a, r[k]);
  }
  return sum;
}

/// Luxemburg norm inf{mu > 0 : Theta(|f|/mu) <= 1}. The map mu -> Theta(f/mu)
/// is strictly decreasing, so a doubling bracket followed by bisection to
/// relative width 1e-12 always terminates.
inline double luxemburg_norm(const Field& f, const ExponentField& r, const Field& weights, double rel_tol = 1e-12) {
  if (f.size() != weights.size() || static_cast<std::size_t>(f.size()) != r.size()) {
    throw std::invalid_argument("luxemburg_norm: carrier mismatch");
  }
  if (f.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  auto over = [&](double mu) { return scaled_modular(f, r, weights, mu) > 1.0; };
  double lo = 1.0;
  double hi = 1.0;
  if (over(1.0)) {
    while (over(hi)) {
      lo = hi;
      hi *= 2.0;
    }
  } else {
    while (!over(lo)) {
      hi = lo;
      lo *= 0.5;
    }
  }
  // invariant: Theta(f/lo) > 1 >= Theta(f/hi)
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (over(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double interior_norm(const Grid& g, const Field& u, const ExponentField& r) {
  return luxemburg_norm(u, r, g.interior_weights());
}
inline double boundary_norm(const Grid& g, const Field& w, const ExponentField& s) {
  return luxemburg_norm(w, s, g.surface_weights());
}

/// ||u||_{r(.),Omega} + ||w||_{s(.),Gamma}.
inline double pair_norm(const Grid& g, const PairFunction& f, const ExponentField& r, const ExponentField& s) {
  return interior_norm(g, f.u, r) + boundary_norm(g, f.w, s);
}

/// Theta_{r,Omega}(u) + Theta_{s,Gamma}(w).
inline double pair_modular(const Grid& g, const PairFunction& f, const ExponentField& r, const ExponentField& s) {
  return modular(f.u, r, g.interior_weights()) + modular(f.w, s, g.surface_weights());
}

/// max(||u||_inf, ||w||_inf).
inline double sup_pair_norm(const PairFunction& f) {
  const double a = f.u.size() ? f.u.cwiseAbs().maxCoeff() : 0.0;
  const double b = f.w.size() ? f.w.cwiseAbs().maxCoeff() : 0.0;
  return std::max(a, b);
}

}  // namespace wlab
