#pragma once

#include "wlab/energy.hpp"
#include "wlab/grid.hpp"
#include "wlab/varexp.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <random>
#include <vector>

namespace wlab::testing {

struct RandomSource {
  std::mt19937_64 rng;
  explicit RandomSource(std::uint64_t seed = 2024) : rng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  Field field(Eigen::Index n, double a, double b) {
    Field f(n);
    for (Eigen::Index k = 0; k < n; ++k) f[k] = uniform(a, b);
    return f;
  }
  /// Smooth field on the grid: a few random cosine modes.
  Field smooth(const Grid& g, double amp = 1.0) {
    double k[3][3], ph[3], a[3];
    for (int m = 0; m < 3; ++m) {
      for (int d = 0; d < 3; ++d) k[m][d] = uniform(0.0, 3.0);
      ph[m] = uniform(0.0, 6.28);
      a[m] = uniform(-1.0, 1.0) / 3.0;
    }
    return amp * sample_nodes(g, [&](const std::array<double, 3>& x) {
             double v = 0.0;
             for (int m = 0; m < 3; ++m) v += a[m] * std::cos(k[m][0] * x[0] + k[m][1] * x[1] + k[m][2] * x[2] + ph[m]);
             return v;
           });
  }
  PairFunction pair(const Grid& g, double amp = 1.0) { return PairFunction::conforming(g, smooth(g, amp)); }
  PairFunction rough_pair(const Grid& g, double amp = 1.0) {
    return PairFunction::conforming(g, field(static_cast<Eigen::Index>(g.num_nodes()), -amp, amp));
  }
  VectorExponent exponents(const Grid& g, double lo, double hi) {
    std::vector<ExponentField> p, q;
    for (int i = 0; i < g.dimension(); ++i) {
      const Field s = smooth(g);
      p.emplace_back((lo + (hi - lo) * (0.5 + 0.5 * s.array().max(-1.0).min(1.0))).matrix());
    }
    for (int j = 0; j + 1 < g.dimension(); ++j) {
      const Field s = trace(g, smooth(g));
      q.emplace_back((lo + (hi - lo) * (0.5 + 0.5 * s.array().max(-1.0).min(1.0))).matrix());
    }
    return VectorExponent(std::move(p), std::move(q));
  }
  CoefficientField coefficients(const Grid& g) {
    return CoefficientField((1.0 + 0.5 * (1.0 + smooth(g).array())).matrix(),
                            trace(g, (1.0 + 0.5 * (1.0 + smooth(g).array())).matrix()));
  }
};

inline double trap(const Grid& g, int axis, int i) {
  const double h = g.length(axis) / (g.resolution(axis) - 1);
  return (i == 0 || i == g.resolution(axis) - 1) ? h / 2 : h;
}

inline double F(double d, double r) { return std::pow(std::abs(d), r) / r; }

// Direct summation over grid edges and nodes, written from the definition of
// the staggered discretisation (exponents >= 2).
inline double oracle_interior(const Grid& g, const VectorExponent& ex, const CoefficientField& c, const Field& u) {
  double e = 0.0;
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    const auto idx = g.multi_index(k);
    double vol = 1.0;
    for (int a = 0; a < g.dimension(); ++a) vol *= trap(g, a, idx[static_cast<std::size_t>(a)]);
    const auto ki = static_cast<Eigen::Index>(k);
    e += vol * c.alpha[ki] * F(u[ki], ex.p_max[ki]);
    for (int a = 0; a < g.dimension(); ++a) {
      if (idx[static_cast<std::size_t>(a)] + 1 >= g.resolution(a)) continue;
      auto nb = idx;
      ++nb[static_cast<std::size_t>(a)];
      const auto kj = static_cast<Eigen::Index>(g.node_index(nb));
      const double h = g.length(a) / (g.resolution(a) - 1);
      double w = h;
      for (int o = 0; o < g.dimension(); ++o) {
        if (o != a) w *= trap(g, o, idx[static_cast<std::size_t>(o)]);
      }
      const double r = 0.5 * (ex.p[static_cast<std::size_t>(a)][ki] + ex.p[static_cast<std::size_t>(a)][kj]);
      e += w * F((u[kj] - u[ki]) / h, r);
    }
  }
  return e;
}

inline double oracle_boundary(const Grid& g, const VectorExponent& ex, const CoefficientField& c, const Field& w) {
  double e = 0.0;
  for (std::size_t s = 0; s < g.num_boundary(); ++s) {
    const auto si = static_cast<Eigen::Index>(s);
    e += g.surface_weights()[si] * c.beta[si] * F(w[si], ex.q_max[si]);
  }
  for (const auto& face : g.faces()) {
    for (std::size_t k = 0; k < face.size(); ++k) {
      const auto idx = g.multi_index(face.nodes[k]);
      for (std::size_t j = 0; j < face.tangential_axes.size(); ++j) {
        const int a = face.tangential_axes[j];
        if (idx[static_cast<std::size_t>(a)] + 1 >= g.resolution(a)) continue;
        auto nb = idx;
        ++nb[static_cast<std::size_t>(a)];
        const auto s1 = g.boundary_slot(face.nodes[k]);
        const auto s2 = g.boundary_slot(g.node_index(nb));
        const double h = g.length(a) / (g.resolution(a) - 1);
        double wt = h;
        for (std::size_t o = 0; o < face.tangential_axes.size(); ++o) {
          if (o != j) wt *= trap(g, face.tangential_axes[o], idx[static_cast<std::size_t>(face.tangential_axes[o])]);
        }
        const double r = 0.5 * (ex.q[j][s1] + ex.q[j][s2]);
        e += wt * F((w[s2] - w[s1]) / h, r);
      }
    }
  }
  return e;
}

// Sparse matrix of the quadratic form 2 Phi for p = q = 2, alpha = beta = 1,
// assembled from node neighbourhoods.
inline Eigen::SparseMatrix<double> linear_operator_sparse(const Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<Eigen::Triplet<double>> trip;
  auto diag = [&](Eigen::Index i, double c) { trip.emplace_back(i, i, c); };
  auto add_edge = [&](Eigen::Index i, Eigen::Index j, double c) {
    trip.emplace_back(i, i, c);
    trip.emplace_back(j, j, c);
    trip.emplace_back(i, j, -c);
    trip.emplace_back(j, i, -c);
  };
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    const auto idx = g.multi_index(k);
    double vol = 1.0;
    for (int a = 0; a < g.dimension(); ++a) vol *= trap(g, a, idx[static_cast<std::size_t>(a)]);
    diag(static_cast<Eigen::Index>(k), vol);
    for (int a = 0; a < g.dimension(); ++a) {
      if (idx[static_cast<std::size_t>(a)] + 1 >= g.resolution(a)) continue;
      auto nb = idx;
      ++nb[static_cast<std::size_t>(a)];
      const double h = g.length(a) / (g.resolution(a) - 1);
      double w = 1.0 / h;
      for (int o = 0; o < g.dimension(); ++o) {
        if (o != a) w *= trap(g, o, idx[static_cast<std::size_t>(o)]);
      }
      add_edge(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(g.node_index(nb)), w);
    }
  }
  for (std::size_t s = 0; s < g.num_boundary(); ++s) {
    const auto k = static_cast<Eigen::Index>(g.boundary_nodes()[s]);
    diag(k, g.surface_weights()[static_cast<Eigen::Index>(s)]);
  }
  for (const auto& face : g.faces()) {
    for (std::size_t k = 0; k < face.size(); ++k) {
      const auto idx = g.multi_index(face.nodes[k]);
      for (std::size_t j = 0; j < face.tangential_axes.size(); ++j) {
        const int a = face.tangential_axes[j];
        if (idx[static_cast<std::size_t>(a)] + 1 >= g.resolution(a)) continue;
        auto nb = idx;
        ++nb[static_cast<std::size_t>(a)];
        const double h = g.length(a) / (g.resolution(a) - 1);
        double w = 1.0 / h;
        for (std::size_t o = 0; o < face.tangential_axes.size(); ++o) {
          if (o != j) w *= trap(g, face.tangential_axes[o], idx[static_cast<std::size_t>(face.tangential_axes[o])]);
        }
        add_edge(static_cast<Eigen::Index>(face.nodes[k]), static_cast<Eigen::Index>(g.node_index(nb)), w);
      }
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

inline Eigen::MatrixXd linear_operator(const Grid& g) { return Eigen::MatrixXd(linear_operator_sparse(g)); }

/// Lumped mass: interior weights plus surface weights on boundary nodes.
inline Field lumped_mass(const Grid& g) {
  Field M = g.interior_weights();
  for (std::size_t s = 0; s < g.num_boundary(); ++s) {
    M[static_cast<Eigen::Index>(g.boundary_nodes()[s])] += g.surface_weights()[static_cast<Eigen::Index>(s)];
  }
  return M;
}

}  // namespace wlab::testing
