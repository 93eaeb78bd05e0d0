#include "support.hpp"
#include "wlab/energy.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace wlab;
using namespace wlab::testing;

namespace {

double x2(const Grid& g, const PairFunction& a, const PairFunction& b) {
  return a.u.cwiseProduct(b.u).dot(g.interior_weights()) + a.w.cwiseProduct(b.w).dot(g.surface_weights());
}

}  // namespace

TEST(Energy, ZeroAndConstants) {
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const WentzellEnergy e(g, VectorExponent::constant(g, 2.0, 2.0), CoefficientField::constant(g, 1.0, 1.0));
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const auto nb = static_cast<Eigen::Index>(g.num_boundary());
  EXPECT_EQ(e.interior_energy(Field::Zero(n)), 0.0);
  EXPECT_EQ(e.boundary_energy(Field::Zero(nb)), 0.0);
  EXPECT_EQ(e.total_energy(PairFunction::zero(g)), 0.0);
  for (double c : {0.5, -1.25, 3.0}) {
    EXPECT_NEAR(e.interior_energy(Field::Constant(n, c)), c * c / 2, 1e-12);
    EXPECT_NEAR(e.boundary_energy(Field::Constant(nb, c)), 2 * c * c, 1e-12);
  }
}

TEST(Energy, DirectSummationOracle) {
  RandomSource rs(7);
  for (int dim : {2, 3}) {
    const Grid g = dim == 2 ? build_grid(2, {1.0, 1.5}, {9, 7}) : build_grid(3, {1.0, 0.5, 2.0}, {5, 4, 6});
    const auto ex = rs.exponents(g, 2.0, 4.0);
    const auto co = rs.coefficients(g);
    const WentzellEnergy e(g, ex, co);
    for (int t = 0; t < 5; ++t) {
      const Field u = rs.field(static_cast<Eigen::Index>(g.num_nodes()), -2, 2);
      const Field w = rs.field(static_cast<Eigen::Index>(g.num_boundary()), -2, 2);
      const double oi = oracle_interior(g, ex, co, u);
      const double ob = oracle_boundary(g, ex, co, w);
      EXPECT_NEAR(e.interior_energy(u), oi, 1e-12 * oi);
      EXPECT_NEAR(e.boundary_energy(w), ob, 1e-12 * ob);
    }
  }
}

TEST(Energy, TotalEnergyProperties) {
  RandomSource rs(8);
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const WentzellEnergy e(g, rs.exponents(g, 2.0, 4.0), rs.coefficients(g));
  PairFunction bad = rs.pair(g);
  bad.w[0] += 1.0;
  EXPECT_THROW(e.total_energy(bad), std::invalid_argument);
  for (int t = 0; t < 20; ++t) {
    const auto u = rs.rough_pair(g);
    const auto v = rs.rough_pair(g, 2.0);
    EXPECT_GT(e.total_energy(u), 0.0);
    const auto mid = (u + v) * 0.5;
    const double gap = 0.5 * (e.total_energy(u) + e.total_energy(v)) - e.total_energy(mid);
    EXPECT_GT(gap, 0.0);
    // order-preserving inequality with g = (u + u^v)/2, h = (v + u v v)/2
    const Field mn = u.u.cwiseMin(v.u), mx = u.u.cwiseMax(v.u);
    const auto gp = PairFunction::conforming(g, 0.5 * (u.u + mn));
    const auto hp = PairFunction::conforming(g, 0.5 * (v.u + mx));
    EXPECT_LE(e.total_energy(gp) + e.total_energy(hp), e.total_energy(u) + e.total_energy(v) + 1e-12);
  }
}

TEST(Energy, GradientFiniteDifferences) {
  RandomSource rs(9);
  for (auto st : {Stencil::staggered, Stencil::nodal}) {
    for (int dim : {2, 3}) {
      const Grid g = dim == 2 ? build_grid(2, {1, 1}, {9, 9}) : build_grid(3, {1, 1, 1}, {5, 5, 5});
      const WentzellEnergy e(g, rs.exponents(g, 2.0, 4.0), rs.coefficients(g), 1e-8, st);
      EXPECT_EQ(sup_pair_norm(e.energy_gradient(PairFunction::zero(g))), 0.0);
      for (int t = 0; t < 20; ++t) {
        const auto u = rs.pair(g, 2.0);
        const auto v = rs.rough_pair(g);
        const double eps = 1e-5;
        const double fd = (e.total_energy(u + v * eps) - e.total_energy(u - v * eps)) / (2 * eps);
        const double an = x2(g, e.energy_gradient(u), v);
        EXPECT_LE(std::abs(fd - an), 1e-6 * std::max(std::abs(an), 1e-3)) << "dim " << dim;
      }
    }
  }
}

TEST(Energy, RegularisedBelowTwo) {
  RandomSource rs(10);
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  EXPECT_THROW(WentzellEnergy(g, VectorExponent::constant(g, 1.5, 1.8), CoefficientField::constant(g, 1, 1), 0.0),
               std::invalid_argument);
  EXPECT_NO_THROW(WentzellEnergy(g, VectorExponent::constant(g, 2.0, 2.0), CoefficientField::constant(g, 1, 1), 0.0));
  const WentzellEnergy e(g, rs.exponents(g, 1.3, 2.5), rs.coefficients(g), 1e-3);
  for (int t = 0; t < 10; ++t) {
    const auto u = rs.pair(g);
    const auto v = rs.rough_pair(g);
    const double eps = 1e-6;
    const double fd = (e.total_energy(u + v * eps) - e.total_energy(u - v * eps)) / (2 * eps);
    EXPECT_NEAR(fd, x2(g, e.energy_gradient(u), v), 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Energy, LinearAssemblyOracle) {
  RandomSource rs(11);
  for (int dim : {2, 3}) {
    const Grid g = dim == 2 ? build_grid(2, {1.0, 2.0}, {7, 9}) : build_grid(3, {1, 1, 1}, {5, 5, 5});
    const WentzellEnergy e(g, VectorExponent::constant(g, 2.0, 2.0), CoefficientField::constant(g, 1, 1), 0.0);
    const Eigen::MatrixXd A = linear_operator(g);
    Field M = g.interior_weights();
    for (std::size_t s = 0; s < g.num_boundary(); ++s) {
      M[static_cast<Eigen::Index>(g.boundary_nodes()[s])] += g.surface_weights()[static_cast<Eigen::Index>(s)];
    }
    for (int t = 0; t < 5; ++t) {
      const auto u = rs.rough_pair(g);
      const Field expect = (A * u.u).cwiseQuotient(M);
      const auto got = e.energy_gradient(u);
      EXPECT_LE((got.u - expect).cwiseAbs().maxCoeff(), 1e-10 * expect.cwiseAbs().maxCoeff());
      EXPECT_NEAR(e.total_energy(u), 0.5 * u.u.dot(A * u.u), 1e-12 * e.total_energy(u));
    }
  }
}

TEST(Energy, GradientMonotone) {
  RandomSource rs(12);
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const WentzellEnergy e(g, rs.exponents(g, 2.0, 4.0), rs.coefficients(g));
  for (int t = 0; t < 20; ++t) {
    const auto u = rs.rough_pair(g, 2.0);
    const auto v = rs.rough_pair(g, 2.0);
    EXPECT_GE(x2(g, e.energy_gradient(u) - e.energy_gradient(v), u - v), 0.0);
  }
}

TEST(Energy, CoefficientInvariant) {
  const Grid g = build_grid(2, {1, 1}, {5, 5});
  EXPECT_THROW(CoefficientField::constant(g, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(CoefficientField::constant(g, 1.0, -1.0), std::invalid_argument);
}

TEST(MonotonicityGap, Properties) {
  RandomSource rs(13);
  const Field a = rs.field(3, -1, 1);
  EXPECT_EQ(monotonicity_gap(a, a, 3.0).lhs, 0.0);
  EXPECT_THROW(monotonicity_gap(a, a, 1.0), std::invalid_argument);
  for (double r : {1.5, 2.0, 3.0, 4.7}) {
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 10000; ++t) {
      const Field x = rs.field(3, -2, 2), y = rs.field(3, -2, 2);
      const auto m = monotonicity_gap(x, y, r);
      EXPECT_GE(m.lhs, -1e-12 * (1 + m.sum_form));
      if (r >= 2.0 && m.power_form > 0) min_ratio = std::min(min_ratio, m.lhs / m.power_form);
    }
    if (r >= 2.0) {
      EXPECT_GT(min_ratio, 0.0) << "r = " << r;
      RecordProperty("min_ratio_r" + std::to_string(static_cast<int>(10 * r)), std::to_string(min_ratio));
    }
  }
}
