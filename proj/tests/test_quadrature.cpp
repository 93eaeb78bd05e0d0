#include "wlab/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace wlab;

TEST(AdaptiveSimpson, SmoothIntegrands) {
  EXPECT_NEAR(adaptive_simpson([](double x) { return x * x * x; }, 0.0, 2.0).value, 4.0, 1e-13);
  EXPECT_NEAR(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value, 2.0, 1e-11);
  EXPECT_NEAR(adaptive_simpson([](double x) { return std::exp(-x * x); }, -3.0, 3.0).value,
              std::sqrt(std::numbers::pi) * std::erf(3.0), 1e-11);
  EXPECT_EQ(adaptive_simpson([](double x) { return x; }, 1.0, 1.0).value, 0.0);
  const auto r = adaptive_simpson([](double x) { return std::cos(5 * x); }, 0.0, 1.0);
  EXPECT_GT(r.evaluations, 3);
  EXPECT_LT(r.error, 1e-10);
}

TEST(AdaptiveSimpson, ReportsFailure) {
  auto kink = [](double x) { return std::sqrt(std::abs(x - 1.0 / 3.0)); };
  EXPECT_THROW(adaptive_simpson(kink, 0.0, 1.0, 1e-15, 4), QuadratureError);
  EXPECT_THROW(adaptive_simpson([](double x) { return 1.0 / x; }, 0.0, 1.0), QuadratureError);
}

TEST(GaussLegendre, RuleProperties) {
  for (int n : {1, 2, 5, 10, 20}) {
    const auto rule = gauss_legendre_rule(n);
    double w = 0.0;
    for (double v : rule.weights) w += v;
    EXPECT_NEAR(w, 2.0, 1e-14);
    // exact for degree 2n - 1
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], 2 * n - 2);
    EXPECT_NEAR(s, 2.0 / (2 * n - 1), 1e-14);
  }
  EXPECT_THROW(gauss_legendre_rule(0), std::invalid_argument);
  EXPECT_NEAR(composite_gauss_legendre([](double x) { return std::exp(x); }, 0.0, 1.0, 4), std::exp(1.0) - 1.0, 1e-14);
}

TEST(TowardOne, LogSingularities) {
  auto l1 = [](double x) { return std::log1p(-x); };
  auto l2 = [](double x) { return std::pow(std::log1p(-x), 2); };
  auto l3 = [](double x) { return x * std::log1p(-x); };
  EXPECT_NEAR(integrate_toward_one(l1).value, -1.0, 1e-10);
  EXPECT_NEAR(integrate_toward_one(l2).value, 2.0, 1e-9);
  EXPECT_NEAR(integrate_toward_one(l3).value, -0.75, 1e-10);
  EXPECT_NEAR(gauss_toward_one(l1), -1.0, 1e-10);
  EXPECT_NEAR(gauss_toward_one(l3), -0.75, 1e-10);
  EXPECT_NEAR(integrate_toward_one([](double x) { return 1.0 + x; }).value, 1.5, 1e-12);
}

TEST(TowardOne, GeometricBreaks) {
  const auto b = geometric_breaks(5);
  ASSERT_EQ(b.size(), 6u);
  EXPECT_EQ(b[0], 0.0);
  EXPECT_EQ(b[1], 0.5);
  EXPECT_EQ(b[5], 1.0 - 1.0 / 32.0);
  EXPECT_LT(geometric_breaks(50).back(), 1.0);
}
