#include "wlab/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace wlab;

namespace {
double at(const std::string& s, double x1 = 0.0, double x2 = 0.0, double x3 = 0.0) {
  return Expression(s)({x1, x2, x3});
}
}  // namespace

TEST(Expression, Arithmetic) {
  EXPECT_EQ(at("1 + 2 * 3"), 7.0);
  EXPECT_EQ(at("(1 + 2) * 3"), 9.0);
  EXPECT_EQ(at("8 / 4 / 2"), 1.0);
  EXPECT_EQ(at("2 ^ 3 ^ 2"), 512.0);
  EXPECT_EQ(at("-2 ^ 2"), -4.0);
  EXPECT_EQ(at("2 ^ -1"), 0.5);
  EXPECT_EQ(at("+3 - -2"), 5.0);
  EXPECT_EQ(at("1e-2 * 100"), 1.0);
}

TEST(Expression, NamesAndFunctions) {
  EXPECT_DOUBLE_EQ(at("pi"), std::numbers::pi);
  EXPECT_DOUBLE_EQ(at("e"), std::numbers::e);
  EXPECT_DOUBLE_EQ(at("2.5 + 0.5*sin(pi*x1)", 0.5), 3.0);
  EXPECT_DOUBLE_EQ(at("x1 + 10*x2 + 100*x3", 1, 2, 3), 321.0);
  EXPECT_DOUBLE_EQ(at("exp(log(3))"), 3.0);
  EXPECT_DOUBLE_EQ(at("sqrt(abs(-16))"), 4.0);
  EXPECT_DOUBLE_EQ(at("cos(0) + tan(0) + tanh(0)"), 1.0);
}

TEST(Expression, Constness) {
  EXPECT_TRUE(Expression("2 + sin(pi)").is_constant());
  EXPECT_FALSE(Expression("2 + x2").is_constant());
  const Expression a("x1 * 2");
  const Expression b = a;
  EXPECT_EQ(b({3, 0, 0}), 6.0);
  EXPECT_EQ(b.text(), "x1 * 2");
}

TEST(Expression, Errors) {
  EXPECT_THROW(Expression(""), ExprError);
  EXPECT_THROW(Expression("1 +"), ExprError);
  EXPECT_THROW(Expression("(1 + 2"), ExprError);
  EXPECT_THROW(Expression("x4"), ExprError);
  EXPECT_THROW(Expression("foo(1)"), ExprError);
  EXPECT_THROW(Expression("1 2"), ExprError);
  try {
    Expression("1 + $");
    FAIL();
  } catch (const ExprError& e) {
    EXPECT_EQ(e.position, 4u);
    EXPECT_NE(std::string(e.what()).find("column 5"), std::string::npos);
  }
}
