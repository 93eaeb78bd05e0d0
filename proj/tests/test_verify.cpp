#include "wlab/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace wlab;

namespace {

WentzellEnergy make_energy(const Grid& g, double lo, double hi, std::uint64_t seed) {
  Sampler s(seed);
  auto ex = lo == hi ? VectorExponent::constant(g, lo, lo) : random_vector_exponent(s, g, lo, hi);
  return WentzellEnergy(g, std::move(ex), CoefficientField::constant(g, 1.0, 1.0));
}

FlowConfig flow(double tau) {
  FlowConfig c;
  c.tau = tau;
  return c;
}

double relative_allowance(const WentzellEnergy& e, const PairFunction& u0, const PairFunction& v0, double T,
                          const FlowConfig& cfg) {
  const double C = std::max(estimate_tau_allowance(e, u0, T, cfg), estimate_tau_allowance(e, v0, T, cfg));
  return C * cfg.tau / sup_pair_norm(u0 - v0);
}

}  // namespace

TEST(Report, FinalizeAndMerge) {
  VerificationReport r;
  r.tolerance = 0.5;
  r.residuals = {0.1, 0.4, 0.2};
  r.finalize();
  EXPECT_EQ(r.worst, 0.4);
  EXPECT_TRUE(r.passed);
  VerificationReport other;
  other.residuals = {0.9};
  other.tolerance = 0.5;
  other.finalize();
  EXPECT_FALSE(other.passed);
  r.merge(other);
  r.finalize();
  EXPECT_FALSE(r.passed);
  VerificationReport empty;
  empty.finalize();
  EXPECT_TRUE(empty.passed);
}

TEST(Sampler, Reproducible) {
  Sampler a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    differs = differs || x != c.uniform();
  }
  EXPECT_TRUE(differs);
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  Sampler s1(7), s2(7);
  const auto p1 = random_pair(s1, g), p2 = random_pair(s2, g);
  EXPECT_EQ((p1.u - p2.u).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(p1.u.cwiseAbs().maxCoeff(), 1.0);
  const auto ex = random_vector_exponent(s1, g, 2.0, 4.0);
  EXPECT_GE(ex.p_min.min(), 2.0);
  EXPECT_LE(ex.p_max.max(), 4.0);
}

TEST(RunJobs, SlotsIndependentOfThreads) {
  std::vector<double> a(37), b(37);
  run_jobs(a.size(), [&](std::size_t i) { a[i] = std::sqrt(static_cast<double>(i)); }, 1);
  run_jobs(b.size(), [&](std::size_t i) { b[i] = std::sqrt(static_cast<double>(i)); }, 4);
  EXPECT_EQ(a, b);
}

TEST(Checks, IdenticalData) {
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const auto e = make_energy(g, 2.0, 4.0, 1);
  Sampler s(3);
  const auto u = random_pair(s, g);
  const auto cfg = flow(0.01);
  const auto r_o = ExponentField::constant(g.num_nodes(), 3.0);
  const auto r_g = ExponentField::constant(g.num_boundary(), 3.0);
  EXPECT_EQ(check_order_preserving(e, u, u, 0.05, cfg).worst, 0.0);
  EXPECT_EQ(check_nonexpansive(e, u, u, r_o, r_g, 0.05, cfg).worst, 0.0);
  EXPECT_EQ(check_submarkovian(e, u, u, 0.05, cfg).worst, 0.0);
  EXPECT_EQ(check_dissipation(e, u, u, 2.0, 0.05, cfg).worst, 0.0);
  const auto fit = fit_decay(e, u, u, {0.01, 0.02, 0.03, 0.04}, cfg);
  EXPECT_TRUE(fit.identical);
}

TEST(Checks, OrderShiftedData) {
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const auto e = make_energy(g, 2.0, 3.5, 5);
  Sampler s(11);
  const auto u0 = random_pair(s, g);
  const auto v0 = PairFunction::conforming(g, (u0.u.array() + 0.5).matrix());
  const auto cfg = flow(0.01);
  const auto r = check_order_preserving(e, u0, v0, 1.0, cfg);
  EXPECT_EQ(r.residuals.size(), 101u);
  EXPECT_TRUE(r.passed) << r.worst;
  EXPECT_THROW(check_order_preserving(e, v0, u0, 0.1, cfg), std::invalid_argument);
}

TEST(Checks, OrderMinMax) {
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const auto e = make_energy(g, 2.0, 4.0, 6);
  Sampler s(12);
  const auto cfg = flow(0.02);
  for (int k = 0; k < 3; ++k) {
    const auto a = random_pair(s, g), b = random_pair(s, g);
    const auto lo = PairFunction::conforming(g, a.u.cwiseMin(b.u));
    const auto hi = PairFunction::conforming(g, a.u.cwiseMax(b.u));
    const auto r = check_order_preserving(e, lo, hi, 0.2, cfg, relative_allowance(e, lo, hi, 0.2, cfg));
    EXPECT_TRUE(r.passed) << r.worst;
  }
}

TEST(Checks, NonexpansiveConstantR) {
  const Grid g = build_grid(2, {1, 1}, {11, 11});
  const auto e = make_energy(g, 2.0, 4.0, 8);
  Sampler s(13);
  const auto cfg = flow(0.01);
  const auto r_o = ExponentField::constant(g.num_nodes(), 2.0);
  const auto r_g = ExponentField::constant(g.num_boundary(), 2.0);
  for (int k = 0; k < 3; ++k) {
    const auto u0 = random_pair(s, g), v0 = random_pair(s, g, 0.5);
    const auto r = check_nonexpansive(e, u0, v0, r_o, r_g, 0.2, cfg, relative_allowance(e, u0, v0, 0.2, cfg));
    EXPECT_TRUE(r.passed) << r.worst << " vs " << r.tolerance;
    EXPECT_LE(r.values.at("final_norm"), r.values.at("initial_norm") * (1 + r.tolerance));
  }
}

TEST(Checks, NonexpansiveVariableR) {
  const Grid g = build_grid(2, {1, 1}, {11, 11});
  const auto e = make_energy(g, 2.0, 4.0, 9);
  Sampler s(14);
  const auto cfg = flow(0.01);
  auto rf = [](const std::array<double, 3>& x) { return 2.5 + 0.5 * std::sin(std::numbers::pi * x[0]); };
  const ExponentField r_o(sample_nodes(g, rf));
  const ExponentField r_g(sample_boundary(g, rf));
  for (int k = 0; k < 3; ++k) {
    const auto u0 = random_pair(s, g), v0 = random_pair(s, g, 0.5);
    const auto r = check_nonexpansive(e, u0, v0, r_o, r_g, 0.2, cfg, relative_allowance(e, u0, v0, 0.2, cfg));
    EXPECT_TRUE(r.passed) << r.worst << " vs " << r.tolerance;
  }
}

TEST(Checks, SubmarkovianConstants) {
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const auto e = make_energy(g, 2.0, 4.0, 10);
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const auto one = PairFunction::conforming(g, Field::Ones(n));
  const auto cfg = flow(0.02);
  const auto r = check_submarkovian(e, PairFunction::zero(g), one, 0.5, cfg);
  EXPECT_TRUE(r.passed) << r.worst;
  Sampler s(15);
  const auto u0 = random_pair(s, g), v0 = random_pair(s, g);
  const auto r2 = check_submarkovian(e, u0, v0, 0.3, cfg, relative_allowance(e, u0, v0, 0.3, cfg));
  EXPECT_TRUE(r2.passed) << r2.worst;
}

TEST(Checks, Dissipation) {
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const auto e = make_energy(g, 2.0, 4.0, 16);
  Sampler s(17);
  const auto cfg = flow(0.01);
  for (double rv : {2.0, 4.0}) {
    const auto u0 = random_pair(s, g), v0 = random_pair(s, g);
    const auto r = check_dissipation(e, u0, v0, rv, 0.2, cfg);
    EXPECT_TRUE(r.passed) << rv << ": " << r.worst;
  }
  EXPECT_THROW(check_dissipation(e, PairFunction::zero(g), PairFunction::zero(g), 1.5, 0.1, cfg), std::invalid_argument);
}

TEST(Checks, EnergyDecayAndAccretive) {
  const Grid g = build_grid(3, {1, 1, 1}, {6, 6, 6});
  const auto e = make_energy(g, 2.0, 4.0, 18);
  Sampler s(19);
  const auto u0 = random_pair(s, g), v0 = random_pair(s, g);
  EXPECT_TRUE(check_energy_decay(e, u0, 0.1, flow(0.01)).passed);
  const auto r = check_sup_accretive(e, u0, v0, {1e-3, 1e-2, 1e-1, 1.0}, flow(0.01));
  EXPECT_EQ(r.residuals.size(), 4u);
  EXPECT_TRUE(r.passed) << r.worst;
}

TEST(Fits, TooFewSamples) {
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const auto e = make_energy(g, 2.0, 2.0, 20);
  Sampler s(21);
  const auto u0 = random_pair(s, g), v0 = random_pair(s, g);
  EXPECT_THROW(fit_decay(e, u0, v0, {0.01, 0.02, 0.03}, flow(0.01)), std::runtime_error);
}

TEST(Fits, LinearScalingSlope) {
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const auto e = make_energy(g, 2.0, 2.0, 22);
  Sampler s(23);
  const auto u0 = random_pair(s, g), v0 = random_pair(s, g);
  const auto r_o = ExponentField::constant(g.num_nodes(), 2.0);
  const auto r_g = ExponentField::constant(g.num_boundary(), 2.0);
  const auto st = scaling_study(e, u0, v0, {1, 0.5, 0.25, 0.125}, 0.1, flow(0.01), r_o, r_g, 2);
  EXPECT_NEAR(st.slope, 1.0, 1e-6);
}

TEST(Fits, HolderDecay) {
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const auto e = make_energy(g, 4.0, 4.0, 24);
  Sampler s(25);
  const auto u0 = random_pair(s, g, 4.0), v0 = PairFunction::zero(g);
  const auto r_o = ExponentField::constant(g.num_nodes(), 2.0);
  const auto r_g = ExponentField::constant(g.num_boundary(), 2.0);
  BranchInputs in;
  in.b = in.c = 4.0;
  const auto bundle = ultracontractivity_params(in, UnknownConstants{});
  std::vector<double> times;
  for (int k = 1; k <= 8; ++k) times.push_back(0.01 * std::pow(2.0, k - 1) / 2.0);
  const auto cfg = flow(0.005);
  const auto f = fit_ultracontractivity(e, u0, v0, r_o, r_g, times, cfg, bundle, {1, 0.5, 0.25}, 0.2);
  EXPECT_EQ(f.decay.samples, 8);
  EXPECT_TRUE(std::isfinite(f.decay.kappa_fit));
  EXPECT_GT(f.c_fit_bound, 0.0);
  EXPECT_LE(f.scaling.slope, 1.0 + 1e-9);
  EXPECT_NEAR(f.gamma, std::ldexp(1.0, -8), 1e-14);
}

TEST(LogSobolev, ConstantField) {
  const Grid g = build_grid(2, {1, 1}, {9, 9});
  const auto ex = VectorExponent::constant(g, 2.0, 2.0);
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const auto fit = check_logsobolev(g, {Field::Ones(n)}, ex, false, {0.5, 1.0}, {0.1, 0.5, 1.0});
  EXPECT_TRUE(fit.finite);
  EXPECT_NEAR(fit.c_fit[0], 0.0, 1e-9);
}

TEST(LogSobolev, FiniteAndStableUnderRefinement) {
  auto field = [](const std::array<double, 3>& x) { return 1.0 + 0.5 * std::cos(std::numbers::pi * x[0]) * std::sin(2.0 * x[1]); };
  std::vector<double> fits;
  for (int n : {17, 33}) {
    const Grid g = build_grid(2, {1, 1}, {n, n});
    const auto ex = VectorExponent::constant(g, 2.5, 2.5);
    const auto fit = check_logsobolev(g, {sample_nodes(g, field)}, ex, false, {0.1}, {0.05, 0.2, 0.5, 1.0});
    EXPECT_TRUE(fit.finite);
    fits.push_back(fit.c_fit[0]);
    const auto fb = check_logsobolev(g, {sample_nodes(g, field)}, ex, true, {0.1}, {0.05, 0.2, 0.5, 1.0});
    EXPECT_TRUE(fb.finite);
  }
  EXPECT_NEAR(fits[1] / fits[0], 1.0, 0.2);
}
