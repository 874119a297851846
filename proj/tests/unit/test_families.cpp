#include <gtest/gtest.h>

#include "helpers.hpp"
#include "modent/errors.hpp"

using namespace modent;

namespace {

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> g;
  for (int k = 0; k < n; ++k) g.push_back(a + (b - a) * k / (n - 1));
  return g;
}

MatrixFamilyPtr two_mode_pair() {
  auto pure = PureSpace::purify(oscillator_space({2.0, 3.0}));
  return two_point_family(pure, th::two_mode_l0(), Eigen::MatrixXd::Identity(4, 4), 0.5, {0.0, 1.0});
}

}  // namespace

TEST(Families, SpectralFamilyEntropyCountsActiveModes) {
  auto fam = spectral_family({2.0, 3.0}, {1.0, 4.0});
  Eigen::VectorXd f(4);
  f << 1, 0, 0, 1;
  const VectorKplus v(f);
  EXPECT_NEAR(fam->entropy(v, 1.5).value, 0.0, 1e-14);
  EXPECT_NEAR(fam->entropy(v, 2.5).value, 2 * arcoth(2.0), 1e-10);
  EXPECT_NEAR(fam->entropy(v, 3.5).value, 2 * arcoth(2.0) + 2 * arcoth(3.0), 1e-10);
  EXPECT_NEAR(fam->tf(v, 2.5, 3.5).value, 2 * arcoth(2.0), 1e-10);
  EXPECT_NO_THROW(fam->attest_monotone(16));
}

TEST(Families, CacheReusesPipelines) {
  auto fam = spectral_family({2.0, 3.0}, {1.0, 4.0});
  fam->at(2.2);
  fam->at(2.7);
  EXPECT_EQ(fam->cache_size(), 1u);
  fam->at(3.2);
  EXPECT_EQ(fam->cache_size(), 2u);
}

TEST(Families, DecreasingFamilyIsRejected) {
  auto pure = PureSpace::purify(oscillator_space({2.0, 3.0}));
  auto fam = std::make_shared<MatrixFamily>(
      pure, [](double t) { return t < 0.5 ? Eigen::MatrixXd::Identity(4, 4) : oscillator_modes(2, {true, false}); },
      Domain{0.0, 1.0});
  EXPECT_THROW(fam->attest_monotone(8), NotIncreasing);
}

TEST(Families, TwoModeDeltaAndDmpFailure) {
  auto fam = two_mode_pair();
  Eigen::VectorXd f(4);
  f << 0.7, 0, -1.1, 0;
  const VectorKplus v(f);
  const double delta = fam->entropy(v, 1.0).value - fam->tf(v, 0.0, 1.0).value;
  EXPECT_NEAR(delta, (1.21 - 0.49) * std::log(2.0), 1e-10);
  const DmpReport r = dmp_check(*fam, 0.0, 1.0);
  EXPECT_FALSE(r.holds);
  EXPECT_GT(r.residual, 0.1);
}

TEST(Families, SpectralFamilyIsInDifferentialModularPosition) {
  auto fam = spectral_family({1.5, 2.0, 3.0}, {1.0, 4.0});
  for (auto [s, t] : std::vector<std::pair<double, double>>{{1.7, 2.5}, {2.5, 3.5}, {1.2, 3.9}}) {
    const DmpReport r = dmp_check(*fam, s, t, 32, 1e-8, 5);
    EXPECT_TRUE(r.holds) << s << " " << t << " residual " << r.residual;
  }
}

TEST(Families, TableIsIdenticalAcrossThreadCounts) {
  const U1Surface s(SmoothProbe::bump(), U1Params{2.0, Reparam::identity()}, {-2, 2});
  const auto g = grid(-1, 1, 9);
  const TfTable a = t_table(s, g, g, 1), b = t_table(s, g, g, 4);
  for (Eigen::Index i = 0; i < a.values.size(); ++i) EXPECT_EQ(a.values(i), b.values(i));
}

TEST(Families, TableRejectsUnsortedGrid) {
  const U1Surface s(SmoothProbe::bump(), {}, {-2, 2});
  EXPECT_THROW(t_table(s, {0.0, -1.0}, {0.0}), ConfigError);
}

TEST(Properties, VacuumSpectralAndKmsPass) {
  const auto g = grid(-1.2, 1.2, 12);
  for (std::optional<double> beta : {std::optional<double>{}, std::optional<double>{1.0}}) {
    const U1Surface s(SmoothProbe::bump(), U1Params{beta, Reparam::identity()}, {-2, 2});
    EXPECT_TRUE(property_suite(t_table(s, g, g)).all_passed());
  }
  Eigen::VectorXd f(6);
  f << 0.3, 1, -0.4, 0.2, 1.1, 0.5;
  const MatrixSurface ms(spectral_family({1.5, 2.0, 4.0}, {1.0, 5.0}), VectorKplus(f));
  const auto h = grid(1.1, 4.9, 12);
  const PropertyReport r = property_suite(t_table(ms, h, h));
  EXPECT_TRUE(r.all_passed());
  EXPECT_EQ(r.checks.size(), 5u);
}

TEST(Properties, TwoModePairViolatesSMonotonicity) {
  Eigen::VectorXd f(4);
  f << 1, 0, 0, 0;
  const MatrixSurface ms(two_mode_pair(), VectorKplus(f));
  const PropertyReport r = property_suite(t_table(ms, {0.25, 0.75}, {0.25, 0.75}));
  ASSERT_NE(r.find("s_monotone"), nullptr);
  EXPECT_FALSE(r.find("s_monotone")->passed);
  EXPECT_NEAR(r.find("s_monotone")->worst_slack, -std::log(2.0), 1e-9);
  EXPECT_TRUE(r.find("t_monotone")->passed);
  EXPECT_TRUE(r.find("cplus_constant")->passed);
}

TEST(Properties, InfiniteCellsAreCounted) {
  Eigen::VectorXd f(4);
  f << 1, 0, 0, 0;
  const MatrixSurface ms(spectral_family({1.0, 2.0}, {0.5, 3.0}), VectorKplus(f));
  const TfTable t = t_table(ms, {0.8, 1.5, 2.5}, {0.8, 1.5, 2.5});
  EXPECT_TRUE(t.is_infinite(2, 2));
  EXPECT_FALSE(t.is_infinite(0, 0));
  EXPECT_GT(property_suite(t).infinite_cells, 0);
}

TEST(Derivatives, VacuumMatchesBoundaryTerm) {
  const SmoothProbe f = SmoothProbe::bump();
  const U1Surface s(f, {}, {-2, 2});
  for (double t : {-0.6, 0.1, 0.5}) {
    const DerivativeReport r = derivative_report(s, t, {1e-3});
    const double want = 2 * M_PI * f.derivative(t) * f.derivative(t);
    EXPECT_NEAR(r.d2S_dt2, want, 1e-3 * want);
    EXPECT_NEAR(r.d2T_dt2_minus, 0.0, 1e-6);
    EXPECT_NEAR(r.bound_residual_upper, 0.0, 1e-5);
    EXPECT_GT(r.bound_residual_lower, -1e-5);
  }
}

TEST(Derivatives, KmsSplitMatches) {
  const SmoothProbe f = SmoothProbe::bump();
  const U1Params p{1.0, Reparam::identity()};
  const U1Surface s(f, p, {-2, 2});
  for (double t : {-0.4, 0.3}) {
    const DerivativeReport r = derivative_report(s, t, {1e-3});
    const auto terms = u1_second_derivative_terms(f, t, p);
    EXPECT_NEAR(r.d2S_dt2, terms.total(), 1e-3 * std::abs(terms.total()));
    EXPECT_NEAR(r.d2T_dt2_minus, terms.bulk, 1e-3 * std::abs(terms.bulk));
  }
}

TEST(Derivatives, StencilOutsideDomainThrows) {
  const U1Surface s(SmoothProbe::bump(), {}, {-2, 2});
  EXPECT_THROW(derivative_report(s, 1.999, {1e-2}), StencilOutOfDomain);
}

TEST(Derivatives, JumpsAreDetected) {
  Eigen::VectorXd f(4);
  f << 1, 0, 1, 0;
  const MatrixSurface ms(spectral_family({2.0, 3.0}, {1.0, 4.0}), VectorKplus(f));
  EXPECT_THROW(derivative_report(ms, 2.0005, {1e-3}), JumpOnStencil);
}

TEST(Derivatives, InfiniteStencilThrows) {
  Eigen::VectorXd f(2);
  f << 1, 0;
  const MatrixSurface ms(spectral_family({1.0}, {0.0, 2.0}), VectorKplus(f));
  EXPECT_THROW(derivative_report(ms, 1.0, {1e-3}), InfiniteOnStencil);
}

TEST(AbelianLine, ValueIsImaginaryPartIntegral) {
  const SmoothProbe g = SmoothProbe::piecewise_polynomial({0, 1}, {{1}});  // Im f = x on [0,1], then 1
  const AbelianLineSurface s(g, {-1, 3});
  // 2 int_0^t x^2 for t <= 1
  EXPECT_NEAR(s.value(0.5, 2.0).value, 2 * 0.125 / 3, 1e-12);
  // beyond the support Im f stays at 1
  EXPECT_NEAR(s.entropy(2.0).value, 2 * (1.0 / 3 + 1.0), 1e-12);
  EXPECT_EQ(s.value(-0.5, 2.0).value, 0.0);
}

TEST(DiscretizedFamily, GapToClosedFormShrinks) {
  const SmoothProbe f = SmoothProbe::bump();
  const double exact = u1_vacuum_entropy(f, 0.5);
  double prev = 1e300;
  for (int n : {16, 32}) {
    const DiscretizedU1 d = discretize_u1(n, -6, 2, std::nullopt);
    auto fam = discretized_u1_family(d);
    const double s = fam->entropy(VectorKplus(d.project_probe(f)), 0.5).value;
    EXPECT_LT(s, exact);
    EXPECT_LT(exact - s, prev);
    prev = exact - s;
  }
}
