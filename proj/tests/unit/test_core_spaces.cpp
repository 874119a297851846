#include <gtest/gtest.h>

#include "helpers.hpp"
#include "modent/errors.hpp"

using namespace modent;

TEST(CoreSpaces, OscillatorIsValidWithNormBelowOne) {
  const auto r = validate_space(oscillator_space({2.0, 3.0}));
  EXPECT_TRUE(r.is_valid);
  EXPECT_NEAR(r.operator_norm_D, 0.5, 1e-14);  // 1 / min m
  EXPECT_EQ(r.kernel_dim, 0);
  EXPECT_FALSE(r.padding_required);
}

TEST(CoreSpaces, RejectsAsymmetricTau) {
  Eigen::MatrixXd tau(2, 2), sigma = Eigen::MatrixXd::Zero(2, 2);
  tau << 1, 0.5, 0, 1;
  const auto r = validate_space(SymplecticHilbertSpace(tau, sigma));
  EXPECT_FALSE(r.is_valid);
  EXPECT_GT(r.worst_symmetry_defect, 0.1);
}

TEST(CoreSpaces, RejectsSymmetricSigma) {
  Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(2, 2), sigma(2, 2);
  sigma << 0, 0.5, 0.5, 0;
  EXPECT_FALSE(validate_space(SymplecticHilbertSpace(tau, sigma)).is_valid);
}

TEST(CoreSpaces, RejectsSigmaLargerThanTau) {
  Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(2, 2), sigma(2, 2);
  sigma << 0, 1.5, -1.5, 0;
  const auto r = validate_space(SymplecticHilbertSpace(tau, sigma));
  EXPECT_FALSE(r.is_valid);
  EXPECT_NEAR(r.operator_norm_D, 1.5, 1e-12);
}

TEST(CoreSpaces, RejectsIndefiniteTau) {
  Eigen::MatrixXd tau(2, 2), sigma = Eigen::MatrixXd::Zero(2, 2);
  tau << 1, 0, 0, -1;
  const auto r = validate_space(SymplecticHilbertSpace(tau, sigma));
  EXPECT_FALSE(r.is_valid);
  EXPECT_LT(r.min_tau_eigenvalue, 0.0);
}

TEST(CoreSpaces, OddKernelFlagsPadding) {
  const auto r = validate_space(abelian_space({1.0, 2.0, 0.5}));
  EXPECT_TRUE(r.is_valid);
  EXPECT_EQ(r.kernel_dim, 3);
  EXPECT_TRUE(r.padding_required);
}

TEST(CoreSpaces, ShapeMismatchThrows) {
  EXPECT_THROW(SymplecticHilbertSpace(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(3, 3)),
               DimensionMismatch);
}

TEST(CoreSpaces, FormsInUserBasis) {
  Eigen::MatrixXd tau(2, 2), sigma(2, 2);
  tau << 2, 1, 1, 3;
  sigma << 0, 0.7, -0.7, 0;
  SymplecticHilbertSpace sp(tau, sigma);
  Eigen::VectorXd f(2), g(2);
  f << 1, -2;
  g << 0.5, 4;
  const auto v = eval_forms(sp, VectorK(f), VectorK(g));
  EXPECT_DOUBLE_EQ(v.tau, f.dot(tau * g));
  EXPECT_DOUBLE_EQ(v.sigma, f.dot(sigma * g));
}

TEST(CoreSpaces, DirectSumIsBlockDiagonalAndMapsRoundTrip) {
  std::vector<SymplecticHilbertSpace> parts{oscillator_space({2.0}), abelian_space({1.0, 3.0})};
  const DirectSum ds = direct_sum(parts);
  ASSERT_EQ(ds.space.dim(), 4);
  EXPECT_EQ(ds.maps[1].offset, 2);
  EXPECT_DOUBLE_EQ(ds.space.tau_gram()(3, 3), 3.0);
  EXPECT_DOUBLE_EQ(ds.space.tau_gram()(0, 3), 0.0);
  Eigen::VectorXd x(2);
  x << 1.5, -0.5;
  const VectorK e = ds.maps[1].embed(VectorK(x), 4);
  EXPECT_EQ(e.coords(0), 0.0);
  EXPECT_TRUE(ds.maps[1].extract(e).coords.isApprox(x));
}

TEST(CoreSpaces, DirectSumRejectsInvalidSummand) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 0, 2, -2, 0;
  std::vector<SymplecticHilbertSpace> parts{oscillator_space({2.0}),
                                            SymplecticHilbertSpace(Eigen::MatrixXd::Identity(2, 2), sigma)};
  EXPECT_THROW(direct_sum(parts), InvalidSummand);
}

TEST(CoreSpacesProperty, NormalizedSigmaIsAntisymmetricWithPrescribedNorms) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + 2 * (trial % 3);
    Eigen::VectorXd norms(n / 2);
    for (int k = 0; k < n / 2; ++k) norms(k) = random_uniform(rng, 0.05, 0.95);
    const auto sp = random_space_with_norms(rng, n, norms);
    const Eigen::MatrixXd d = normalized_sigma(sp);
    EXPECT_LT(th::max_abs(d + d.transpose()), 1e-12);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
    const Eigen::VectorXd s = svd.singularValues();
    std::vector<double> want(norms.data(), norms.data() + norms.size());
    std::sort(want.rbegin(), want.rend());
    for (int k = 0; k < n / 2; ++k) {
      EXPECT_NEAR(s(2 * k), want[k], 1e-10);
      EXPECT_NEAR(s(2 * k + 1), want[k], 1e-10);
    }
    EXPECT_NEAR(validate_space(sp).operator_norm_D, want[0], 1e-10);
  }
}
