#include <gtest/gtest.h>

#include "helpers.hpp"
#include "modent/errors.hpp"

using namespace modent;
using modent::th::max_abs;

namespace {

// Frame-level structural identities of a purification.
void expect_pure_structure(const PureSpace& p) {
  const Eigen::MatrixXd& im = p.i_frame();
  const int N = p.real_dim();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N, N);
  EXPECT_LT(max_abs(im * im + id), 1e-12) << "i+^2 = -1";
  EXPECT_LT(max_abs(im.transpose() * im - id), 1e-12) << "i+ is tau+-orthogonal";
  // sigma+ restricted to K (+) 0 reproduces D
  const int m = p.padded_dim();
  EXPECT_LT(max_abs(-im.topLeftCorner(m, m) - p.D_frame()), 1e-12);
  // polar pieces
  const Eigen::MatrixXd& c = p.C_frame();
  EXPECT_LT(max_abs(c * p.absD_frame() - p.D_frame()), 1e-12);
  EXPECT_LT(max_abs(c * c + Eigen::MatrixXd::Identity(m, m)), 1e-12);
}

}  // namespace

TEST(Purification, OscillatorStructure) {
  auto p = PureSpace::purify(oscillator_space({2.0, 3.0}));
  EXPECT_EQ(p->real_dim(), 8);
  EXPECT_FALSE(p->padded());
  expect_pure_structure(*p);
  // |D| eigenvalues 1/m_j, each twice
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p->absD_frame());
  EXPECT_NEAR(es.eigenvalues()(0), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(es.eigenvalues()(3), 0.5, 1e-14);
}

TEST(Purification, OddKernelIsPadded) {
  auto p = PureSpace::purify(abelian_space({1.0, 2.0, 3.0}));
  EXPECT_TRUE(p->padded());
  EXPECT_EQ(p->padded_dim(), 4);
  EXPECT_EQ(p->real_dim(), 8);
  expect_pure_structure(*p);
}

TEST(Purification, OddKernelWithoutPaddingThrows) {
  PurifyOptions o;
  o.auto_pad = false;
  EXPECT_THROW(PureSpace::purify(abelian_space({1.0}), o), OddKernel);
}

TEST(Purification, InvalidSpaceThrows) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 0, 1.2, -1.2, 0;
  EXPECT_THROW(PureSpace::purify(SymplecticHilbertSpace(Eigen::MatrixXd::Identity(2, 2), sigma)),
               NormViolation);
}

TEST(Purification, FrameRoundTripAndLengths) {
  Rng rng(5);
  auto p = PureSpace::purify(random_space(rng, 3));
  ASSERT_TRUE(p->padded());
  const Eigen::VectorXd u = random_vector(rng, 6);
  const Eigen::VectorXd y = p->to_frame(u);
  EXPECT_EQ(y.size(), 8);
  const Eigen::VectorXd back = p->from_frame(y).coords;
  EXPECT_LT((back.head(3) - u.head(3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((back.segment(4, 3) - u.tail(3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(p->to_frame(Eigen::VectorXd::Zero(5)), DimensionMismatch);
}

TEST(Purification, ComplexScalarIsHermitian) {
  Rng rng(6);
  auto p = PureSpace::purify(random_space(rng, 4));
  const VectorKplus f(random_vector(rng, 8)), g(random_vector(rng, 8));
  const auto fg = complex_scalar(*p, f, g), gf = complex_scalar(*p, g, f);
  EXPECT_NEAR(fg.re, gf.re, 1e-12);
  EXPECT_NEAR(fg.im, -gf.im, 1e-12);
  // <f, i g> = i <f, g>
  const VectorKplus ig = p->from_frame(p->i_frame() * p->to_frame(g));
  const auto fig = complex_scalar(*p, f, ig);
  EXPECT_NEAR(fig.re, -fg.im, 1e-10);
  EXPECT_NEAR(fig.im, fg.re, 1e-10);
}

TEST(Purification, SigmaPlusExtendsSigma) {
  Rng rng(8);
  const auto sp = random_space(rng, 4);
  auto p = PureSpace::purify(sp);
  const Eigen::VectorXd f = random_vector(rng, 4), g = random_vector(rng, 4);
  const auto v = complex_scalar(*p, VectorKplus(f), VectorKplus(g));
  EXPECT_NEAR(v.re, f.dot(sp.tau_gram() * g), 1e-10);
  EXPECT_NEAR(v.im, f.dot(sp.sigma_form() * g), 1e-10);
}

TEST(PurificationProperty, RandomSpacesBecomePure) {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 7;
    Eigen::VectorXd norms(n / 2);
    for (int k = 0; k < n / 2; ++k)
      norms(k) = (trial % 3 == 0 && k == 0) ? 0.0 : (trial % 3 == 1 ? 1.0 : random_uniform(rng, 0.05, 0.95));
    auto p = PureSpace::purify(random_space_with_norms(rng, n, norms));
    expect_pure_structure(*p);
    EXPECT_EQ(p->real_dim() % 4, 0);
  }
}

TEST(PurificationProperty, UserBasisOperatorsAgree) {
  Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sp = random_space(rng, 4);
    auto p = PureSpace::purify(sp);
    // sigma(f, g) = tau(f, D g) in user coordinates
    EXPECT_LT(max_abs(sp.tau_gram() * p->D() - sp.sigma_form()), 1e-10);
    const Eigen::MatrixXd i = p->i_matrix();
    EXPECT_LT(max_abs(i * i + Eigen::MatrixXd::Identity(8, 8)), 1e-10);
  }
}
