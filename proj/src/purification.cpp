#include "modent/purification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "modent/errors.hpp"

namespace modent {

namespace {

SymplecticHilbertSpace padded_space(const SymplecticHilbertSpace& s) {
  const int n = s.dim();
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n + 1, n + 1);
  tau.topLeftCorner(n, n) = s.tau_gram();
  tau(n, n) = 1.0;
  sigma.topLeftCorner(n, n) = s.sigma_form();
  return SymplecticHilbertSpace(tau, sigma, s.rel_tol());
}

}  // namespace

PureSpace::PureSpace(SymplecticHilbertSpace base, SymplecticHilbertSpace working,
                     bool padded, PurifyOptions opts)
    : base_(std::move(base)), working_(std::move(working)), padded_(padded), opts_(opts) {}

std::shared_ptr<const PureSpace> PureSpace::purify(const SymplecticHilbertSpace& space,
                                                   const PurifyOptions& opts) {
  const ValidationReport rep = validate_space(space);
  if (!rep.is_valid) {
    std::ostringstream os;
    os << "space is not a symplectic Hilbert space:";
    for (const auto& m : rep.messages) os << ' ' << m << ';';
    if (rep.min_tau_eigenvalue > 0 && rep.operator_norm_D > 1.0)
      throw NormViolation(os.str());
    throw ConfigError(os.str());
  }
  // Singular values of an antisymmetric operator come in pairs, so the
  // kernel has the parity of the dimension.
  const bool need_pad = space.dim() % 2 == 1;
  if (need_pad && !opts.auto_pad)
    throw OddKernel("ker D is odd-dimensional and auto-padding is disabled");
  SymplecticHilbertSpace working = need_pad ? padded_space(space) : space;
  std::shared_ptr<PureSpace> p(new PureSpace(space, std::move(working), need_pad, opts));
  p->build();
  return p;
}

void PureSpace::build() {
  const int m = working_.dim();
  const Eigen::MatrixXd tau = 0.5 * (working_.tau_gram() + working_.tau_gram().transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(tau);
  if (llt.info() != Eigen::Success) throw ConfigError("tau is not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();
  t_ = lower.transpose();
  t_inv_ = t_.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(m, m));

  // D in the frame: L^{-1} sigma L^{-T}, antisymmetrized.
  Eigen::MatrixXd dn = t_inv_.transpose() * working_.sigma_form() * t_inv_;
  dn = 0.5 * (dn - dn.transpose());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dn, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  if (s.size() > 0 && s(0) > 1.0 + opts_.kernel_tol) {
    std::ostringstream os;
    os << "|D| = " << s(0) << " exceeds 1";
    throw NormViolation(os.str());
  }
  int r = 0;
  while (r < m && s(r) > opts_.kernel_tol) ++r;
  if (r % 2 == 1) --r;  // a split pair straddling the threshold goes to the kernel

  const Eigen::MatrixXd ur = svd.matrixU().leftCols(r);
  const Eigen::MatrixXd vr = svd.matrixV().leftCols(r);
  // values within tolerance of 1 are pure directions; sqrt(1 - s^2) would
  // otherwise turn round-off into an O(1e-8) perturbation of i+
  Eigen::VectorXd sr = s.head(r);
  for (Eigen::Index k = 0; k < sr.size(); ++k)
    if (sr(k) >= 1.0 - opts_.kernel_tol) sr(k) = 1.0;
  const Eigen::MatrixXd ker = svd.matrixV().rightCols(m - r);

  absd_frame_ = vr * sr.asDiagonal() * vr.transpose();
  absd_frame_ = 0.5 * (absd_frame_ + absd_frame_.transpose());

  c_frame_ = ur * vr.transpose();
  for (int j = 0; j + 1 < ker.cols(); j += 2) {
    const auto a = ker.col(j);
    const auto b = ker.col(j + 1);
    c_frame_ += b * a.transpose() - a * b.transpose();
  }
  c_frame_ = 0.5 * (c_frame_ - c_frame_.transpose());

  d_frame_ = c_frame_ * absd_frame_;
  d_frame_ = 0.5 * (d_frame_ - d_frame_.transpose());

  const Eigen::VectorXd root = (1.0 - sr.array().square()).max(0.0).sqrt().matrix();
  root_frame_ = vr * root.asDiagonal() * vr.transpose() + ker * ker.transpose();
  root_frame_ = 0.5 * (root_frame_ + root_frame_.transpose());

  const Eigen::MatrixXd cr = c_frame_ * root_frame_;
  i_frame_.resize(2 * m, 2 * m);
  i_frame_.topLeftCorner(m, m) = -d_frame_;
  i_frame_.topRightCorner(m, m) = cr;
  i_frame_.bottomLeftCorner(m, m) = cr;
  i_frame_.bottomRightCorner(m, m) = d_frame_;
  i_frame_ = 0.5 * (i_frame_ - i_frame_.transpose());
}

Eigen::MatrixXd PureSpace::tau_plus() const {
  const int m = padded_dim();
  Eigen::MatrixXd tp = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  tp.topLeftCorner(m, m) = working_.tau_gram();
  tp.bottomRightCorner(m, m) = working_.tau_gram();
  return tp;
}

Eigen::VectorXd PureSpace::to_frame(const Eigen::VectorXd& user) const {
  const int n = base_dim();
  const int m = padded_dim();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * m);
  if (user.size() == n) {
    x.head(n) = user;
  } else if (user.size() == 2 * n) {
    x.head(n) = user.head(n);
    x.segment(m, n) = user.tail(n);
  } else if (user.size() == 2 * m) {
    x = user;
  } else {
    std::ostringstream os;
    os << "vector of length " << user.size() << " does not belong to a space of dimension "
       << n;
    throw DimensionMismatch(os.str());
  }
  Eigen::VectorXd y(2 * m);
  y.head(m) = t_ * x.head(m);
  y.tail(m) = t_ * x.tail(m);
  return y;
}

VectorKplus PureSpace::from_frame(const Eigen::VectorXd& y) const {
  const int m = padded_dim();
  if (y.size() != 2 * m) throw DimensionMismatch("frame vector has wrong length");
  Eigen::VectorXd x(2 * m);
  x.head(m) = t_inv_ * y.head(m);
  x.tail(m) = t_inv_ * y.tail(m);
  return VectorKplus(std::move(x));
}

Eigen::MatrixXd PureSpace::operator_to_user(const Eigen::MatrixXd& op) const {
  const int m = padded_dim();
  Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  Eigen::MatrixXd t2i = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  t2.topLeftCorner(m, m) = t_;
  t2.bottomRightCorner(m, m) = t_;
  t2i.topLeftCorner(m, m) = t_inv_;
  t2i.bottomRightCorner(m, m) = t_inv_;
  return t2i * op * t2;
}

Eigen::MatrixXd PureSpace::operator_to_frame(const Eigen::MatrixXd& op) const {
  const int m = padded_dim();
  Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  Eigen::MatrixXd t2i = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  t2.topLeftCorner(m, m) = t_;
  t2.bottomRightCorner(m, m) = t_;
  t2i.topLeftCorner(m, m) = t_inv_;
  t2i.bottomRightCorner(m, m) = t_inv_;
  return t2 * op * t2i;
}

Eigen::MatrixXd PureSpace::base_block_frame() const {
  const int m = padded_dim();
  const int n = base_dim();
  // Images of the user basis e_1..e_n under T span K (+) 0; orthonormalize.
  Eigen::MatrixXd gens = Eigen::MatrixXd::Zero(2 * m, n);
  gens.topRows(m) = t_.leftCols(n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gens);
  return qr.householderQ() * Eigen::MatrixXd::Identity(2 * m, n);
}

VectorKplus embed(const PureSpace& pure, const VectorK& f) {
  if (f.size() != pure.base_dim())
    throw DimensionMismatch("vector length does not match the base space");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(pure.real_dim());
  x.head(pure.base_dim()) = f.coords;
  return VectorKplus(std::move(x));
}

ComplexScalar complex_scalar(const PureSpace& pure, const VectorKplus& f,
                             const VectorKplus& g) {
  const Eigen::VectorXd yf = pure.to_frame(f);
  const Eigen::VectorXd yg = pure.to_frame(g);
  return {yf.dot(yg), -yf.dot(pure.i_frame() * yg)};
}

}  // namespace modent
