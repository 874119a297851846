#include "modent/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "modent/errors.hpp"

namespace modent {

using std::numbers::pi;

// ---------------------------------------------------------------------------
// Probes

class SmoothProbe::Impl {
 public:
  virtual ~Impl() = default;
  virtual Kind kind() const = 0;
  virtual double value(double x) const = 0;
  virtual double derivative(double x) const = 0;
  virtual std::pair<double, double> support() const = 0;
  std::vector<double> breaks;
};

namespace {

class BumpImpl : public SmoothProbe::Impl {
 public:
  BumpImpl(double c, double w, double a) : c_(c), w_(w), a_(a) {
    breaks = {c - w, c + w};
  }
  SmoothProbe::Kind kind() const override { return SmoothProbe::Kind::Bump; }
  double value(double x) const override {
    const double u = (x - c_) / w_;
    if (std::abs(u) >= 1.0) return 0.0;
    return a_ * std::exp(-1.0 / (1.0 - u * u));
  }
  double derivative(double x) const override {
    const double u = (x - c_) / w_;
    if (std::abs(u) >= 1.0) return 0.0;
    const double q = 1.0 - u * u;
    return a_ * std::exp(-1.0 / q) * (-2.0 * u / (q * q)) / w_;
  }
  std::pair<double, double> support() const override { return {c_ - w_, c_ + w_}; }

 private:
  double c_, w_, a_;
};

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

class PolyImpl : public SmoothProbe::Impl {
 public:
  PolyImpl(std::vector<double> knots, std::vector<std::vector<double>> coeffs)
      : knots_(std::move(knots)), d_(std::move(coeffs)) {
    if (knots_.size() < 2 || d_.size() + 1 != knots_.size())
      throw ConfigError("piecewise polynomial needs k+1 knots for k pieces");
    if (!std::is_sorted(knots_.begin(), knots_.end()) ||
        std::adjacent_find(knots_.begin(), knots_.end()) != knots_.end())
      throw ConfigError("piecewise polynomial knots must be strictly increasing");
    for (const auto& c : d_) {
      std::vector<double> ic(c.size() + 1, 0.0);
      for (std::size_t j = 0; j < c.size(); ++j) ic[j + 1] = c[j] / static_cast<double>(j + 1);
      integ_.push_back(std::move(ic));
    }
    offset_.assign(d_.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < d_.size(); ++k) {
      offset_[k] = acc - horner(integ_[k], knots_[k]);
      acc = offset_[k] + horner(integ_[k], knots_[k + 1]);
    }
    total_ = acc;
    breaks = knots_;
  }
  SmoothProbe::Kind kind() const override { return SmoothProbe::Kind::PiecewisePolynomial; }
  double value(double x) const override {
    if (x < knots_.front()) return 0.0;
    if (x >= knots_.back()) return total_;
    const std::size_t k = piece(x);
    return offset_[k] + horner(integ_[k], x);
  }
  double derivative(double x) const override {
    if (x < knots_.front() || x >= knots_.back()) return 0.0;
    return horner(d_[piece(x)], x);
  }
  std::pair<double, double> support() const override { return {knots_.front(), knots_.back()}; }

 private:
  std::size_t piece(double x) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    return static_cast<std::size_t>(it - knots_.begin()) - 1;
  }
  std::vector<double> knots_;
  std::vector<std::vector<double>> d_, integ_;
  std::vector<double> offset_;
  double total_ = 0.0;
};

class SampledImpl : public SmoothProbe::Impl {
 public:
  SampledImpl(double x0, double dx, std::vector<double> v)
      : x0_(x0), x1_(x0 + dx * static_cast<double>(v.size() - 1)),
        spline_(v.data(), v.size(), x0, dx, 0.0, 0.0) {
    for (std::size_t k = 0; k < v.size(); ++k) breaks.push_back(x0 + dx * static_cast<double>(k));
  }
  SmoothProbe::Kind kind() const override { return SmoothProbe::Kind::Sampled; }
  double value(double x) const override {
    if (x < x0_ || x > x1_) return 0.0;
    return spline_(x);
  }
  double derivative(double x) const override {
    if (x < x0_ || x > x1_) return 0.0;
    return spline_.prime(x);
  }
  std::pair<double, double> support() const override { return {x0_, x1_}; }

 private:
  double x0_, x1_;
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline_;
};

}  // namespace

SmoothProbe SmoothProbe::bump(double center, double halfwidth, double amplitude) {
  if (!(halfwidth > 0.0)) throw ConfigError("bump half-width must be positive");
  return SmoothProbe(std::make_shared<BumpImpl>(center, halfwidth, amplitude));
}

SmoothProbe SmoothProbe::piecewise_polynomial(std::vector<double> knots,
                                              std::vector<std::vector<double>> coeffs) {
  return SmoothProbe(std::make_shared<PolyImpl>(std::move(knots), std::move(coeffs)));
}

SmoothProbe SmoothProbe::sampled(double x0, double dx, std::vector<double> values) {
  if (values.size() < 4) throw ConfigError("sampled probe needs at least 4 samples");
  if (!(dx > 0.0)) throw ConfigError("sample spacing must be positive");
  return SmoothProbe(std::make_shared<SampledImpl>(x0, dx, std::move(values)));
}

SmoothProbe::Kind SmoothProbe::kind() const { return impl_->kind(); }

std::string SmoothProbe::kind_name() const {
  switch (kind()) {
    case Kind::Bump: return "bump";
    case Kind::PiecewisePolynomial: return "piecewise_polynomial";
    case Kind::Sampled: return "sampled";
  }
  return "unknown";
}

double SmoothProbe::value(double x) const { return impl_->value(x); }
double SmoothProbe::derivative(double x) const { return impl_->derivative(x); }
std::pair<double, double> SmoothProbe::support() const { return impl_->support(); }
const std::vector<double>& SmoothProbe::breakpoints() const { return impl_->breaks; }

// ---------------------------------------------------------------------------
// Quadrature

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureParams& q, const std::vector<double>& splits) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts{a};
  for (double s : splits)
    if (s > a && s < b) pts.push_back(s);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  double total = 0.0, err_total = 0.0, l1_total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double err = 0.0, l1 = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, pts[k], pts[k + 1], q.max_depth, q.rel_tol, &err, &l1);
    err_total += err;
    l1_total += l1;
  }
  if (!std::isfinite(total) || err_total > std::max(q.abs_tol, q.rel_tol * l1_total)) {
    std::ostringstream os;
    os << "quadrature on [" << a << ", " << b << "] reached error " << err_total
       << " (integral " << total << ")";
    throw QuadratureFailure(os.str());
  }
  return total;
}

// ---------------------------------------------------------------------------
// U(1)

double Reparam::h(double t) const {
  switch (kind) {
    case Kind::Identity: return t;
    case Kind::Affine: return a * t + b;
    case Kind::Cubic: return t + c * t * t * t;
  }
  return t;
}

double Reparam::h1(double t) const {
  switch (kind) {
    case Kind::Identity: return 1.0;
    case Kind::Affine: return a;
    case Kind::Cubic: return 1.0 + 3.0 * c * t * t;
  }
  return 1.0;
}

double Reparam::h2(double t) const {
  return kind == Kind::Cubic ? 6.0 * c * t : 0.0;
}

std::string Reparam::name() const {
  switch (kind) {
    case Kind::Identity: return "identity";
    case Kind::Affine: return "affine";
    case Kind::Cubic: return "cubic";
  }
  return "unknown";
}

namespace {

// Kernel w(d), d = h(t) - x >= 0, and its first two derivatives.
struct Kernel {
  std::optional<double> beta;
  double w(double d) const {
    if (!beta) return 2.0 * pi * d;
    return -*beta * std::expm1(-2.0 * pi * d / *beta);
  }
  double w1(double d) const {
    if (!beta) return 2.0 * pi;
    return 2.0 * pi * std::exp(-2.0 * pi * d / *beta);
  }
  double w2(double d) const {
    if (!beta) return 0.0;
    return -(2.0 * pi) * (2.0 * pi) / *beta * std::exp(-2.0 * pi * d / *beta);
  }
};

template <class W>
double weighted_energy(const SmoothProbe& f, double upper, W&& weight,
                       const QuadratureParams& q) {
  const auto [lo, hi] = f.support();
  const double top = std::min(upper, hi);
  if (!(top > lo)) return 0.0;
  return integrate(
      [&](double x) {
        const double d = f.derivative(x);
        return d * d * weight(x);
      },
      lo, top, q, f.breakpoints());
}

void check_beta(const U1Params& p) {
  if (p.beta && !(*p.beta > 0.0)) throw ConfigError("beta must be positive");
}

}  // namespace

double u1_vacuum_entropy(const SmoothProbe& f, double t, const QuadratureParams& q) {
  return u1_tf(f, t, t, U1Params{}, q);
}

double u1_kms_entropy(const SmoothProbe& f, double t, double beta, const QuadratureParams& q) {
  return u1_tf(f, t, t, U1Params{beta, Reparam::identity()}, q);
}

double u1_tf(const SmoothProbe& f, double s, double t, const U1Params& p,
             const QuadratureParams& q) {
  check_beta(p);
  const Kernel k{p.beta};
  const double ht = p.reparam.h(t);
  const double up = std::min(p.reparam.h(s), ht);
  return weighted_energy(f, up, [&](double x) { return k.w(ht - x); }, q);
}

double u1_entropy(const SmoothProbe& f, double t, const U1Params& p, const QuadratureParams& q) {
  return u1_tf(f, t, t, p, q);
}

double u1_first_derivative(const SmoothProbe& f, double t, const U1Params& p,
                           const QuadratureParams& q) {
  check_beta(p);
  const Kernel k{p.beta};
  const double ht = p.reparam.h(t);
  return p.reparam.h1(t) * weighted_energy(f, ht, [&](double x) { return k.w1(ht - x); }, q);
}

SecondDerivativeTerms u1_second_derivative_terms(const SmoothProbe& f, double t,
                                                 const U1Params& p,
                                                 const QuadratureParams& q) {
  check_beta(p);
  const Kernel k{p.beta};
  const double ht = p.reparam.h(t);
  const double h1 = p.reparam.h1(t);
  const double h2 = p.reparam.h2(t);
  const double fp = f.derivative(ht);
  SecondDerivativeTerms out;
  out.boundary = h1 * h1 * fp * fp * k.w1(0.0);
  double bulk = 0.0;
  if (h2 != 0.0) bulk += h2 * weighted_energy(f, ht, [&](double x) { return k.w1(ht - x); }, q);
  if (p.beta) bulk += h1 * h1 * weighted_energy(f, ht, [&](double x) { return k.w2(ht - x); }, q);
  out.bulk = bulk;
  return out;
}

// ---------------------------------------------------------------------------
// Finite-dimensional models

double arcoth(double m) {
  if (std::abs(m - 1.0) <= 1e-12) return std::numeric_limits<double>::infinity();
  return 0.5 * std::log((m + 1.0) / (m - 1.0));
}

SymplecticHilbertSpace oscillator_space(const std::vector<double>& m) {
  const int n = static_cast<int>(m.size());
  if (n == 0) throw DimensionMismatch("oscillator needs at least one mode");
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    if (m[static_cast<std::size_t>(j)] < 1.0 - 1e-12)
      throw ConfigError("oscillator eigenvalues must be >= 1");
    tau(2 * j, 2 * j) = tau(2 * j + 1, 2 * j + 1) = m[static_cast<std::size_t>(j)];
    sigma(2 * j, 2 * j + 1) = 1.0;
    sigma(2 * j + 1, 2 * j) = -1.0;
  }
  return SymplecticHilbertSpace(tau, sigma);
}

Eigen::MatrixXd oscillator_modes(int n, const std::vector<bool>& in_e) {
  if (static_cast<int>(in_e.size()) != n) throw DimensionMismatch("mode mask has wrong length");
  std::vector<int> cols;
  for (int j = 0; j < n; ++j)
    if (in_e[static_cast<std::size_t>(j)]) {
      cols.push_back(2 * j);
      cols.push_back(2 * j + 1);
    }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) g(cols[k], static_cast<Eigen::Index>(k)) = 1.0;
  return g;
}

EntropyValue oscillator_entropy(const std::vector<double>& m, const std::vector<bool>& in_e,
                                const Eigen::VectorXd& f) {
  const std::size_t n = m.size();
  if (in_e.size() != n || static_cast<std::size_t>(f.size()) != 2 * n)
    throw DimensionMismatch("oscillator data lengths disagree");
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!in_e[j]) continue;
    const double a2 = f(2 * j) * f(2 * j) + f(2 * j + 1) * f(2 * j + 1);
    if (a2 == 0.0) continue;
    const double ac = arcoth(m[j]);
    if (std::isinf(ac)) return EntropyValue::inf();
    s += 2.0 * ac * a2;
  }
  return EntropyValue::finite(s);
}

SymplecticHilbertSpace abelian_space(const std::vector<double>& mu) {
  const int n = static_cast<int>(mu.size());
  if (n == 0) throw DimensionMismatch("abelian space needs at least one point");
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    if (!(mu[static_cast<std::size_t>(j)] > 0.0))
      throw ConfigError("abelian weights must be positive");
    tau(j, j) = mu[static_cast<std::size_t>(j)];
  }
  return SymplecticHilbertSpace(tau, Eigen::MatrixXd::Zero(n, n));
}

double abelian_entropy(const std::vector<double>& mu, const std::vector<bool>& in_y,
                       const Eigen::VectorXd& im_f) {
  if (in_y.size() != mu.size() || static_cast<std::size_t>(im_f.size()) != mu.size())
    throw DimensionMismatch("abelian data lengths disagree");
  double s = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j)
    if (in_y[j]) s += mu[j] * im_f(static_cast<Eigen::Index>(j)) * im_f(static_cast<Eigen::Index>(j));
  return 2.0 * s;
}

VectorKplus complex_vector(const PureSpace& pure, const Eigen::VectorXd& re,
                           const Eigen::VectorXd& im) {
  if (re.size() != pure.base_dim() || im.size() != pure.base_dim())
    throw DimensionMismatch("real and imaginary parts must live in K");
  const Eigen::VectorXd y = pure.to_frame(re) + pure.i_frame() * pure.to_frame(im);
  return pure.from_frame(y);
}

// ---------------------------------------------------------------------------
// Galerkin discretization

namespace {

// Cardinal cubic B-spline on [0, 4] and its derivative.
double bspline(double x) {
  if (x <= 0.0 || x >= 4.0) return 0.0;
  if (x < 1.0) return x * x * x / 6.0;
  if (x < 2.0) return (-3.0 * x * x * x + 12.0 * x * x - 12.0 * x + 4.0) / 6.0;
  if (x < 3.0) return (3.0 * x * x * x - 24.0 * x * x + 60.0 * x - 44.0) / 6.0;
  const double y = 4.0 - x;
  return y * y * y / 6.0;
}

double bspline_prime(double x) {
  if (x <= 0.0 || x >= 4.0) return 0.0;
  if (x < 1.0) return x * x / 2.0;
  if (x < 2.0) return (-9.0 * x * x + 24.0 * x - 12.0) / 6.0;
  if (x < 3.0) return (9.0 * x * x - 48.0 * x + 60.0) / 6.0;
  const double y = 4.0 - x;
  return -y * y / 2.0;
}

// int M(y) M'(y - k) dy, exact (piecewise degree 5, 4-point Gauss per unit cell).
double spline_sigma_entry(int k) {
  double s = 0.0;
  for (int cell = 0; cell < 4; ++cell) {
    s += boost::math::quadrature::gauss<double, 4>::integrate(
        [k](double y) { return bspline(y) * bspline_prime(y - k); }, cell, cell + 1.0);
  }
  return s;
}

double sinc(double u) {
  if (std::abs(u) < 1e-4) return 1.0 - u * u / 6.0;
  return std::sin(u) / u;
}

}  // namespace

double spline_tau_entry(int k, double spacing, std::optional<double> beta) {
  // (4/pi) int_0^inf u w(2u/spacing) cos(2ku) sinc(u)^8 du, w = 1 (vacuum)
  // or 1/(1 - exp(-beta p)).
  const double upper = 120.0;
  const int ak = std::max(1, std::abs(k));
  const double width = std::min(0.25, pi / (4.0 * ak));
  const int panels = static_cast<int>(std::ceil(upper / width));
  auto integrand = [&](double u) {
    double uw = u;
    if (beta) uw = u / -std::expm1(-2.0 * *beta * u / spacing);
    const double s = sinc(u);
    const double s2 = s * s;
    const double s4 = s2 * s2;
    return uw * std::cos(2.0 * k * u) * s4 * s4;
  };
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    total += boost::math::quadrature::gauss<double, 20>::integrate(integrand, p * width,
                                                                   (p + 1) * width);
  }
  return 4.0 / pi * total;
}

DiscretizedU1 discretize_u1(int resolution, double a, double b, std::optional<double> beta,
                            const QuadratureParams& q) {
  (void)q;
  if (resolution < 4) throw ConfigError("resolution must be at least 4");
  if (!(b > a)) throw ConfigError("window must satisfy a < b");
  if (beta && !(*beta > 0.0)) throw ConfigError("beta must be positive");
  const int n = resolution;
  const double dx = (b - a) / n;

  std::vector<double> tau_k(static_cast<std::size_t>(n)), sigma_k(4, 0.0);
  for (int k = 0; k < n; ++k) tau_k[static_cast<std::size_t>(k)] = spline_tau_entry(k, dx, beta);
  for (int k = 0; k < 4; ++k) sigma_k[static_cast<std::size_t>(k)] = spline_sigma_entry(k);

  Eigen::MatrixXd tau(n, n), sigma = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int k = std::abs(i - j);
      tau(i, j) = tau_k[static_cast<std::size_t>(k)];
      if (k < 4) {
        // sigma(b_i, b_j) = int M(y - i) M'(y - j) dy; antisymmetric in (i, j).
        const double v = sigma_k[static_cast<std::size_t>(k)];
        sigma(i, j) = (j >= i) ? v : -v;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tau, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    std::ostringstream os;
    os << "spline Gram matrix has eigenvalue range [" << lo << ", " << hi << "]";
    throw IllConditionedGram(os.str());
  }

  DiscretizedU1 out{SymplecticHilbertSpace(tau, sigma), a, b, dx, n, beta, {}};
  for (int i = 0; i < n; ++i) out.supports.emplace_back(a + i * dx, a + (i + 4) * dx);
  return out;
}

Eigen::MatrixXd DiscretizedU1::generators(double t) const {
  std::vector<int> idx;
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  for (std::size_t i = 0; i < supports.size(); ++i)
    if (supports[i].second <= t + slack) idx.push_back(static_cast<int>(i));
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(resolution, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) g(idx[k], static_cast<Eigen::Index>(k)) = 1.0;
  return g;
}

double DiscretizedU1::basis_value(int i, double x) const {
  return bspline((x - supports[static_cast<std::size_t>(i)].first) / spacing);
}

Eigen::VectorXd DiscretizedU1::project_probe(const SmoothProbe& f,
                                             const QuadratureParams& q) const {
  const int n = resolution;
  Eigen::VectorXd r(n);
  const auto [flo, fhi] = f.support();
  for (int i = 0; i < n; ++i) {
    const double lo = std::max(flo, supports[static_cast<std::size_t>(i)].first);
    const double hi = std::min(fhi, supports[static_cast<std::size_t>(i)].second);
    std::vector<double> splits = f.breakpoints();
    for (int c = 1; c < 4; ++c) splits.push_back(supports[static_cast<std::size_t>(i)].first + c * spacing);
    r(i) = integrate([&](double x) { return basis_value(i, x) * f.derivative(x); }, lo, hi, q,
                     splits);
  }
  // sigma(b_i, f_N) = (sigma c)_i.
  const Eigen::MatrixXd& s = space.sigma_form();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(s);
  const Eigen::VectorXd c = cod.solve(r);
  const double resid = (s * c - r).norm();
  if (resid > 1e-8 * std::max(1.0, r.norm())) {
    std::ostringstream os;
    os << "probe pairing cannot be reproduced in the spline space (residual " << resid << ")";
    throw NumericalError(os.str());
  }
  return c;
}

}  // namespace modent
