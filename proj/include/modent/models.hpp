#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "modent/core_spaces.hpp"
#include "modent/modular.hpp"

namespace modent {

// ---------------------------------------------------------------------------
// Probes: compactly supported test functions on the line, with derivative.

class SmoothProbe {
 public:
  enum class Kind { Bump, PiecewisePolynomial, Sampled };

  /// amplitude * exp(-1 / (1 - u^2)), u = (x - center) / halfwidth.
  static SmoothProbe bump(double center = 0.0, double halfwidth = 1.0, double amplitude = 1.0);
  /// f' is the polynomial sum_j coeffs[k][j] x^j on [knots[k], knots[k+1]) and
  /// zero outside; f(x) is the integral of f' from knots.front().
  static SmoothProbe piecewise_polynomial(std::vector<double> knots,
                                          std::vector<std::vector<double>> derivative_coeffs);
  /// Cubic B-spline through equally spaced samples starting at x0; zero outside.
  static SmoothProbe sampled(double x0, double dx, std::vector<double> values);

  Kind kind() const;
  std::string kind_name() const;
  double value(double x) const;
  double derivative(double x) const;
  /// Interval outside of which f' vanishes.
  std::pair<double, double> support() const;
  /// Points where the probe may be non-smooth (quadrature splits there).
  const std::vector<double>& breakpoints() const;

  class Impl;

 private:
  explicit SmoothProbe(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// Quadrature.

struct QuadratureParams {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  unsigned max_depth = 18;
};

/// Adaptive Gauss-Kronrod over [a, b], split at the given interior points.
/// Throws QuadratureFailure if the error estimate misses the tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureParams& q = {}, const std::vector<double>& splits = {});

// ---------------------------------------------------------------------------
// U(1) current on the line: vacuum, KMS and reparametrized half-line families.

/// Strictly increasing parameter change h(t).
struct Reparam {
  enum class Kind { Identity, Affine, Cubic };
  Kind kind = Kind::Identity;
  double a = 1.0;  // affine: a t + b
  double b = 0.0;
  double c = 0.0;  // cubic: t + c t^3, c >= 0

  static Reparam identity() { return {}; }
  static Reparam affine(double a, double b) { return {Kind::Affine, a, b, 0.0}; }
  static Reparam cubic(double c) { return {Kind::Cubic, 1.0, 0.0, c}; }

  double h(double t) const;
  double h1(double t) const;
  double h2(double t) const;
  std::string name() const;
};

struct U1Params {
  std::optional<double> beta;  // empty: vacuum
  Reparam reparam;

  bool vacuum() const { return !beta.has_value(); }
};

/// 2 pi int_{-inf}^t (t - x) f'(x)^2 dx.
double u1_vacuum_entropy(const SmoothProbe& f, double t, const QuadratureParams& q = {});
/// int_{-inf}^t f'(x)^2 beta (1 - exp(2 pi (x - t) / beta)) dx.
double u1_kms_entropy(const SmoothProbe& f, double t, double beta, const QuadratureParams& q = {});
/// T_f(s, t): the same integrands with upper limit min(s, t); reparametrized
/// families evaluate at h(s), h(t).
double u1_tf(const SmoothProbe& f, double s, double t, const U1Params& p,
             const QuadratureParams& q = {});
double u1_entropy(const SmoothProbe& f, double t, const U1Params& p,
                  const QuadratureParams& q = {});

struct SecondDerivativeTerms {
  double boundary = 0.0;  // d^2 T / ds dt at s = t - 0
  double bulk = 0.0;      // d^2 T / dt^2 at s = t - 0
  double total() const { return boundary + bulk; }
};

SecondDerivativeTerms u1_second_derivative_terms(const SmoothProbe& f, double t,
                                                 const U1Params& p,
                                                 const QuadratureParams& q = {});
/// dS/dt in closed form (h'(t) int f'^2 w'(h - x) dx).
double u1_first_derivative(const SmoothProbe& f, double t, const U1Params& p,
                           const QuadratureParams& q = {});

// ---------------------------------------------------------------------------
// Finite-dimensional models.

/// arcoth(m) = 0.5 log((m + 1) / (m - 1)); +inf for m within 1e-12 of 1.
double arcoth(double m);

/// C^n with sigma = Im(f, g), tau = Re(f, M g), M = diag(m); coordinates
/// (Re f_1, Im f_1, Re f_2, ...).
SymplecticHilbertSpace oscillator_space(const std::vector<double>& m);
/// Real generators (columns) of E K for the modes selected by `in_e`.
Eigen::MatrixXd oscillator_modes(int n, const std::vector<bool>& in_e);
/// 2 sum_{j in E} arcoth(m_j) |f_j|^2, f given as 2n reals.
EntropyValue oscillator_entropy(const std::vector<double>& m, const std::vector<bool>& in_e,
                                const Eigen::VectorXd& f);

/// L^2 over a finite sample set with weights mu, sigma = 0.
SymplecticHilbertSpace abelian_space(const std::vector<double>& mu);
/// 2 sum_{x in Y} mu(x) (Im f(x))^2.
double abelian_entropy(const std::vector<double>& mu, const std::vector<bool>& in_y,
                       const Eigen::VectorXd& im_f);
/// The vector re + i+ im of K+ (re, im in K).
VectorKplus complex_vector(const PureSpace& pure, const Eigen::VectorXd& re,
                           const Eigen::VectorXd& im);

// ---------------------------------------------------------------------------
// Galerkin discretization of the U(1) current on a window.

struct DiscretizedU1 {
  SymplecticHilbertSpace space;
  double a = 0.0, b = 0.0, spacing = 0.0;
  int resolution = 0;
  std::optional<double> beta;
  /// Support [left, right] of each cubic B-spline basis function.
  std::vector<std::pair<double, double>> supports;

  /// Basis functions supported in (-inf, t], as columns of unit vectors.
  Eigen::MatrixXd generators(double t) const;
  double basis_value(int i, double x) const;
  /// Coefficients of a vector whose symplectic pairing with every basis
  /// function matches that of the probe: sigma(b_i, f_N) = int b_i f'.
  Eigen::VectorXd project_probe(const SmoothProbe& f, const QuadratureParams& q = {}) const;
};

/// resolution N = number of knot intervals of width (b - a) / N; the basis is
/// the N cubic B-splines whose supports start at a knot in [a, b).
DiscretizedU1 discretize_u1(int resolution, double a, double b, std::optional<double> beta,
                            const QuadratureParams& q = {});

/// tau entry between B-splines whose centers are k spacings apart.
double spline_tau_entry(int k, double spacing, std::optional<double> beta);

}  // namespace modent
