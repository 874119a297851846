#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "modent/models.hpp"
#include "modent/modular.hpp"

namespace modent {

using Domain = std::pair<double, double>;

/// The two-variable surface T_f(s, t) of a family and a fixed probe.
class TfSurface {
 public:
  virtual ~TfSurface() = default;
  virtual EntropyValue value(double s, double t) const = 0;
  virtual EntropyValue entropy(double t) const { return value(t, t); }
  virtual Domain domain() const = 0;
  virtual std::string description() const = 0;
};

/// Increasing family t -> L_t given by generator matrices (columns are user
/// coordinates of K). Entropy pipelines are cached per distinct subspace;
/// the cache is safe for concurrent readers (insert-once).
class MatrixFamily {
 public:
  using Generator = std::function<Eigen::MatrixXd(double)>;

  MatrixFamily(PureSpacePtr pure, Generator gen, Domain domain, double tol = kDefaultRelTol);

  const PureSpacePtr& pure() const { return pure_; }
  Domain domain() const { return domain_; }
  double tol() const { return tol_; }
  Eigen::MatrixXd generators(double t) const { return gen_(t); }

  std::shared_ptr<const EntropyPipeline> at(double t) const;
  EntropyValue entropy(const VectorKplus& f, double t) const;
  /// S_t(Q_s f) for s < t, S_t(f) otherwise.
  EntropyValue tf(const VectorKplus& f, double s, double t) const;

  /// Checks span(L_s) within span(L_t) on `samples` sorted points. Returns the
  /// worst containment defect; throws NotIncreasing above the tolerance.
  double attest_monotone(int samples, double tol = 1e-8);
  bool monotone_attested() const { return attested_; }
  std::size_t cache_size() const;

 private:
  PureSpacePtr pure_;
  Generator gen_;
  Domain domain_;
  double tol_;
  bool attested_ = false;
  mutable std::mutex mu_;
  mutable std::map<std::vector<double>, std::shared_ptr<const EntropyPipeline>> cache_;
};

using MatrixFamilyPtr = std::shared_ptr<MatrixFamily>;

/// A generator set switched on at `threshold`: present for t > threshold
/// (or t >= threshold when inclusive).
struct FamilyStep {
  double threshold;
  Eigen::MatrixXd generators;
};

MatrixFamilyPtr step_family(PureSpacePtr pure, std::vector<FamilyStep> steps, Domain domain,
                            bool inclusive = false, double tol = kDefaultRelTol);

/// Oscillator with M = diag(m): L_t = E(-inf, t) K, i.e. modes with m_j < t.
MatrixFamilyPtr spectral_family(const std::vector<double>& m, Domain domain);

/// L_t = L0 for t <= switch_at, L1 after.
MatrixFamilyPtr two_point_family(PureSpacePtr pure, const Eigen::MatrixXd& l0,
                                 const Eigen::MatrixXd& l1, double switch_at, Domain domain);

/// Galerkin U(1) family: splines supported left of t.
MatrixFamilyPtr discretized_u1_family(const DiscretizedU1& disc);

class MatrixSurface : public TfSurface {
 public:
  MatrixSurface(MatrixFamilyPtr family, VectorKplus f, std::string label = "matrix family")
      : family_(std::move(family)), f_(std::move(f)), label_(std::move(label)) {}
  EntropyValue value(double s, double t) const override { return family_->tf(f_, s, t); }
  Domain domain() const override { return family_->domain(); }
  std::string description() const override { return label_; }
  const MatrixFamilyPtr& family() const { return family_; }
  const VectorKplus& probe() const { return f_; }

 private:
  MatrixFamilyPtr family_;
  VectorKplus f_;
  std::string label_;
};

/// Closed-form U(1) surfaces (vacuum, KMS, reparametrized).
class U1Surface : public TfSurface {
 public:
  U1Surface(SmoothProbe f, U1Params params, Domain domain, QuadratureParams q = {})
      : f_(std::move(f)), p_(params), domain_(domain), q_(q) {}
  EntropyValue value(double s, double t) const override {
    return EntropyValue::finite(u1_tf(f_, s, t, p_, q_));
  }
  Domain domain() const override { return domain_; }
  std::string description() const override;
  const SmoothProbe& probe() const { return f_; }
  const U1Params& params() const { return p_; }

 private:
  SmoothProbe f_;
  U1Params p_;
  Domain domain_;
  QuadratureParams q_;
};

/// L_t = L^2_R(-inf, t) inside L^2_C(R): T_f(s, t) = 2 int^{min(s,t)} (Im f)^2,
/// with the probe giving Im f.
class AbelianLineSurface : public TfSurface {
 public:
  AbelianLineSurface(SmoothProbe im_f, Domain domain, QuadratureParams q = {})
      : g_(std::move(im_f)), domain_(domain), q_(q) {}
  EntropyValue value(double s, double t) const override;
  Domain domain() const override { return domain_; }
  std::string description() const override { return "abelian half-line family"; }

 private:
  SmoothProbe g_;
  Domain domain_;
  QuadratureParams q_;
};

struct TfTable {
  std::vector<double> s_grid, t_grid;
  Eigen::MatrixXd values;            // rows: s, cols: t
  std::vector<char> infinite;        // row-major s * nt + t
  Eigen::VectorXd entropy_diagonal;  // S_t(f) on t_grid
  std::vector<char> diagonal_infinite;

  bool is_infinite(std::size_t i, std::size_t j) const { return infinite[i * t_grid.size() + j]; }
  double max_finite() const;
};

/// Grids must be sorted. Cells are computed independently; `threads` > 1
/// fills them in parallel with identical results.
TfTable t_table(const TfSurface& surface, const std::vector<double>& s_grid,
                const std::vector<double>& t_grid, int threads = 1);

struct DmpReport {
  double s = 0.0, t = 0.0;
  double residual = 0.0;
  double tol = 0.0;
  bool holds = true;
  int dim_plus = 0, dim_minus = 0;
  int samples = 0;
  /// The density condition is automatic in finite dimensions.
  bool density_vacuous = true;
};

DmpReport dmp_check(const MatrixFamily& family, double s, double t, int num_samples = 32,
                    double tol = 1e-8, std::uint64_t seed = 0);

struct DerivativeOptions {
  std::optional<double> h;  // default 1e-3 * domain length
  double jump_factor = 1e3;
};

struct DerivativeReport {
  double t = 0.0, h = 0.0, eps = 0.0;
  double S = 0.0;
  double dS_dt = 0.0;
  double d2S_dt2 = 0.0;
  double d2T_dt2_minus = 0.0;   // s = t - eps
  double d2T_dsdt_minus = 0.0;
  double d2T_ds2_minus = 0.0;
  double d2T_dt2_plus = 0.0;    // s = t + eps
  /// d2T/dt2(t + eps) - d2S/dt2; vanishes up to truncation error.
  double bound_residual_upper = 0.0;
  /// d2S/dt2 - [d2T/dt2 + d2T/ds2](t - eps); nonnegative up to tolerance.
  double bound_residual_lower = 0.0;
  /// d2S/dt2 - d2T/dt2(t - eps); nonnegative for families with C^1 surfaces.
  double bound_residual_lower_smooth = 0.0;
};

DerivativeReport derivative_report(const TfSurface& surface, double t,
                                   const DerivativeOptions& opts = {});

struct PropertyCheck {
  std::string name;
  bool passed = true;
  double worst_slack = 0.0;  // most negative slack found (or largest defect for constancy)
  long violations = 0;
  std::string first_violation;
};

struct PropertyReport {
  double tol = 0.0;
  long infinite_cells = 0;
  std::vector<PropertyCheck> checks;
  bool all_passed() const;
  const PropertyCheck* find(const std::string& name) const;
};

/// Monotonicity in t and s, constancy on s >= t, diagonal monotonicity and
/// the rectangle inequality on every grid rectangle. tol <= 0 selects
/// 1e-8 * (1 + max T).
PropertyReport property_suite(const TfTable& table, double tol = 0.0);

}  // namespace modent
