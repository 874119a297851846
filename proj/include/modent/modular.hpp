#pragma once

#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "modent/subspace.hpp"

namespace modent {

/// Tomita-Takesaki data of the standard part Ls = La + Lf inside
/// LsPlus = LaPlus + LfPlus. Block matrices (suffix _c) act on the
/// coordinates of the orthonormal frame basis E of LsPlus; the *_frame()
/// accessors embed them in K+ (zero on L0plus and Linf).
struct ModularData {
  std::shared_ptr<const Decomposition> dec;
  Eigen::MatrixXd E;        // frame basis of LsPlus, columns [LaPlus | LfPlus]
  Eigen::MatrixXd S_c;      // Tomita operator: fixes Ls, negates i+ Ls
  Eigen::VectorXd lambda;   // eigenvalues of Delta, ascending
  Eigen::MatrixXd V;        // orthonormal eigenvectors of Delta
  Eigen::MatrixXd Delta_c;
  Eigen::MatrixXd J_c;
  Eigen::MatrixXd K_c;      // -log Delta

  int standard_dim() const { return static_cast<int>(E.cols()); }
  Eigen::MatrixXd embed(const Eigen::MatrixXd& block) const { return E * block * E.transpose(); }
  Eigen::MatrixXd Delta_frame() const { return embed(Delta_c); }
  Eigen::MatrixXd J_frame() const { return embed(J_c); }
  Eigen::MatrixXd K_frame() const { return embed(K_c); }
  Eigen::MatrixXd S_frame() const { return embed(S_c); }
  /// Spectrum of log Delta (ascending).
  Eigen::VectorXd log_delta_spectrum() const;
};

ModularData modular_data(std::shared_ptr<const Decomposition> dec);
inline ModularData modular_data(const Decomposition& dec) {
  return modular_data(std::make_shared<const Decomposition>(dec));
}

/// c(lambda) = sqrt(lambda / (1 - exp(-lambda))), with c(0) = 1.
double c_function(double lambda);

/// Frame coordinates f -> U(x) f = exp(-i+ x K) f. Throws InfiniteComponent
/// if f has a component in Linf.
VectorKplus modular_flow(const ModularData& md, double x, const VectorKplus& f);
Eigen::MatrixXd modular_flow_matrix(const ModularData& md, double x);

struct EntropyValue {
  bool infinite = false;
  double value = 0.0;

  static EntropyValue finite(double v) { return {false, v}; }
  static EntropyValue inf() { return {true, 0.0}; }
  bool is_finite() const { return !infinite; }
  std::string to_string() const;
};

/// R = c(K)(1 - J)c(K) on LsPlus, zero on L0plus; Linf is tracked separately.
struct EntropyForm {
  PureSpacePtr pure;
  Eigen::MatrixXd R;              // frame coordinates
  Eigen::MatrixXd cK2;            // c(K)^2, frame coordinates (zero off LsPlus)
  Eigen::MatrixXd P_inf;          // projector onto Linf, frame coordinates
  double infinity_threshold = 1e-8;

  Eigen::MatrixXd R_user() const { return pure->operator_to_user(R); }
  /// S(h) for h in K+ (any accepted length); Infinite if h has an Linf part.
  EntropyValue value(const VectorKplus& h) const;
  EntropyValue value_frame(const Eigen::VectorXd& y) const;
  /// Polarized form S(f, g) = tau+(f, R g), ignoring Linf.
  double bilinear_frame(const Eigen::VectorXd& yf, const Eigen::VectorXd& yg) const {
    return yf.dot(R * yg);
  }
};

EntropyForm entropy_form(const ModularData& md);

/// S(g - f).
EntropyValue relative_entropy(const EntropyForm& form, const VectorKplus& g,
                              const VectorKplus& f);

/// P_f through a(Delta_f) + J b(Delta_f), a = 1/(1 - lambda), b = sqrt(lambda) a,
/// in frame coordinates.
Eigen::MatrixXd pf_via_modular(const ModularData& md, double tol = 1e-9);

/// Convenience: space, subspace generators -> entropy form.
struct EntropyPipeline {
  PureSpacePtr pure;
  std::shared_ptr<const Decomposition> dec;
  ModularData md;
  EntropyForm form;
};

EntropyPipeline entropy_pipeline(const PureSpacePtr& pure, const Subspace& L,
                                 double tol = kDefaultRelTol);

/// Residuals of the modular identities on one pipeline.
struct ModularChecks {
  double tomita_fixed = 0.0;      // |S v - v| on the Ls basis
  double tomita_square = 0.0;     // |S^2 - 1| on LsPlus
  double J_square = 0.0;
  double J_delta_J = 0.0;         // |J Delta J - Delta^{-1}|
  double J_antilinear = 0.0;      // |J i+ + i+ J|
  double J_orthogonal = 0.0;
  double delta_complex_linear = 0.0;
  double R_symmetry = 0.0;
  double R_min_eigenvalue = 0.0;
  double R_minus_cK2_norm = 0.0;  // should not exceed 1
  double R_kills_Lprime = 0.0;    // R on a basis of (i+ L)^perp
};

ModularChecks check_modular(const EntropyPipeline& p);

}  // namespace modent
