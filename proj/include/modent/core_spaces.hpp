#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace modent {

/// Relative tolerance used for symmetry, rank and norm decisions unless a
/// space overrides it.
inline constexpr double kDefaultRelTol = 1e-10;

/// Coordinates of a vector of K in the basis the space was described in.
struct VectorK {
  Eigen::VectorXd coords;

  VectorK() = default;
  explicit VectorK(Eigen::VectorXd c) : coords(std::move(c)) {}
  Eigen::Index size() const { return coords.size(); }
};

/// A finite-dimensional real space K carrying the inner product tau and the
/// antisymmetric form sigma, both given as Gram matrices in an arbitrary
/// (not necessarily tau-orthonormal) basis:
///
///   tau(f, g)   = f^T * tau_gram * g
///   sigma(f, g) = f^T * sigma_form * g
///
/// Construction only checks shapes; use validate_space() for the
/// positivity, antisymmetry and |sigma| <= tau conditions.
class SymplecticHilbertSpace {
 public:
  SymplecticHilbertSpace(Eigen::MatrixXd tau_gram, Eigen::MatrixXd sigma_form,
                         std::optional<double> rel_tol = std::nullopt);

  int dim() const { return static_cast<int>(tau_.rows()); }
  const Eigen::MatrixXd& tau_gram() const { return tau_; }
  const Eigen::MatrixXd& sigma_form() const { return sigma_; }

  /// Relative tolerance (dimensionless).
  double rel_tol() const { return rel_tol_; }
  /// Absolute tolerance for Gram-matrix entries: rel_tol * largest tau eigenvalue.
  double abs_tol() const { return abs_tol_; }

 private:
  Eigen::MatrixXd tau_;
  Eigen::MatrixXd sigma_;
  double rel_tol_;
  double abs_tol_;
};

struct ValidationReport {
  bool is_valid = false;
  double worst_symmetry_defect = 0.0;
  double worst_antisymmetry_defect = 0.0;
  double min_tau_eigenvalue = 0.0;
  /// Largest singular value of D, where sigma(f,g) = tau(f, D g), in tau-norm.
  double operator_norm_D = 0.0;
  int kernel_dim = 0;
  /// ker D is odd-dimensional; purification appends one tau-orthonormal
  /// direction on which sigma vanishes.
  bool padding_required = false;
  std::vector<std::string> messages;
};

ValidationReport validate_space(const SymplecticHilbertSpace& space,
                                std::optional<double> rel_tol = std::nullopt);

/// Placement of one summand inside a direct sum.
struct IndexMap {
  int offset = 0;
  int dim = 0;

  VectorK embed(const VectorK& f, int total_dim) const;
  VectorK extract(const VectorK& f) const;
};

struct DirectSum {
  SymplecticHilbertSpace space;
  std::vector<IndexMap> maps;
};

/// Block-diagonal sum of valid spaces. Throws InvalidSummand otherwise.
DirectSum direct_sum(std::span<const SymplecticHilbertSpace> spaces);

struct FormValues {
  double tau = 0.0;
  double sigma = 0.0;
};

FormValues eval_forms(const SymplecticHilbertSpace& space, const VectorK& f,
                      const VectorK& g);

/// sigma = tau^{-1/2} sigma tau^{-1/2} in a tau-orthonormal frame; exposed
/// for validation and tests.
Eigen::MatrixXd normalized_sigma(const SymplecticHilbertSpace& space);

}  // namespace modent
