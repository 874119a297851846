#pragma once

#include <vector>

#include <Eigen/Dense>

#include "modent/purification.hpp"

namespace modent {

/// Real-linear subspace of K+. The basis is stored in the tau+-orthonormal
/// frame of the owning PureSpace, so the columns are plainly orthonormal.
class Subspace {
 public:
  Subspace() = default;
  Subspace(PureSpacePtr pure, Eigen::MatrixXd frame_basis);

  static Subspace zero(PureSpacePtr pure);
  static Subspace whole(PureSpacePtr pure);

  const PureSpacePtr& pure() const { return pure_; }
  int dim() const { return static_cast<int>(frame_.cols()); }
  const Eigen::MatrixXd& frame_basis() const { return frame_; }
  /// Basis in the user's doubled coordinates (tau+-orthonormal columns).
  Eigen::MatrixXd basis() const;
  /// Orthogonal projector, frame coordinates.
  Eigen::MatrixXd projector() const { return frame_ * frame_.transpose(); }

 private:
  PureSpacePtr pure_;
  Eigen::MatrixXd frame_;
};

/// Orthonormal basis of the column span of `gens` (frame coordinates);
/// singular values below tol * largest are discarded.
Subspace span_frame(const PureSpacePtr& pure, const Eigen::MatrixXd& gens,
                    double tol = kDefaultRelTol);
Subspace span(const PureSpacePtr& pure, const std::vector<VectorKplus>& generators,
              double tol = kDefaultRelTol);
/// Same, for columns in user coordinates (length n, 2n or 2m).
Subspace span_columns(const PureSpacePtr& pure, const Eigen::MatrixXd& gens,
                      double tol = kDefaultRelTol);

Subspace sum(const Subspace& a, const Subspace& b, double tol = kDefaultRelTol);
Subspace intersect(const Subspace& a, const Subspace& b, double tol = kDefaultRelTol);
/// {w in `within` : w orthogonal to a}.
Subspace complement(const Subspace& a, const Subspace& within, double tol = kDefaultRelTol);
Subspace orthogonal_complement(const Subspace& a, double tol = kDefaultRelTol);
/// i+ applied to every basis vector.
Subspace i_image(const Subspace& a);
/// a + i+ a, with the projector averaged over i+ so the result is exactly invariant.
Subspace complexify(const Subspace& a, double tol = kDefaultRelTol);
/// Largest distance of a unit vector of `a` from `b` (sine of the largest angle).
double containment_defect(const Subspace& a, const Subspace& b);

/// Symplectic complement inside K (+) 0 of a subspace L of K (+) 0.
Subspace symplectic_complement(const PureSpacePtr& pure, const Subspace& L,
                               double tol = kDefaultRelTol);

/// K (+) 0 as a subspace.
Subspace base_subspace(const PureSpacePtr& pure);

/// Four-way split of K+ attached to a subspace L of K. All matrices are in
/// frame coordinates; the *_user() helpers convert.
struct Decomposition {
  PureSpacePtr pure;
  double tol = kDefaultRelTol;
  Subspace L;
  Subspace Lprime;  // symplectic complement of L inside K (+) 0
  Subspace L0plus, LaPlus, LfPlus, Linf;
  Subspace La, Lf;
  Subspace LfPrime;  // Lf' inside LfPlus, the kernel of P_f
  Eigen::MatrixXd P_a;
  Eigen::MatrixXd P_f;
  Eigen::MatrixXd Q;

  Eigen::MatrixXd P_a_user() const { return pure->operator_to_user(P_a); }
  Eigen::MatrixXd P_f_user() const { return pure->operator_to_user(P_f); }
  Eigen::MatrixXd Q_user() const { return pure->operator_to_user(Q); }
};

/// Generators may have length n (embedded as f (+) 0), 2n or 2m, but must
/// lie in K (+) 0; otherwise NotInBaseSpace.
Decomposition decompose(const PureSpacePtr& pure, const std::vector<VectorKplus>& generators,
                        double tol = kDefaultRelTol);
Decomposition decompose(const PureSpacePtr& pure, const Subspace& L,
                        double tol = kDefaultRelTol);

struct Components {
  VectorKplus g0, ga, gf, ginf;
};

/// Splits g along the four mutually orthogonal complex blocks.
Components project_components(const Decomposition& dec, const VectorKplus& g);

/// Largest |<b_i, b_j>+| over pairs drawn from different blocks.
double orthogonality_certificate(const Decomposition& dec);

/// Residuals of the structural identities of a decomposition (all should be
/// at round-off level).
struct DecompositionChecks {
  double orthogonality = 0.0;     // cross-block <b_i, b_j>+
  int dim_total = 0;              // sum of the four complex blocks
  double invariance = 0.0;        // |(1 - P) i+ P| over the four blocks
  double P_a_idempotent = 0.0;
  double P_f_idempotent = 0.0;
  double Q_idempotent = 0.0;
  double Q_kills_Lprime = 0.0;    // Q on a basis of (i+ L)^perp
  double P_f_fixes_Lf = 0.0;
  double P_f_kills_LfPrime = 0.0;
  double L_reconstruction = 0.0;  // L versus La + Lf + Linf, both directions
};

DecompositionChecks check_decomposition(const Decomposition& dec);

}  // namespace modent
