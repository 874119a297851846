#pragma once

#include <memory>

#include <Eigen/Dense>

#include "modent/core_spaces.hpp"

namespace modent {

/// Coordinates of a vector of the doubled space K+ = K (+) K, in the user's
/// basis of K repeated twice (first block: K (+) 0, second block: 0 (+) K).
struct VectorKplus {
  Eigen::VectorXd coords;

  VectorKplus() = default;
  explicit VectorKplus(Eigen::VectorXd c) : coords(std::move(c)) {}
  Eigen::Index size() const { return coords.size(); }
};

struct PurifyOptions {
  bool auto_pad = true;
  /// Singular values of D at or below this value are treated as kernel.
  double kernel_tol = kDefaultRelTol;
};

/// The purification (K+, i+, tau+, sigma+) of a symplectic Hilbert space.
///
/// Internally every operator is stored in the tau+-orthonormal "frame"
/// y = T x with T = L^T, tau = L L^T, where adjoints are plain transposes.
/// The *_user() accessors convert back to the caller's basis.
///
/// With D the tau-antisymmetric operator sigma(f,g) = tau(f, D g), polar
/// pieces |D| and C (C^2 = -1, C|D| = D = |D|C), the complex structure is
///
///   i+ = [ -D         C sqrt(1+D^2) ]
///        [ C sqrt(1+D^2)        D   ]
///
/// and sigma+(f, g) = tau+(f, -i+ g).
class PureSpace {
 public:
  static std::shared_ptr<const PureSpace> purify(const SymplecticHilbertSpace& space,
                                                 const PurifyOptions& opts = {});

  const SymplecticHilbertSpace& base() const { return base_; }
  /// Space actually purified (base plus an optional padding direction).
  const SymplecticHilbertSpace& working() const { return working_; }
  int base_dim() const { return base_.dim(); }
  int padded_dim() const { return working_.dim(); }
  int real_dim() const { return 2 * working_.dim(); }
  bool padded() const { return padded_; }
  double rel_tol() const { return opts_.kernel_tol; }

  // Frame (tau+-orthonormal) representations.
  const Eigen::MatrixXd& i_frame() const { return i_frame_; }
  const Eigen::MatrixXd& D_frame() const { return d_frame_; }
  const Eigen::MatrixXd& absD_frame() const { return absd_frame_; }
  const Eigen::MatrixXd& C_frame() const { return c_frame_; }

  // User-basis representations.
  Eigen::MatrixXd i_matrix() const { return operator_to_user(i_frame_); }
  Eigen::MatrixXd tau_plus() const;
  Eigen::MatrixXd D() const { return base_op_to_user(d_frame_); }
  Eigen::MatrixXd absD() const { return base_op_to_user(absd_frame_); }
  Eigen::MatrixXd C() const { return base_op_to_user(c_frame_); }

  /// Accepts a user vector of length n (embedded as f (+) 0), 2n or 2m.
  Eigen::VectorXd to_frame(const Eigen::VectorXd& user) const;
  Eigen::VectorXd to_frame(const VectorKplus& v) const { return to_frame(v.coords); }
  VectorKplus from_frame(const Eigen::VectorXd& y) const;

  Eigen::MatrixXd operator_to_user(const Eigen::MatrixXd& frame_op) const;
  Eigen::MatrixXd operator_to_frame(const Eigen::MatrixXd& user_op) const;

  /// Frame basis (orthonormal columns) of K (+) 0.
  Eigen::MatrixXd base_block_frame() const;

  PureSpace(const PureSpace&) = delete;
  PureSpace& operator=(const PureSpace&) = delete;

 private:
  PureSpace(SymplecticHilbertSpace base, SymplecticHilbertSpace working, bool padded,
            PurifyOptions opts);
  void build();
  Eigen::MatrixXd base_op_to_user(const Eigen::MatrixXd& op) const {
    return t_inv_ * op * t_;
  }

  SymplecticHilbertSpace base_;
  SymplecticHilbertSpace working_;
  bool padded_;
  PurifyOptions opts_;
  Eigen::MatrixXd t_;      // frame map on K: y = T x
  Eigen::MatrixXd t_inv_;
  Eigen::MatrixXd d_frame_, absd_frame_, c_frame_, root_frame_;
  Eigen::MatrixXd i_frame_;
};

using PureSpacePtr = std::shared_ptr<const PureSpace>;

/// f |-> f (+) 0.
VectorKplus embed(const PureSpace& pure, const VectorK& f);

struct ComplexScalar {
  double re = 0.0;
  double im = 0.0;
};

/// <f, g>+ = tau+(f, g) + i sigma+(f, g).
ComplexScalar complex_scalar(const PureSpace& pure, const VectorKplus& f, const VectorKplus& g);

}  // namespace modent
