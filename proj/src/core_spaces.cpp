#include "modent/core_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "modent/errors.hpp"

namespace modent {

namespace {

double largest_abs_eigenvalue(const Eigen::MatrixXd& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

SymplecticHilbertSpace::SymplecticHilbertSpace(Eigen::MatrixXd tau_gram,
                                               Eigen::MatrixXd sigma_form,
                                               std::optional<double> rel_tol)
    : tau_(std::move(tau_gram)), sigma_(std::move(sigma_form)) {
  if (tau_.rows() != tau_.cols() || sigma_.rows() != sigma_.cols() ||
      tau_.rows() != sigma_.rows()) {
    std::ostringstream os;
    os << "tau is " << tau_.rows() << "x" << tau_.cols() << ", sigma is "
       << sigma_.rows() << "x" << sigma_.cols();
    throw DimensionMismatch(os.str());
  }
  if (tau_.rows() == 0) throw DimensionMismatch("space must have positive dimension");
  rel_tol_ = rel_tol.value_or(kDefaultRelTol);
  const Eigen::MatrixXd sym = 0.5 * (tau_ + tau_.transpose());
  abs_tol_ = rel_tol_ * std::max(largest_abs_eigenvalue(sym),
                                 std::numeric_limits<double>::min());
}

Eigen::MatrixXd normalized_sigma(const SymplecticHilbertSpace& space) {
  const Eigen::MatrixXd sym = 0.5 * (space.tau_gram() + space.tau_gram().transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd lam = es.eigenvalues();
  if (lam.minCoeff() <= 0.0) {
    return Eigen::MatrixXd::Constant(space.dim(), space.dim(),
                                     std::numeric_limits<double>::quiet_NaN());
  }
  const Eigen::MatrixXd w = es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
  return w * space.sigma_form() * w;
}

ValidationReport validate_space(const SymplecticHilbertSpace& space,
                                std::optional<double> rel_tol) {
  ValidationReport rep;
  const double rtol = rel_tol.value_or(space.rel_tol());
  const double atol = rtol * space.abs_tol() / space.rel_tol();
  const auto& tau = space.tau_gram();
  const auto& sigma = space.sigma_form();

  rep.worst_symmetry_defect = (tau - tau.transpose()).cwiseAbs().maxCoeff();
  rep.worst_antisymmetry_defect = (sigma + sigma.transpose()).cwiseAbs().maxCoeff();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (tau + tau.transpose()),
                                                    Eigen::EigenvaluesOnly);
  rep.min_tau_eigenvalue = es.eigenvalues().minCoeff();

  bool ok = true;
  if (rep.worst_symmetry_defect > atol) {
    ok = false;
    rep.messages.push_back("tau is not symmetric");
  }
  if (rep.worst_antisymmetry_defect > atol) {
    ok = false;
    rep.messages.push_back("sigma is not antisymmetric");
  }
  if (rep.min_tau_eigenvalue <= atol) {
    ok = false;
    rep.messages.push_back("tau is not positive definite");
    rep.operator_norm_D = std::numeric_limits<double>::quiet_NaN();
  } else {
    Eigen::MatrixXd d = normalized_sigma(space);
    d = 0.5 * (d - d.transpose());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
    const Eigen::VectorXd sv = svd.singularValues();
    rep.operator_norm_D = sv.size() ? sv(0) : 0.0;
    rep.kernel_dim = static_cast<int>((sv.array() <= rtol).count());
    rep.padding_required = (rep.kernel_dim % 2) == 1;
    if (rep.operator_norm_D > 1.0 + rtol) {
      ok = false;
      std::ostringstream os;
      os.precision(17);
      os << "|sigma(f,g)| <= sqrt(tau(f,f) tau(g,g)) violated: ||D|| = " << rep.operator_norm_D;
      rep.messages.push_back(os.str());
    }
    if (rep.padding_required) {
      rep.messages.push_back("ker D has odd dimension; one sigma-null direction will be appended");
    }
  }
  rep.is_valid = ok;
  return rep;
}

VectorK IndexMap::embed(const VectorK& f, int total_dim) const {
  if (f.size() != dim) throw DimensionMismatch("summand vector has wrong length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(total_dim);
  out.segment(offset, dim) = f.coords;
  return VectorK(out);
}

VectorK IndexMap::extract(const VectorK& f) const {
  if (f.size() < offset + dim) throw DimensionMismatch("vector too short for summand");
  return VectorK(f.coords.segment(offset, dim));
}

DirectSum direct_sum(std::span<const SymplecticHilbertSpace> spaces) {
  if (spaces.empty()) throw InvalidSummand("direct sum of zero spaces");
  int total = 0;
  std::vector<IndexMap> maps;
  for (std::size_t k = 0; k < spaces.size(); ++k) {
    const auto rep = validate_space(spaces[k]);
    if (!rep.is_valid) {
      std::ostringstream os;
      os << "summand " << k << " is not a symplectic Hilbert space";
      for (const auto& m : rep.messages) os << "; " << m;
      throw InvalidSummand(os.str());
    }
    maps.push_back({total, spaces[k].dim()});
    total += spaces[k].dim();
  }
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(total, total);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(total, total);
  double rtol = 0.0;
  for (std::size_t k = 0; k < spaces.size(); ++k) {
    tau.block(maps[k].offset, maps[k].offset, maps[k].dim, maps[k].dim) = spaces[k].tau_gram();
    sigma.block(maps[k].offset, maps[k].offset, maps[k].dim, maps[k].dim) = spaces[k].sigma_form();
    rtol = std::max(rtol, spaces[k].rel_tol());
  }
  return DirectSum{SymplecticHilbertSpace(std::move(tau), std::move(sigma), rtol), std::move(maps)};
}

FormValues eval_forms(const SymplecticHilbertSpace& space, const VectorK& f, const VectorK& g) {
  if (f.size() != space.dim() || g.size() != space.dim()) {
    throw DimensionMismatch("vector length does not match space dimension");
  }
  return {f.coords.dot(space.tau_gram() * g.coords), f.coords.dot(space.sigma_form() * g.coords)};
}

}  // namespace modent
