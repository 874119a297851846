#include "modent/modular.hpp"

#include <cmath>
#include <sstream>

#include "modent/errors.hpp"

namespace modent {

namespace {

Eigen::MatrixXd spectral(const Eigen::MatrixXd& v, const Eigen::VectorXd& vals) {
  return v * vals.asDiagonal() * v.transpose();
}

}  // namespace

double c_function(double lambda) {
  double q;
  if (std::abs(lambda) < 1e-4) {
    q = 1.0 + lambda / 2.0 + lambda * lambda / 12.0;
  } else {
    q = lambda / -std::expm1(-lambda);
  }
  return std::sqrt(q);
}

std::string EntropyValue::to_string() const {
  if (infinite) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

Eigen::VectorXd ModularData::log_delta_spectrum() const {
  return lambda.array().log().matrix();
}

ModularData modular_data(std::shared_ptr<const Decomposition> dec) {
  ModularData md;
  md.dec = dec;
  const auto& pure = dec->pure;
  const Eigen::MatrixXd& im = pure->i_frame();
  const int ka = dec->La.dim();
  const int kf = dec->Lf.dim();
  const int ks = ka + kf;
  const int N = pure->real_dim();

  md.E.resize(N, 2 * ks);
  md.E << dec->LaPlus.frame_basis(), dec->LfPlus.frame_basis();
  if (ks == 0) {
    md.S_c = md.Delta_c = md.J_c = md.K_c = md.V = Eigen::MatrixXd(0, 0);
    md.lambda = Eigen::VectorXd(0);
    return md;
  }

  Eigen::MatrixXd bs(N, ks);
  bs << dec->La.frame_basis(), dec->Lf.frame_basis();
  const Eigen::MatrixXd ibs = im * bs;
  Eigen::MatrixXd g(2 * ks, 2 * ks), h(2 * ks, 2 * ks);
  g << md.E.transpose() * bs, md.E.transpose() * ibs;
  h << md.E.transpose() * bs, -md.E.transpose() * ibs;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cond = s(0) / s(s.size() - 1);
  if (!(cond <= 1e12)) {
    std::ostringstream os;
    os << "[B | iB] basis of the standard part has condition number " << cond;
    throw IllConditioned(os.str());
  }
  const Eigen::MatrixXd ginv =
      svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  md.S_c = h * ginv;

  md.Delta_c = md.S_c.transpose() * md.S_c;
  md.Delta_c = 0.5 * (md.Delta_c + md.Delta_c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(md.Delta_c);
  md.lambda = es.eigenvalues();
  md.V = es.eigenvectors();
  if (md.lambda.minCoeff() <= 0.0)
    throw IllConditioned("modular operator is not positive definite");

  md.J_c = md.S_c * spectral(md.V, md.lambda.cwiseSqrt().cwiseInverse());
  md.J_c = 0.5 * (md.J_c + md.J_c.transpose());
  md.K_c = spectral(md.V, -md.lambda.array().log().matrix());
  return md;
}

Eigen::MatrixXd modular_flow_matrix(const ModularData& md, double x) {
  const auto& pure = md.dec->pure;
  const int N = pure->real_dim();
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(N, N) - md.E * md.E.transpose();
  if (md.standard_dim() == 0) return u;
  const Eigen::VectorXd kappa = -md.lambda.array().log().matrix();
  const Eigen::MatrixXd cosk = spectral(md.V, (x * kappa).array().cos().matrix());
  const Eigen::MatrixXd sink = spectral(md.V, (x * kappa).array().sin().matrix());
  u += md.embed(cosk) - pure->i_frame() * md.embed(sink);
  return u;
}

VectorKplus modular_flow(const ModularData& md, double x, const VectorKplus& f) {
  const auto& pure = md.dec->pure;
  const Eigen::VectorXd y = pure->to_frame(f);
  const Eigen::MatrixXd& bi = md.dec->Linf.frame_basis();
  if (bi.cols() > 0 && (bi.transpose() * y).norm() > 1e-8 * y.norm())
    throw InfiniteComponent("vector has a component in the nonseparating part");
  return pure->from_frame(modular_flow_matrix(md, x) * y);
}

EntropyForm entropy_form(const ModularData& md) {
  EntropyForm form;
  form.pure = md.dec->pure;
  const int N = form.pure->real_dim();
  form.P_inf = md.dec->Linf.projector();
  if (md.standard_dim() == 0) {
    form.R = Eigen::MatrixXd::Zero(N, N);
    form.cK2 = Eigen::MatrixXd::Zero(N, N);
    return form;
  }
  const Eigen::VectorXd kappa = -md.lambda.array().log().matrix();
  Eigen::VectorXd c(kappa.size());
  for (Eigen::Index k = 0; k < kappa.size(); ++k) c(k) = c_function(kappa(k));
  const Eigen::MatrixXd ck = spectral(md.V, c);
  const Eigen::Index d = md.J_c.rows();
  Eigen::MatrixXd r = ck * (Eigen::MatrixXd::Identity(d, d) - md.J_c) * ck;
  r = 0.5 * (r + r.transpose());
  form.R = md.embed(r);
  form.cK2 = md.embed(spectral(md.V, c.array().square().matrix()));
  return form;
}

EntropyValue EntropyForm::value_frame(const Eigen::VectorXd& y) const {
  const double norm = y.norm();
  if (norm == 0.0) return EntropyValue::finite(0.0);
  if ((P_inf * y).norm() > infinity_threshold * norm) return EntropyValue::inf();
  double v = y.dot(R * y);
  if (v < 0.0 && v >= -1e-10 * std::max(1.0, norm * norm)) v = 0.0;
  return EntropyValue::finite(v);
}

EntropyValue EntropyForm::value(const VectorKplus& h) const {
  return value_frame(pure->to_frame(h));
}

EntropyValue relative_entropy(const EntropyForm& form, const VectorKplus& g,
                              const VectorKplus& f) {
  return form.value_frame(form.pure->to_frame(g) - form.pure->to_frame(f));
}

Eigen::MatrixXd pf_via_modular(const ModularData& md, double tol) {
  const auto& dec = *md.dec;
  const int N = dec.pure->real_dim();
  if (dec.Lf.dim() == 0) return Eigen::MatrixXd::Zero(N, N);
  const Eigen::MatrixXd& ef = dec.LfPlus.frame_basis();
  // Delta and J preserve LfPlus; restrict through the frame.
  const Eigen::MatrixXd to_f = ef.transpose() * md.E;
  Eigen::MatrixXd delta_f = to_f * md.Delta_c * to_f.transpose();
  delta_f = 0.5 * (delta_f + delta_f.transpose());
  const Eigen::MatrixXd j_f = to_f * md.J_c * to_f.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(delta_f);
  const Eigen::VectorXd& lam = es.eigenvalues();
  Eigen::VectorXd a(lam.size()), b(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (std::abs(lam(k) - 1.0) <= tol) {
      std::ostringstream os;
      os << "modular operator on the factorial part has eigenvalue " << lam(k);
      throw SpectralSingularity(os.str());
    }
    a(k) = 1.0 / (1.0 - lam(k));
    b(k) = std::sqrt(lam(k)) * a(k);
  }
  const Eigen::MatrixXd p = spectral(es.eigenvectors(), a) + j_f * spectral(es.eigenvectors(), b);
  return ef * p * ef.transpose();
}

EntropyPipeline entropy_pipeline(const PureSpacePtr& pure, const Subspace& L, double tol) {
  EntropyPipeline p;
  p.pure = pure;
  p.dec = std::make_shared<const Decomposition>(decompose(pure, L, tol));
  p.md = modular_data(p.dec);
  p.form = entropy_form(p.md);
  return p;
}

}  // namespace modent

namespace modent {

ModularChecks check_modular(const EntropyPipeline& p) {
  ModularChecks c;
  const ModularData& md = p.md;
  const auto& dec = *p.dec;
  const Eigen::MatrixXd& im = p.pure->i_frame();
  const int N = p.pure->real_dim();

  if (md.standard_dim() > 0) {
    const Eigen::Index d = md.S_c.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd bs(N, dec.La.dim() + dec.Lf.dim());
    bs << dec.La.frame_basis(), dec.Lf.frame_basis();
    const Eigen::MatrixXd sf = md.S_frame();
    c.tomita_fixed = (sf * bs - bs).cwiseAbs().maxCoeff();
    c.tomita_square = (md.S_c * md.S_c - id).cwiseAbs().maxCoeff();
    c.J_square = (md.J_c * md.J_c - id).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd dinv =
        md.V * md.lambda.cwiseInverse().asDiagonal() * md.V.transpose();
    c.J_delta_J = (md.J_c * md.Delta_c * md.J_c - dinv).cwiseAbs().maxCoeff() /
                  std::max(1.0, dinv.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd ic = md.E.transpose() * im * md.E;
    c.J_antilinear = (md.J_c * ic + ic * md.J_c).cwiseAbs().maxCoeff();
    c.J_orthogonal = (md.J_c.transpose() * md.J_c - id).cwiseAbs().maxCoeff();
    c.delta_complex_linear = (md.Delta_c * ic - ic * md.Delta_c).cwiseAbs().maxCoeff() /
                             std::max(1.0, md.Delta_c.cwiseAbs().maxCoeff());
  }
  const Eigen::MatrixXd& r = p.form.R;
  c.R_symmetry = (r - r.transpose()).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (r + r.transpose()), Eigen::EigenvaluesOnly);
  c.R_min_eigenvalue = es.eigenvalues().minCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(r - p.form.cK2, Eigen::EigenvaluesOnly);
  c.R_minus_cK2_norm = es2.eigenvalues().cwiseAbs().maxCoeff();
  const Subspace lp = orthogonal_complement(i_image(dec.L), dec.tol);
  if (lp.dim() > 0) c.R_kills_Lprime = (r * lp.frame_basis()).cwiseAbs().maxCoeff();
  return c;
}

}  // namespace modent
