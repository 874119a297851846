#include "modent/subspace.hpp"

#include <algorithm>
#include <sstream>

#include "modent/errors.hpp"

namespace modent {

namespace {

void require_same(const Subspace& a, const Subspace& b) {
  if (a.pure() != b.pure()) throw SpaceMismatch("subspaces belong to different spaces");
}

// Right null space of x, singular values <= tol (absolute).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& x, double tol) {
  if (x.cols() == 0) return Eigen::MatrixXd(0, 0);
  if (x.rows() == 0) return Eigen::MatrixXd::Identity(x.cols(), x.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol) ++r;
  return svd.matrixV().rightCols(x.cols() - r);
}

Eigen::MatrixXd symmetrized_range(const PureSpace& pure, const Eigen::MatrixXd& p) {
  const Eigen::MatrixXd& im = pure.i_frame();
  Eigen::MatrixXd ps = 0.5 * (p + im * p * im.transpose());
  ps = 0.5 * (ps + ps.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ps);
  const Eigen::VectorXd& ev = es.eigenvalues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = ev.size() - 1; k >= 0; --k)
    if (ev(k) > 0.5) keep.push_back(k);
  Eigen::MatrixXd b(p.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    b.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
  return b;
}

}  // namespace

Subspace::Subspace(PureSpacePtr pure, Eigen::MatrixXd frame_basis)
    : pure_(std::move(pure)), frame_(std::move(frame_basis)) {
  if (!pure_) throw ConfigError("subspace without an ambient space");
  if (frame_.rows() != pure_->real_dim())
    throw DimensionMismatch("subspace basis has the wrong number of rows");
}

Subspace Subspace::zero(PureSpacePtr pure) {
  const int d = pure->real_dim();
  return Subspace(std::move(pure), Eigen::MatrixXd(d, 0));
}

Subspace Subspace::whole(PureSpacePtr pure) {
  const int d = pure->real_dim();
  return Subspace(std::move(pure), Eigen::MatrixXd::Identity(d, d));
}

Eigen::MatrixXd Subspace::basis() const {
  Eigen::MatrixXd out(frame_.rows(), frame_.cols());
  for (Eigen::Index j = 0; j < frame_.cols(); ++j)
    out.col(j) = pure_->from_frame(frame_.col(j)).coords;
  return out;
}

Subspace span_frame(const PureSpacePtr& pure, const Eigen::MatrixXd& gens, double tol) {
  if (gens.rows() != pure->real_dim())
    throw DimensionMismatch("generators have the wrong number of rows");
  if (gens.cols() == 0) return Subspace::zero(pure);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gens, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return Subspace::zero(pure);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tol * s(0)) ++r;
  return Subspace(pure, svd.matrixU().leftCols(r));
}

Subspace span(const PureSpacePtr& pure, const std::vector<VectorKplus>& generators,
              double tol) {
  Eigen::MatrixXd g(pure->real_dim(), static_cast<Eigen::Index>(generators.size()));
  for (std::size_t j = 0; j < generators.size(); ++j)
    g.col(static_cast<Eigen::Index>(j)) = pure->to_frame(generators[j]);
  return span_frame(pure, g, tol);
}

Subspace span_columns(const PureSpacePtr& pure, const Eigen::MatrixXd& gens, double tol) {
  Eigen::MatrixXd frame(pure->real_dim(), gens.cols());
  for (Eigen::Index j = 0; j < gens.cols(); ++j) frame.col(j) = pure->to_frame(Eigen::VectorXd(gens.col(j)));
  return span_frame(pure, frame, tol);
}

Subspace sum(const Subspace& a, const Subspace& b, double tol) {
  require_same(a, b);
  Eigen::MatrixXd g(a.frame_basis().rows(), a.dim() + b.dim());
  g << a.frame_basis(), b.frame_basis();
  return span_frame(a.pure(), g, tol);
}

Subspace intersect(const Subspace& a, const Subspace& b, double tol) {
  require_same(a, b);
  if (a.dim() == 0 || b.dim() == 0) return Subspace::zero(a.pure());
  const Eigen::MatrixXd& ab = a.frame_basis();
  const Eigen::MatrixXd& bb = b.frame_basis();
  // Singular values of (1 - P_B) A are the sines of the principal angles.
  const Eigen::MatrixXd resid = ab - bb * (bb.transpose() * ab);
  const Eigen::MatrixXd c = null_space(resid, tol);
  if (c.cols() == 0) return Subspace::zero(a.pure());
  return span_frame(a.pure(), ab * c, tol);
}

Subspace complement(const Subspace& a, const Subspace& within, double tol) {
  require_same(a, within);
  if (within.dim() == 0) return Subspace::zero(a.pure());
  if (a.dim() == 0) return within;
  const Eigen::MatrixXd c =
      null_space(a.frame_basis().transpose() * within.frame_basis(), tol);
  if (c.cols() == 0) return Subspace::zero(a.pure());
  return span_frame(a.pure(), within.frame_basis() * c, tol);
}

Subspace orthogonal_complement(const Subspace& a, double tol) {
  return complement(a, Subspace::whole(a.pure()), tol);
}

Subspace i_image(const Subspace& a) {
  return Subspace(a.pure(), a.pure()->i_frame() * a.frame_basis());
}

Subspace complexify(const Subspace& a, double tol) {
  if (a.dim() == 0) return a;
  const Subspace s = sum(a, i_image(a), tol);
  return Subspace(a.pure(), symmetrized_range(*a.pure(), s.projector()));
}

double containment_defect(const Subspace& a, const Subspace& b) {
  require_same(a, b);
  if (a.dim() == 0) return 0.0;
  const Eigen::MatrixXd r =
      a.frame_basis() - b.frame_basis() * (b.frame_basis().transpose() * a.frame_basis());
  if (r.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  return svd.singularValues()(0);
}

Subspace base_subspace(const PureSpacePtr& pure) {
  return Subspace(pure, pure->base_block_frame());
}

Subspace symplectic_complement(const PureSpacePtr& pure, const Subspace& L, double tol) {
  if (L.pure() != pure) throw SpaceMismatch("subspace belongs to a different space");
  const Subspace base = base_subspace(pure);
  const double defect = containment_defect(L, base);
  if (defect > std::max(tol, 1e-9)) {
    std::ostringstream os;
    os << "subspace leaves K (+) 0 (defect " << defect << ")";
    throw NotInBaseSpace(os.str());
  }
  // sigma+(f, g) = -<f, i+ g> in the frame, so L' = (i+ L)^perp inside K (+) 0.
  return complement(i_image(L), base, tol);
}

Decomposition decompose(const PureSpacePtr& pure, const std::vector<VectorKplus>& generators,
                        double tol) {
  return decompose(pure, span(pure, generators, tol), tol);
}

Decomposition decompose(const PureSpacePtr& pure, const Subspace& L, double tol) {
  Decomposition d;
  d.pure = pure;
  d.tol = tol;
  d.L = L;
  d.Lprime = symplectic_complement(pure, L, tol);

  const Subspace iL = i_image(L);
  const Subspace linf_raw = intersect(L, iL, tol);
  d.Linf = linf_raw.dim() == 0
               ? linf_raw
               : Subspace(pure, symmetrized_range(*pure, linf_raw.projector()));

  d.L0plus = orthogonal_complement(complexify(L, tol), tol);
  d.La = intersect(L, d.Lprime, tol);
  d.LaPlus = complexify(d.La, tol);

  Eigen::MatrixXd others(pure->real_dim(), d.L0plus.dim() + d.LaPlus.dim() + d.Linf.dim());
  others << d.L0plus.frame_basis(), d.LaPlus.frame_basis(), d.Linf.frame_basis();
  const Subspace rest = span_frame(pure, others, tol);
  const Subspace lf_raw = orthogonal_complement(rest, tol);
  d.LfPlus = lf_raw.dim() == 0
                 ? lf_raw
                 : Subspace(pure, symmetrized_range(*pure, lf_raw.projector()));
  d.Lf = intersect(d.LfPlus, L, tol);

  if (d.La.dim() + d.Lf.dim() + d.Linf.dim() != L.dim() ||
      2 * d.Lf.dim() != d.LfPlus.dim()) {
    std::ostringstream os;
    os << "decomposition dimensions do not add up: dim L = " << L.dim()
       << ", La = " << d.La.dim() << ", Lf = " << d.Lf.dim() << ", Linf = " << d.Linf.dim()
       << ", LfPlus = " << d.LfPlus.dim();
    throw DegenerateDecomposition(os.str());
  }

  const int N = pure->real_dim();
  d.P_a = d.La.projector();

  // P_f: identity on Lf, zero on Lf' cap LfPlus.
  d.LfPrime = complement(i_image(d.Lf), d.LfPlus, tol);
  d.P_f = Eigen::MatrixXd::Zero(N, N);
  if (d.Lf.dim() > 0) {
    const int k = d.Lf.dim();
    if (d.LfPrime.dim() != k) {
      std::ostringstream os;
      os << "Lf and its complement inside LfPlus have dimensions " << k << " and "
         << d.LfPrime.dim();
      throw DegenerateDecomposition(os.str());
    }
    Eigen::MatrixXd m(N, 2 * k);
    m << d.Lf.frame_basis(), d.LfPrime.frame_basis();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    if (s(s.size() - 1) < 1e-12 * s(0))
      throw DegenerateDecomposition("Lf and Lf' nearly overlap inside LfPlus");
    // Coefficients of v in the [Lf | Lf'] basis: pinv(m) v.
    const Eigen::MatrixXd pinv =
        svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
    d.P_f = d.Lf.frame_basis() * pinv.topRows(k);
  }

  d.Q = (d.LaPlus.projector() - d.P_a) + d.P_f + d.Linf.projector();
  return d;
}

Components project_components(const Decomposition& dec, const VectorKplus& g) {
  const Eigen::VectorXd y = dec.pure->to_frame(g);
  auto part = [&](const Subspace& s) {
    return dec.pure->from_frame(s.frame_basis() * (s.frame_basis().transpose() * y));
  };
  return {part(dec.L0plus), part(dec.LaPlus), part(dec.LfPlus), part(dec.Linf)};
}

double orthogonality_certificate(const Decomposition& dec) {
  const Subspace* blocks[] = {&dec.L0plus, &dec.LaPlus, &dec.LfPlus, &dec.Linf};
  const Eigen::MatrixXd& im = dec.pure->i_frame();
  double worst = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      const auto& x = blocks[a]->frame_basis();
      const auto& y = blocks[b]->frame_basis();
      if (x.cols() == 0 || y.cols() == 0) continue;
      worst = std::max(worst, (x.transpose() * y).cwiseAbs().maxCoeff());
      worst = std::max(worst, (x.transpose() * im * y).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace modent

namespace modent {

DecompositionChecks check_decomposition(const Decomposition& dec) {
  DecompositionChecks c;
  const auto& pure = dec.pure;
  const Eigen::MatrixXd& im = pure->i_frame();
  c.orthogonality = orthogonality_certificate(dec);
  c.dim_total = dec.L0plus.dim() + dec.LaPlus.dim() + dec.LfPlus.dim() + dec.Linf.dim();
  const int N = pure->real_dim();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N, N);
  for (const Subspace* s : {&dec.L0plus, &dec.LaPlus, &dec.LfPlus, &dec.Linf}) {
    if (s->dim() == 0) continue;
    const Eigen::MatrixXd p = s->projector();
    c.invariance = std::max(c.invariance, ((id - p) * im * s->frame_basis()).norm());
  }
  auto idem = [](const Eigen::MatrixXd& p) { return (p * p - p).norm(); };
  c.P_a_idempotent = idem(dec.P_a);
  c.P_f_idempotent = idem(dec.P_f);
  c.Q_idempotent = idem(dec.Q);
  const Subspace lp = orthogonal_complement(i_image(dec.L), dec.tol);
  if (lp.dim() > 0) c.Q_kills_Lprime = (dec.Q * lp.frame_basis()).norm();
  if (dec.Lf.dim() > 0) {
    c.P_f_fixes_Lf = (dec.P_f * dec.Lf.frame_basis() - dec.Lf.frame_basis()).norm();
    c.P_f_kills_LfPrime = (dec.P_f * dec.LfPrime.frame_basis()).norm();
  }
  Eigen::MatrixXd parts(N, dec.La.dim() + dec.Lf.dim() + dec.Linf.dim());
  parts << dec.La.frame_basis(), dec.Lf.frame_basis(), dec.Linf.frame_basis();
  const Subspace rebuilt = span_frame(pure, parts, dec.tol);
  c.L_reconstruction = std::max(containment_defect(dec.L, rebuilt), containment_defect(rebuilt, dec.L));
  return c;
}

}  // namespace modent
