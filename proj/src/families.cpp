#include "modent/families.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

#include "modent/errors.hpp"

namespace modent {

namespace {

std::vector<double> matrix_key(const Eigen::MatrixXd& m) {
  std::vector<double> k;
  k.reserve(static_cast<std::size_t>(m.size()) + 2);
  k.push_back(static_cast<double>(m.rows()));
  k.push_back(static_cast<double>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) k.push_back(m(i, j));
  return k;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// MatrixFamily

MatrixFamily::MatrixFamily(PureSpacePtr pure, Generator gen, Domain domain, double tol)
    : pure_(std::move(pure)), gen_(std::move(gen)), domain_(domain), tol_(tol) {
  if (!(domain_.second > domain_.first)) throw ConfigError("family domain is empty");
}

std::shared_ptr<const EntropyPipeline> MatrixFamily::at(double t) const {
  const Eigen::MatrixXd gens = gen_(t);
  if (gens.rows() != pure_->base_dim() && gens.cols() > 0)
    throw DimensionMismatch("family generators do not match the base space");
  auto key = matrix_key(gens);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const Subspace L = gens.cols() == 0 ? Subspace::zero(pure_)
                                      : span_columns(pure_, gens, tol_);
  auto pipe = std::make_shared<const EntropyPipeline>(entropy_pipeline(pure_, L, tol_));
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(std::move(key), std::move(pipe)).first->second;
}

EntropyValue MatrixFamily::entropy(const VectorKplus& f, double t) const {
  return at(t)->form.value(f);
}

EntropyValue MatrixFamily::tf(const VectorKplus& f, double s, double t) const {
  if (s >= t) return entropy(f, t);
  const Eigen::VectorXd y = pure_->to_frame(f);
  const Eigen::VectorXd qy = at(s)->dec->Q * y;
  return at(t)->form.value_frame(qy);
}

double MatrixFamily::attest_monotone(int samples, double tol) {
  if (samples < 2) samples = 2;
  double worst = 0.0;
  const double a = domain_.first, b = domain_.second;
  std::shared_ptr<const EntropyPipeline> prev;
  double prev_t = a;
  for (int k = 0; k < samples; ++k) {
    const double t = a + (b - a) * k / (samples - 1);
    auto cur = at(t);
    if (prev) {
      const double d = containment_defect(prev->dec->L, cur->dec->L);
      worst = std::max(worst, d);
      if (d > tol) {
        std::ostringstream os;
        os << "L_" << prev_t << " is not contained in L_" << t << " (defect " << d << ")";
        throw NotIncreasing(os.str());
      }
    }
    prev = cur;
    prev_t = t;
  }
  attested_ = true;
  return worst;
}

std::size_t MatrixFamily::cache_size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.size();
}

MatrixFamilyPtr step_family(PureSpacePtr pure, std::vector<FamilyStep> steps, Domain domain,
                            bool inclusive, double tol) {
  const int n = pure->base_dim();
  for (const auto& s : steps)
    if (s.generators.rows() != n) throw DimensionMismatch("step generators have wrong length");
  auto gen = [steps = std::move(steps), n, inclusive](double t) {
    Eigen::Index cols = 0;
    auto active = [&](const FamilyStep& s) {
      return inclusive ? s.threshold <= t : s.threshold < t;
    };
    for (const auto& s : steps)
      if (active(s)) cols += s.generators.cols();
    Eigen::MatrixXd g(n, cols);
    Eigen::Index c = 0;
    for (const auto& s : steps) {
      if (!active(s)) continue;
      g.middleCols(c, s.generators.cols()) = s.generators;
      c += s.generators.cols();
    }
    return g;
  };
  return std::make_shared<MatrixFamily>(std::move(pure), std::move(gen), domain, tol);
}

MatrixFamilyPtr spectral_family(const std::vector<double>& m, Domain domain) {
  const int n = static_cast<int>(m.size());
  auto pure = PureSpace::purify(oscillator_space(m));
  std::vector<FamilyStep> steps;
  for (int j = 0; j < n; ++j) {
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    mask[static_cast<std::size_t>(j)] = true;
    steps.push_back({m[static_cast<std::size_t>(j)], oscillator_modes(n, mask)});
  }
  return step_family(std::move(pure), std::move(steps), domain, false);
}

MatrixFamilyPtr two_point_family(PureSpacePtr pure, const Eigen::MatrixXd& l0,
                                 const Eigen::MatrixXd& l1, double switch_at, Domain domain) {
  auto gen = [l0, l1, switch_at](double t) { return t <= switch_at ? l0 : l1; };
  return std::make_shared<MatrixFamily>(std::move(pure), std::move(gen), domain);
}

MatrixFamilyPtr discretized_u1_family(const DiscretizedU1& disc) {
  auto pure = PureSpace::purify(disc.space);
  auto gen = [disc](double t) { return disc.generators(t); };
  return std::make_shared<MatrixFamily>(std::move(pure), std::move(gen),
                                        Domain{disc.a, disc.b + 3.0 * disc.spacing});
}

// ---------------------------------------------------------------------------
// Model surfaces

std::string U1Surface::description() const {
  std::ostringstream os;
  os << "U(1) current, ";
  if (p_.vacuum()) os << "vacuum";
  else os << "KMS beta=" << *p_.beta;
  if (p_.reparam.kind != Reparam::Kind::Identity) os << ", reparametrized (" << p_.reparam.name() << ")";
  os << ", probe " << f_.kind_name();
  return os.str();
}

EntropyValue AbelianLineSurface::value(double s, double t) const {
  const auto [lo, hi] = g_.support();
  const double upper = std::min(s, t);
  const double top = std::min(upper, hi);
  double v = 0.0;
  if (top > lo)
    v = integrate(
        [&](double x) {
          const double g = g_.value(x);
          return g * g;
        },
        lo, top, q_, g_.breakpoints());
  // the probe is constant to the right of its support
  if (upper > hi) v += g_.value(hi) * g_.value(hi) * (upper - hi);
  return EntropyValue::finite(2.0 * v);
}

// ---------------------------------------------------------------------------
// Tables

double TfTable::max_finite() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      if (!is_infinite(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
        m = std::max(m, std::abs(values(i, j)));
  for (Eigen::Index j = 0; j < entropy_diagonal.size(); ++j)
    if (!diagonal_infinite[static_cast<std::size_t>(j)]) m = std::max(m, std::abs(entropy_diagonal(j)));
  return m;
}

TfTable t_table(const TfSurface& surface, const std::vector<double>& s_grid,
                const std::vector<double>& t_grid, int threads) {
  if (!std::is_sorted(s_grid.begin(), s_grid.end()) || !std::is_sorted(t_grid.begin(), t_grid.end()))
    throw ConfigError("grids must be sorted");
  TfTable tab;
  tab.s_grid = s_grid;
  tab.t_grid = t_grid;
  const std::size_t ns = s_grid.size(), nt = t_grid.size();
  tab.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nt));
  tab.infinite.assign(ns * nt, 0);
  tab.entropy_diagonal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nt));
  tab.diagonal_infinite.assign(nt, 0);

  const std::size_t total = ns * nt + nt;
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      if (k < ns * nt) {
        const std::size_t i = k / nt, j = k % nt;
        const EntropyValue v = surface.value(s_grid[i], t_grid[j]);
        tab.infinite[k] = v.infinite ? 1 : 0;
        tab.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            v.infinite ? std::numeric_limits<double>::infinity() : v.value;
      } else {
        const std::size_t j = k - ns * nt;
        const EntropyValue v = surface.entropy(t_grid[j]);
        tab.diagonal_infinite[j] = v.infinite ? 1 : 0;
        tab.entropy_diagonal(static_cast<Eigen::Index>(j)) =
            v.infinite ? std::numeric_limits<double>::infinity() : v.value;
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(total)));
  if (nthreads == 1) {
    work(0, total);
    return tab;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nthreads));
  const std::size_t chunk = (total + static_cast<std::size_t>(nthreads) - 1) / static_cast<std::size_t>(nthreads);
  for (int w = 0; w < nthreads; ++w) {
    const std::size_t b = static_cast<std::size_t>(w) * chunk;
    const std::size_t e = std::min(total, b + chunk);
    pool.emplace_back([&, b, e, w] {
      try {
        work(b, e);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return tab;
}

// ---------------------------------------------------------------------------
// Differential modular position

DmpReport dmp_check(const MatrixFamily& family, double s, double t, int num_samples, double tol,
                    std::uint64_t seed) {
  DmpReport rep;
  rep.s = s;
  rep.t = t;
  rep.tol = tol;
  if (s >= t) return rep;

  const auto ps = family.at(s);
  const auto pt = family.at(t);
  const auto& pure = family.pure();
  const Eigen::MatrixXd& q = ps->dec->Q;
  const Eigen::MatrixXd& r = pt->form.R;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index rank = 0;
  const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  const Subspace img(pure, svd.matrixU().leftCols(rank));
  const Subspace ker(pure, svd.matrixV().rightCols(q.cols() - rank));
  // Restrict to the domain of S_t: no component along Linf at t.
  const Subspace dom = orthogonal_complement(pt->dec->Linf);
  const Subspace plus = intersect(img, dom);
  const Subspace minus = intersect(ker, dom);
  rep.dim_plus = plus.dim();
  rep.dim_minus = minus.dim();
  if (plus.dim() == 0 || minus.dim() == 0) return rep;

  // Floor keeps round-off on nearly S_t-null directions from dominating the ratio.
  const double scale = 1e-6 * (1.0 + r.cwiseAbs().maxCoeff());
  auto pair_residual = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double sa = std::max(0.0, a.dot(r * a));
    const double sb = std::max(0.0, b.dot(r * b));
    return std::abs(a.dot(r * b)) / (std::sqrt(sa * sb) + scale);
  };
  double worst = 0.0;
  for (int i = 0; i < plus.dim(); ++i)
    for (int j = 0; j < minus.dim(); ++j)
      worst = std::max(worst, pair_residual(plus.frame_basis().col(i), minus.frame_basis().col(j)));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int k = 0; k < num_samples; ++k) {
    Eigen::VectorXd ca(plus.dim()), cb(minus.dim());
    for (Eigen::Index i = 0; i < ca.size(); ++i) ca(i) = nd(rng);
    for (Eigen::Index i = 0; i < cb.size(); ++i) cb(i) = nd(rng);
    worst = std::max(worst, pair_residual(plus.frame_basis() * ca, minus.frame_basis() * cb));
  }
  rep.samples = num_samples;
  rep.residual = worst;
  rep.holds = worst <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Finite-difference derivative report

DerivativeReport derivative_report(const TfSurface& surface, double t,
                                   const DerivativeOptions& opts) {
  const auto [lo, hi] = surface.domain();
  DerivativeReport rep;
  rep.t = t;
  rep.h = opts.h.value_or(1e-3 * (hi - lo));
  if (!(rep.h > 0.0)) throw ConfigError("finite-difference step must be positive");
  rep.eps = 2.0 * rep.h;
  const double h = rep.h, eps = rep.eps;
  if (t - 4.0 * h < lo || t + 4.0 * h > hi) {
    std::ostringstream os;
    os << "stencil around t=" << t << " with h=" << h << " leaves [" << lo << ", " << hi << "]";
    throw StencilOutOfDomain(os.str());
  }
  auto T = [&](double s, double tt) {
    const EntropyValue v = surface.value(s, tt);
    if (v.infinite) {
      std::ostringstream os;
      os << "T(" << s << ", " << tt << ") is infinite";
      throw InfiniteOnStencil(os.str());
    }
    return v.value;
  };
  auto S = [&](double tt) {
    const EntropyValue v = surface.entropy(tt);
    if (v.infinite) {
      std::ostringstream os;
      os << "S(" << tt << ") is infinite";
      throw InfiniteOnStencil(os.str());
    }
    return v.value;
  };

  std::vector<double> diag;
  for (int k = -3; k <= 3; ++k) diag.push_back(S(t + k * h));
  std::vector<double> inc;
  for (std::size_t k = 0; k + 1 < diag.size(); ++k) inc.push_back(std::abs(diag[k + 1] - diag[k]));
  std::vector<double> sorted = inc;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double biggest = sorted.back();
  if (biggest > opts.jump_factor * median && biggest > 1e-8 * (1.0 + std::abs(diag[3]))) {
    std::ostringstream os;
    os << "entropy jumps by " << biggest << " on the stencil around t=" << t
       << " (median increment " << median << ")";
    throw JumpOnStencil(os.str());
  }

  const double sm = diag[2], s0 = diag[3], sp = diag[4];
  rep.S = s0;
  rep.dS_dt = (sp - sm) / (2.0 * h);
  rep.d2S_dt2 = (sp - 2.0 * s0 + sm) / (h * h);

  // one-sided limits s -> t-0 and t+0, Richardson over offsets eps and 2 eps
  auto d2t = [&](double s) { return (T(s, t + h) - 2.0 * T(s, t) + T(s, t - h)) / (h * h); };
  const double a = t - eps;
  rep.d2T_dt2_minus = 2.0 * d2t(a) - d2t(t - 2.0 * eps);
  rep.d2T_ds2_minus = (T(a + h, t) - 2.0 * T(a, t) + T(a - h, t)) / (h * h);
  const double hh = 0.5 * h;
  rep.d2T_dsdt_minus =
      (T(a + hh, t + hh) - T(a + hh, t - hh) - T(a - hh, t + hh) + T(a - hh, t - hh)) / (h * h);
  const double b = t + eps;
  rep.d2T_dt2_plus = 2.0 * d2t(b) - d2t(t + 2.0 * eps);

  rep.bound_residual_upper = rep.d2T_dt2_plus - rep.d2S_dt2;
  rep.bound_residual_lower = rep.d2S_dt2 - (rep.d2T_dt2_minus + rep.d2T_ds2_minus);
  rep.bound_residual_lower_smooth = rep.d2S_dt2 - rep.d2T_dt2_minus;
  return rep;
}

// ---------------------------------------------------------------------------
// Property suite

bool PropertyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

const PropertyCheck* PropertyReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

PropertyReport property_suite(const TfTable& tab, double tol) {
  PropertyReport rep;
  rep.tol = tol > 0.0 ? tol : 1e-8 * (1.0 + tab.max_finite());
  const double tl = rep.tol;
  const std::size_t ns = tab.s_grid.size(), nt = tab.t_grid.size();
  for (char c : tab.infinite) rep.infinite_cells += c ? 1 : 0;
  auto fin = [&](std::size_t i, std::size_t j) { return !tab.is_infinite(i, j); };
  auto T = [&](std::size_t i, std::size_t j) {
    return tab.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };

  auto record = [](PropertyCheck& c, double slack, double tolerance, const std::string& where) {
    c.worst_slack = std::min(c.worst_slack, slack);
    if (slack < -tolerance) {
      if (c.violations == 0) c.first_violation = where;
      ++c.violations;
      c.passed = false;
    }
  };

  PropertyCheck tmono;
  tmono.name = "t_monotone";
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      for (std::size_t k = j + 1; k < nt; ++k)
        if (fin(i, j) && fin(i, k))
          record(tmono, T(i, k) - T(i, j), tl,
                 "s=" + fmt(tab.s_grid[i]) + " t=" + fmt(tab.t_grid[j]) + "->" + fmt(tab.t_grid[k]));
  rep.checks.push_back(tmono);

  PropertyCheck smono;
  smono.name = "s_monotone";
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t i = 0; i < ns; ++i)
      for (std::size_t k = i + 1; k < ns; ++k)
        if (fin(i, j) && fin(k, j))
          record(smono, T(k, j) - T(i, j), tl,
                 "t=" + fmt(tab.t_grid[j]) + " s=" + fmt(tab.s_grid[i]) + "->" + fmt(tab.s_grid[k]));
  rep.checks.push_back(smono);

  PropertyCheck cplus;
  cplus.name = "cplus_constant";
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      if (tab.s_grid[i] < tab.t_grid[j] || !fin(i, j) || tab.diagonal_infinite[j]) continue;
      const double d = std::abs(T(i, j) - tab.entropy_diagonal(static_cast<Eigen::Index>(j)));
      record(cplus, -d, tl, "s=" + fmt(tab.s_grid[i]) + " t=" + fmt(tab.t_grid[j]));
    }
  rep.checks.push_back(cplus);

  PropertyCheck dmono;
  dmono.name = "diagonal_monotone";
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t k = j + 1; k < nt; ++k)
      if (!tab.diagonal_infinite[j] && !tab.diagonal_infinite[k])
        record(dmono,
               tab.entropy_diagonal(static_cast<Eigen::Index>(k)) -
                   tab.entropy_diagonal(static_cast<Eigen::Index>(j)),
               tl, "t=" + fmt(tab.t_grid[j]) + "->" + fmt(tab.t_grid[k]));
  rep.checks.push_back(dmono);

  PropertyCheck rect;
  rect.name = "rectangle";
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t i2 = i + 1; i2 < ns; ++i2)
      for (std::size_t j = 0; j < nt; ++j)
        for (std::size_t j2 = j + 1; j2 < nt; ++j2) {
          if (!fin(i, j) || !fin(i, j2) || !fin(i2, j) || !fin(i2, j2)) continue;
          const double v = T(i2, j2) - T(i2, j) - T(i, j2) + T(i, j);
          if (v < -tl)
            record(rect, v, tl,
                   "s=" + fmt(tab.s_grid[i]) + "," + fmt(tab.s_grid[i2]) + " t=" + fmt(tab.t_grid[j]) +
                       "," + fmt(tab.t_grid[j2]));
          else
            rect.worst_slack = std::min(rect.worst_slack, v);
        }
  rep.checks.push_back(rect);
  return rep;
}

}  // namespace modent
