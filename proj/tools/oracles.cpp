#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include "modent/families.hpp"

namespace modent::cli {

int OracleSuite::failures() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const OracleRow& r) { return !r.pass; }));
}

double OracleSuite::worst_error() const {
  double w = 0.0;
  for (const auto& r : rows) w = std::max(w, r.error);
  return w;
}

nlohmann::json OracleSuite::summary() const {
  int instances = 0;
  for (const auto& r : rows) instances = std::max(instances, r.instance + 1);
  return {{"oracle", name},
          {"reference", reference},
          {"instances", instances},
          {"comparisons", rows.size()},
          {"failures", failures()},
          {"worst_error", worst_error()}};
}

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  std::uniform_int_distribution<int> u(lo, hi);
  return u(rng);
}

void push(OracleSuite& s, int inst, double engine, double reference, double tol,
          const std::string& label = {}) {
  OracleRow r;
  r.oracle = label.empty() ? s.name : label;
  r.instance = inst;
  r.engine = engine;
  r.reference = reference;
  r.error = std::abs(engine - reference);
  r.tol = tol;
  r.pass = std::isfinite(engine) && r.error <= tol;
  s.rows.push_back(r);
}

double finite_or_nan(const EntropyValue& v) {
  return v.infinite ? std::numeric_limits<double>::quiet_NaN() : v.value;
}

}  // namespace

OracleSuite oracle_two_mode_delta(Rng& rng, int instances, double tol) {
  OracleSuite s{"two_mode_delta", "(b^2 - a^2) log 2", {}};
  auto pure = PureSpace::purify(oscillator_space({2.0, 3.0}));
  Eigen::MatrixXd l0(4, 2);
  l0 << 1, 0, 0, 1, 1, 0, 0, 0;
  auto fam = two_point_family(pure, l0, Eigen::MatrixXd::Identity(4, 4), 0.5, {0.0, 1.0});
  for (int k = 0; k < instances; ++k) {
    const double a = random_uniform(rng, -2.0, 2.0), b = random_uniform(rng, -2.0, 2.0);
    Eigen::VectorXd f(4);
    f << a, 0, b, 0;
    const VectorKplus fv(f);
    const double delta = finite_or_nan(fam->entropy(fv, 1.0)) - finite_or_nan(fam->tf(fv, 0.0, 1.0));
    push(s, k, delta, (b * b - a * a) * std::log(2.0), tol);
  }
  return s;
}

OracleSuite oracle_oscillator(Rng& rng, int instances, int max_dim, double tol) {
  OracleSuite s{"oscillator", "2 (f, E arcoth(M) f)", {}};
  for (int k = 0; k < instances; ++k) {
    const int n = uniform_int(rng, 1, max_dim);
    const OscillatorInstance inst = random_oscillator(rng, n);
    auto pure = PureSpace::purify(oscillator_space(inst.m));
    auto p = entropy_pipeline(pure, span_columns(pure, oscillator_modes(n, inst.in_e)));
    const double ref = oscillator_entropy(inst.m, inst.in_e, inst.f).value;
    push(s, k, finite_or_nan(p.form.value(VectorKplus(inst.f))), ref, tol * (1.0 + ref));
  }
  return s;
}

OracleSuite oracle_oscillator_spectrum(Rng& rng, int instances, double tol) {
  OracleSuite s{"oscillator_spectrum", "+-2 arcoth(m)", {}};
  for (int k = 0; k < instances; ++k) {
    const double m = random_uniform(rng, 1.01, 10.0);
    auto pure = PureSpace::purify(oscillator_space({m}));
    auto p = entropy_pipeline(pure, span_columns(pure, Eigen::MatrixXd::Identity(2, 2)));
    const Eigen::VectorXd spec = p.md.log_delta_spectrum();
    const double a = 2.0 * arcoth(m);
    // worst distance of an eigenvalue from the nearer of +-a, and balance of signs
    double err = spec.size() == 0 ? std::numeric_limits<double>::infinity() : 0.0;
    int balance = 0;
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      err = std::max(err, std::min(std::abs(spec(i) - a), std::abs(spec(i) + a)));
      balance += spec(i) > 0 ? 1 : -1;
    }
    if (balance != 0) err = std::numeric_limits<double>::infinity();
    push(s, k, a + err, a, tol);
  }
  return s;
}

OracleSuite oracle_abelian(Rng& rng, int instances, int max_dim, double tol) {
  OracleSuite s{"abelian", "2 sum mu (Im f)^2", {}};
  for (int k = 0; k < instances; ++k) {
    const int n = uniform_int(rng, 1, max_dim);
    const AbelianInstance inst = random_abelian(rng, n);
    auto pure = PureSpace::purify(abelian_space(inst.mu));
    Eigen::MatrixXd g(n, 0);
    for (int j = 0; j < n; ++j)
      if (inst.in_y[j]) {
        g.conservativeResize(n, g.cols() + 1);
        g.col(g.cols() - 1) = Eigen::VectorXd::Unit(n, j);
      }
    auto p = entropy_pipeline(pure, span_columns(pure, g));
    const VectorKplus f = complex_vector(*pure, inst.re, inst.im);
    push(s, k, finite_or_nan(p.form.value(f)), abelian_entropy(inst.mu, inst.in_y, inst.im), tol);
  }
  return s;
}

OracleSuite oracle_direct_sum(Rng& rng, int instances, double tol) {
  OracleSuite s{"direct_sum", "sum of block entropies", {}};
  for (int k = 0; k < instances; ++k) {
    // block kinds: 0 oscillator, 1 abelian; at least one of each
    const int nblocks = uniform_int(rng, 2, 3);
    std::vector<int> kinds{0, 1};
    if (nblocks == 3) kinds.push_back(uniform_int(rng, 0, 1));
    std::shuffle(kinds.begin(), kinds.end(), rng);
    if (std::count(kinds.begin(), kinds.end(), 1) > 1) kinds.back() = 0;  // one abelian block

    std::vector<SymplecticHilbertSpace> spaces;
    std::vector<Eigen::MatrixXd> gens;
    std::vector<Eigen::VectorXd> res, ims;
    double block_sum = 0.0, closed_sum = 0.0;
    for (int kind : kinds) {
      const int n = uniform_int(rng, 1, 3);
      Eigen::VectorXd re, im;
      Eigen::MatrixXd g;
      if (kind == 0) {
        const OscillatorInstance inst = random_oscillator(rng, n);
        spaces.push_back(oscillator_space(inst.m));
        g = oscillator_modes(n, inst.in_e);
        re = inst.f;
        im = Eigen::VectorXd::Zero(2 * n);
        closed_sum += oscillator_entropy(inst.m, inst.in_e, inst.f).value;
      } else {
        const AbelianInstance inst = random_abelian(rng, n);
        spaces.push_back(abelian_space(inst.mu));
        g = Eigen::MatrixXd(n, 0);
        for (int j = 0; j < n; ++j)
          if (inst.in_y[j]) {
            g.conservativeResize(n, g.cols() + 1);
            g.col(g.cols() - 1) = Eigen::VectorXd::Unit(n, j);
          }
        re = inst.re;
        im = inst.im;
        closed_sum += abelian_entropy(inst.mu, inst.in_y, inst.im);
      }
      auto pure = PureSpace::purify(spaces.back());
      auto p = entropy_pipeline(pure, span_columns(pure, g));
      block_sum += finite_or_nan(p.form.value(complex_vector(*pure, re, im)));
      gens.push_back(g);
      res.push_back(re);
      ims.push_back(im);
    }
    DirectSum ds = direct_sum(spaces);
    const int n = ds.space.dim();
    Eigen::Index cols = 0;
    for (const auto& g : gens) cols += g.cols();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, cols);
    Eigen::VectorXd re(n), im(n);
    Eigen::Index c = 0;
    for (std::size_t b = 0; b < gens.size(); ++b) {
      const int off = ds.maps[b].offset;
      g.block(off, c, gens[b].rows(), gens[b].cols()) = gens[b];
      c += gens[b].cols();
      re.segment(off, res[b].size()) = res[b];
      im.segment(off, ims[b].size()) = ims[b];
    }
    auto pure = PureSpace::purify(ds.space);
    auto p = entropy_pipeline(pure, span_columns(pure, g));
    const double total = finite_or_nan(p.form.value(complex_vector(*pure, re, im)));
    push(s, k, total, block_sum, tol * std::max(1.0, block_sum), "direct_sum_additivity");
    push(s, k, total, closed_sum, tol * std::max(1.0, closed_sum), "direct_sum_closed_form");
  }
  return s;
}

OracleSuite oracle_pf_dual(Rng& rng, int instances, int max_dim, double tol) {
  OracleSuite s{"pf_dual", "modular formula a(Delta) + J b(Delta)", {}};
  for (int k = 0; k < instances; ++k) {
    const int n = 2 * uniform_int(rng, 1, std::max(1, max_dim / 2));
    auto pure = PureSpace::purify(random_space(rng, n, 0.1, 0.9));
    const int dim = uniform_int(rng, 1, n / 2);
    auto p = entropy_pipeline(pure, span_columns(pure, random_generators(rng, n, dim)));
    const Eigen::MatrixXd dual = pf_via_modular(p.md);
    const double scale = std::max(1.0, p.dec->P_f.cwiseAbs().maxCoeff());
    push(s, k, (p.dec->P_f - dual).cwiseAbs().maxCoeff() / scale, 0.0, tol);
  }
  return s;
}

OracleSuite invariant_suite(Rng& rng, int instances, int max_dim, double tol) {
  OracleSuite s{"modular_invariants", "exact identities", {}};
  for (int k = 0; k < instances; ++k) {
    const int n = uniform_int(rng, 1, max_dim);
    const int kind = uniform_int(rng, 0, 2);
    Eigen::VectorXd norms(n / 2);
    for (int b = 0; b < n / 2; ++b) {
      if (kind == 0) norms(b) = random_uniform(rng, 0.1, 0.9);
      else if (kind == 1) norms(b) = 1.0;
      else norms(b) = uniform_int(rng, 0, 2) == 0 ? 0.0 : random_uniform(rng, 0.1, 1.0);
    }
    auto pure = PureSpace::purify(random_space_with_norms(rng, n, norms));
    const int dim = uniform_int(rng, 0, n);
    auto p = entropy_pipeline(pure, span_columns(pure, random_generators(rng, n, dim)));
    const ModularChecks c = check_modular(p);
    const double rscale = 1.0 + p.form.R.cwiseAbs().maxCoeff();
    push(s, k, c.tomita_fixed, 0.0, tol, "tomita_fixed_point");
    push(s, k, c.J_square, 0.0, tol, "J_square");
    push(s, k, c.J_delta_J, 0.0, tol, "J_Delta_J");
    push(s, k, std::max(0.0, -c.R_min_eigenvalue), 0.0, tol * rscale, "R_positive");
    push(s, k, std::max(1.0, c.R_minus_cK2_norm), 1.0, tol, "R_minus_cK2_bound");
    push(s, k, c.R_kills_Lprime, 0.0, tol * rscale, "R_kills_Lprime");

    // S(Qf) = S(f) on a random vector of K+
    const Eigen::VectorXd y = pure->to_frame(random_vector(rng, 2 * pure->padded_dim()));
    const EntropyValue sf = p.form.value_frame(y);
    const EntropyValue sq = p.form.value_frame(p.dec->Q * y);
    double err = 0.0;
    if (sf.infinite != sq.infinite) err = std::numeric_limits<double>::infinity();
    else if (!sf.infinite) err = std::abs(sf.value - sq.value) / (1.0 + std::abs(sf.value));
    push(s, k, err, 0.0, tol, "S_Qf_equals_S_f");
  }
  return s;
}

}  // namespace modent::cli
