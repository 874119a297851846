// Acceptance run: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "modent/families.hpp"
#include "oracles.hpp"
#include "runner.hpp"

using namespace modent;
using namespace modent::cli;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char b[64];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> g;
  for (int k = 0; k < n; ++k) g.push_back(a + (b - a) * k / (n - 1));
  return g;
}

Eigen::MatrixXd flip(const Eigen::MatrixXd& op) {
  const int m = static_cast<int>(op.rows()) / 2;
  Eigen::VectorXd d(2 * m);
  d << Eigen::VectorXd::Ones(m), -Eigen::VectorXd::Ones(m);
  return d.asDiagonal() * op * d.asDiagonal();
}

Outcome ac1() {
  const auto t0 = Clock::now();
  Rng rng(1001);
  const OracleSuite s = oracle_two_mode_delta(rng, 20, 1e-9);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {s.failures() == 0 && secs < 1.0,
          "20 pairs, worst |delta - (b^2-a^2) log 2| = " + fmt("%.2e", s.worst_error()) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome ac2() {
  Rng rng(1002);
  const OracleSuite s = oracle_oscillator(rng, 50, 8, 1e-8);
  const OracleSuite sp = oracle_oscillator_spectrum(rng, 20, 1e-9);
  auto pure = PureSpace::purify(oscillator_space({2.0}));
  const auto p = entropy_pipeline(pure, base_subspace(pure));
  const double r3 = std::sqrt(3.0);
  Eigen::MatrixXd want(4, 4);
  want << 1, 0, -2 / r3, 0, 0, 1, 0, -2 / r3, -2 / r3, 0, 7.0 / 3.0, 0, 0, -2 / r3, 0, 7.0 / 3.0;
  const double derr = (flip(pure->operator_to_user(p.md.Delta_frame())) - want).cwiseAbs().maxCoeff();
  return {s.failures() == 0 && sp.failures() == 0 && derr <= 1e-10,
          "50 instances worst err " + fmt("%.2e", s.worst_error()) + " (tol 1e-8(1+S)); log Delta spectrum " +
              fmt("%.2e", sp.worst_error()) + "; Delta(m=2) " + fmt("%.2e", derr)};
}

Outcome ac3() {
  auto pure = PureSpace::purify(oscillator_space({1.0, 2.5}));
  const auto p = entropy_pipeline(pure, span_columns(pure, oscillator_modes(2, {true, true})));
  Eigen::VectorXd f(4);
  f << 0.3, -0.2, 1.0, 0.0;
  const bool mode_inf = p.form.value(VectorKplus(f)).infinite;
  Rng rng(1003);
  auto pp = PureSpace::purify(random_pure_space(rng, 4));
  const auto q = entropy_pipeline(pp, base_subspace(pp));
  const VectorKplus a(random_vector(rng, 4)), b(random_vector(rng, 4));
  const bool pure_inf = relative_entropy(q.form, b, a).infinite;
  const bool same_zero = !relative_entropy(q.form, a, a).infinite;
  return {mode_inf && pure_inf && same_zero,
          std::string("m=1 populated mode: ") + (mode_inf ? "Infinite" : "finite") +
              "; pure L=K, g!=f: " + (pure_inf ? "Infinite" : "finite") + "; g=f: " + (same_zero ? "0" : "Infinite")};
}

Outcome ac4() {
  Rng rng(1004);
  const OracleSuite s = oracle_abelian(rng, 20, 8, 1e-9);
  return {s.failures() == 0, "20 instances, worst |err| = " + fmt("%.2e", s.worst_error())};
}

Outcome ac5() {
  Rng rng(1005);
  const OracleSuite s = oracle_direct_sum(rng, 20, 1e-9);
  return {s.failures() == 0, "20 mixed sums, worst additivity error " + fmt("%.2e", s.worst_error())};
}

Outcome ac6() {
  const SmoothProbe f = SmoothProbe::bump();
  const U1Surface s(f, {}, {-2.0, 2.0});
  double worst_rel = 0.0, worst_bulk = 0.0;
  bool ok = true;
  for (double t : {-0.85, -0.7, -0.55, -0.4, -0.25, 0.15, 0.3, 0.45, 0.6, 0.75}) {
    const DerivativeReport r = derivative_report(s, t, {1e-3});
    const double want = 2 * M_PI * f.derivative(t) * f.derivative(t);
    const double rel = std::abs(r.d2S_dt2 - want) / want;
    const double bulk = std::abs(r.d2T_dt2_minus) / (1.0 + std::abs(r.S));
    worst_rel = std::max(worst_rel, rel);
    worst_bulk = std::max(worst_bulk, bulk);
    ok = ok && rel <= 1e-3 && bulk <= 1e-6;
  }
  return {ok, "10 points, worst rel err of d2S vs 2 pi f'^2 " + fmt("%.2e", worst_rel) +
                  ", worst |d2T/dt2(t-0)|/(1+S) " + fmt("%.2e", worst_bulk)};
}

Outcome ac7() {
  const SmoothProbe f = SmoothProbe::bump();
  double worst = 0.0;
  bool ok = true;
  for (double beta : {1.0, 10.0}) {
    const U1Params p{beta, Reparam::identity()};
    const U1Surface s(f, p, {-2.0, 2.0});
    for (double t : {-0.6, -0.3, 0.2, 0.5, 0.8}) {
      const DerivativeReport r = derivative_report(s, t, {1e-3});
      const double split = u1_second_derivative_terms(f, t, p).total();
      const double rel = std::abs(r.d2S_dt2 - split) / std::abs(split);
      worst = std::max(worst, rel);
      ok = ok && rel <= 1e-3;
    }
  }
  const double vac = u1_vacuum_entropy(f, 0.5);
  double prev = std::numeric_limits<double>::infinity();
  std::string gaps;
  for (double beta : {10.0, 100.0, 1000.0}) {
    const double gap = std::abs(vac - u1_kms_entropy(f, 0.5, beta));
    ok = ok && gap < prev;
    prev = gap;
    gaps += (gaps.empty() ? "" : " > ") + fmt("%.3e", gap);
  }
  return {ok, "split vs FD worst rel " + fmt("%.2e", worst) + "; KMS-vacuum gaps " + gaps};
}

Outcome ac8() {
  std::string detail;
  bool ok = true;
  auto check = [&](const TfSurface& s, const std::vector<double>& g, const std::string& name) {
    const PropertyReport r = property_suite(t_table(s, g, g));
    double worst = 0.0;
    for (const auto& c : r.checks) worst = std::min(worst, c.worst_slack);
    ok = ok && r.all_passed();
    detail += name + (r.all_passed() ? " pass" : " FAIL") + " (min slack " + fmt("%.1e", worst) + "); ";
  };
  Eigen::VectorXd f(8);
  f << 0.4, 1.0, -0.7, 0.2, 1.3, 0.1, -0.5, 0.9;
  check(MatrixSurface(spectral_family({1.5, 2.0, 3.0, 5.0}, {1.0, 6.0}), VectorKplus(f)), grid(1.1, 5.9, 20), "spectral");
  const auto g = grid(-1.2, 1.2, 20);
  check(U1Surface(SmoothProbe::bump(), {}, {-2, 2}), g, "vacuum");
  check(U1Surface(SmoothProbe::bump(), U1Params{1.0, Reparam::identity()}, {-2, 2}), g, "KMS");

  auto pure = PureSpace::purify(oscillator_space({2.0, 3.0}));
  Eigen::MatrixXd l0(4, 2);
  l0 << 1, 0, 0, 1, 1, 0, 0, 0;
  Eigen::VectorXd e(4);
  e << 1, 0, 0, 0;
  const MatrixSurface pair(two_point_family(pure, l0, Eigen::MatrixXd::Identity(4, 4), 0.5, {0, 1}), VectorKplus(e));
  const PropertyReport r = property_suite(t_table(pair, {0.25, 0.75}, {0.25, 0.75}));
  const bool flagged = !r.find("s_monotone")->passed;
  ok = ok && flagged;
  detail += std::string("two-mode pair s-monotonicity ") + (flagged ? "flagged" : "NOT flagged");
  return {ok, detail};
}

Outcome ac9() {
  Rng rng(1009);
  const OracleSuite s = invariant_suite(rng, 100, 6, 1e-8);
  return {s.failures() == 0, "100 instances, " + std::to_string(s.rows.size()) + " checks, " +
                                 std::to_string(s.failures()) + " failures, worst residual " + fmt("%.2e", s.worst_error())};
}

Outcome ac10() {
  Rng rng(1010);
  const OracleSuite s = oracle_pf_dual(rng, 50, 6, 1e-8);
  return {s.failures() == 0, "50 factorial instances, worst |P_f - P_f(modular)| " + fmt("%.2e", s.worst_error())};
}

Outcome ac11() {
  const SmoothProbe f = SmoothProbe::bump();
  const double exact = u1_vacuum_entropy(f, 0.5);
  double prev = std::numeric_limits<double>::infinity();
  bool ok = true;
  std::string gaps;
  for (int n : {16, 32, 64}) {
    const DiscretizedU1 d = discretize_u1(n, -6.0, 2.0, std::nullopt);
    const EntropyValue v = discretized_u1_family(d)->entropy(VectorKplus(d.project_probe(f)), 0.5);
    const double gap = v.infinite ? std::numeric_limits<double>::infinity() : std::abs(exact - v.value);
    ok = ok && gap < prev;
    prev = gap;
    gaps += (gaps.empty() ? "" : " > ") + fmt("%.4f", gap);
  }
  return {ok, "gaps N=16,32,64: " + gaps};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome ac12_repeat() {
  const fs::path base = fs::temp_directory_path() / "modent_acceptance";
  fs::remove_all(base);
  bool same = true;
  std::string files;
  const std::vector<std::pair<std::string, std::string>> runs{
      {"family-scan", "u1_kms.json"}, {"family-scan", "spectral_properties.json"}, {"oracle-compare", "oracles.json"}};
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::string csv;
    for (int rep = 0; rep < 2; ++rep) {
      RunOptions o;
      o.command = runs[k].first;
      o.config_path = fs::path(MODENT_CONFIG_DIR) / runs[k].second;
      o.out_dir = base / (std::to_string(k) + "_" + std::to_string(rep));
      o.seed = 12345;
      o.threads = rep == 0 ? 1 : 4;
      const RunResult r = run(o);
      if (r.exit_code != 0) return {false, runs[k].second + " exited " + std::to_string(r.exit_code)};
      const std::string name = o.command == "oracle-compare" ? "oracle.csv" : "tf_table.csv";
      const std::string now = slurp(o.out_dir / name);
      if (rep == 1) same = same && now == csv && !now.empty();
      csv = now;
    }
    files += runs[k].second + " ";
  }
  return {same, std::string("repeat runs (threads 1 vs 4, seed 12345) ") + (same ? "byte-identical" : "DIFFER") + ": " + files};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1  two-mode counterexample delta", ac1},
      {"AC2  oscillator closed form and log Delta", ac2},
      {"AC3  infinite-entropy detection", ac3},
      {"AC4  abelian closed form", ac4},
      {"AC5  direct-sum additivity", ac5},
      {"AC6  U(1) vacuum derivatives", ac6},
      {"AC7  U(1) KMS split and beta sweep", ac7},
      {"AC8  T_f property suite", ac8},
      {"AC9  modular invariant suite", ac9},
      {"AC10 P_f dual construction", ac10},
      {"AC11 discretized U(1) convergence", ac11},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  Outcome rep;
  try {
    rep = ac12_repeat();
  } catch (const std::exception& e) {
    rep = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool pass12 = rep.pass && secs < 120.0;
  failed += pass12 ? 0 : 1;
  std::printf("%s AC12 runtime and reproducibility: total %.2f s (< 120 s); %s\n", pass12 ? "PASS" : "FAIL", secs,
              rep.detail.c_str());
  std::printf("%d of 12 criteria passed\n", 12 - failed);
  return failed == 0 ? 0 : 1;
}
