#include "runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "modent/errors.hpp"
#include "oracles.hpp"

namespace modent::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

// Output directory plus the list of files written so far (writes are serial).
class Bundle {
 public:
  explicit Bundle(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream os(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + (dir_ / name).string());
    os << content;
    os.close();
    if (!os) throw IoError("write failed: " + (dir_ / name).string());
    files_.push_back({name, sha256_hex(content), content.size()});
    spdlog::debug("wrote {}", (dir_ / name).string());
  }

  void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  nlohmann::json file_list() const {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& f : files_) a.push_back({{"path", f.name}, {"sha256", f.sha}, {"bytes", f.bytes}});
    return a;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (const auto& f : files_) n.push_back(f.name);
    return n;
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct File {
    std::string name, sha;
    std::size_t bytes;
  };
  std::filesystem::path dir_;
  std::vector<File> files_;
};

struct Context {
  json config;
  Tolerances tol;
  std::uint64_t seed = 0;
  int threads = 1;
  Bundle* bundle = nullptr;
  json summary = json::object();
  bool properties_ok = true;
  json timings = json::object();
};

json entropy_json(const EntropyValue& v) {
  return {{"infinite", v.infinite}, {"value", v.infinite ? json(nullptr) : json(v.value)}};
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// Finite doubles only; JSON has no inf.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_header(std::initializer_list<const char*> cols) {
  std::string h;
  for (const char* c : cols) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h + "\n";
}

std::string tf_csv(const TfTable& t) {
  std::string out = csv_header({"s", "t", "T", "is_infinite"});
  for (std::size_t i = 0; i < t.s_grid.size(); ++i)
    for (std::size_t j = 0; j < t.t_grid.size(); ++j) {
      const bool inf = t.is_infinite(i, j);
      out += format_double(t.s_grid[i]) + ',' + format_double(t.t_grid[j]) + ',' +
             (inf ? std::string("inf") : format_double(t.values(i, j))) + ',' + (inf ? "1" : "0") + "\n";
    }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> grids_of(const json& config) {
  const json& g = require(config, "grid");
  std::vector<double> t = parse_grid(require(g, "t"), "grid.t");
  std::vector<double> s = g.contains("s") ? parse_grid(g.at("s"), "grid.s") : t;
  return {s, t};
}

PureSpacePtr purify_spec(const SpaceSpec& spec, const Tolerances& tol) {
  return PureSpace::purify(*spec.space, {true, tol.rank});
}

// ---------------------------------------------------------------------------

void cmd_validate(Context& ctx) {
  const SpaceSpec spec = space_of(ctx.config, ctx.tol);
  const ValidationReport r = validate_space(*spec.space, ctx.tol.rank);
  json j{{"model", spec.model},
         {"dim", spec.dim()},
         {"is_valid", r.is_valid},
         {"worst_symmetry_defect", r.worst_symmetry_defect},
         {"worst_antisymmetry_defect", r.worst_antisymmetry_defect},
         {"min_tau_eigenvalue", r.min_tau_eigenvalue},
         {"operator_norm_D", r.operator_norm_D},
         {"kernel_dim", r.kernel_dim},
         {"padding_required", r.padding_required},
         {"messages", r.messages},
         {"tolerance", ctx.tol.rank}};
  if (r.is_valid) {
    auto pure = purify_spec(spec, ctx.tol);
    j["purification"] = {{"padded", pure->padded()}, {"real_dim", pure->real_dim()}};
  }
  ctx.bundle->write_json("validation.json", j);
  ctx.summary = {{"is_valid", r.is_valid}};
  ctx.properties_ok = r.is_valid;
}

void cmd_decompose(Context& ctx) {
  const SpaceSpec spec = space_of(ctx.config, ctx.tol);
  auto pure = purify_spec(spec, ctx.tol);
  const Eigen::MatrixXd gens = parse_subspace(require(ctx.config, "subspace"), spec);
  auto dec = std::make_shared<const Decomposition>(decompose(pure, span_columns(pure, gens, ctx.tol.rank), ctx.tol.rank));
  const DecompositionChecks dc = check_decomposition(*dec);
  json j;
  j["dims"] = {{"L", dec->L.dim()},           {"Lprime", dec->Lprime.dim()},
               {"L0plus", dec->L0plus.dim()}, {"LaPlus", dec->LaPlus.dim()},
               {"LfPlus", dec->LfPlus.dim()}, {"Linf", dec->Linf.dim()},
               {"La", dec->La.dim()},         {"Lf", dec->Lf.dim()}};
  j["checks"] = {{"orthogonality", dc.orthogonality},
                 {"dim_total", dc.dim_total},
                 {"invariance", dc.invariance},
                 {"P_a_idempotent", dc.P_a_idempotent},
                 {"P_f_idempotent", dc.P_f_idempotent},
                 {"Q_idempotent", dc.Q_idempotent},
                 {"Q_kills_Lprime", dc.Q_kills_Lprime},
                 {"P_f_fixes_Lf", dc.P_f_fixes_Lf},
                 {"P_f_kills_LfPrime", dc.P_f_kills_LfPrime},
                 {"L_reconstruction", dc.L_reconstruction}};
  j["tolerance"] = ctx.tol.rank;
  j["coordinates"] = "user basis of K (+) K";
  j["P_a"] = matrix_json(dec->P_a_user());
  j["P_f"] = matrix_json(dec->P_f_user());
  j["Q"] = matrix_json(dec->Q_user());
  const ModularData md = modular_data(dec);
  if (md.standard_dim() > 0) {
    const ModularChecks mc = check_modular(EntropyPipeline{pure, dec, md, entropy_form(md)});
    j["modular"] = {{"log_delta_spectrum", vector_json(md.log_delta_spectrum())},
                    {"Delta", matrix_json(pure->operator_to_user(md.Delta_frame()))},
                    {"J", matrix_json(pure->operator_to_user(md.J_frame()))},
                    {"checks",
                     {{"tomita_fixed", mc.tomita_fixed},
                      {"J_square", mc.J_square},
                      {"J_delta_J", mc.J_delta_J},
                      {"R_min_eigenvalue", mc.R_min_eigenvalue},
                      {"R_minus_cK2_norm", mc.R_minus_cK2_norm},
                      {"R_kills_Lprime", mc.R_kills_Lprime}}}};
  }
  ctx.bundle->write_json("decomposition.json", j);
  ctx.summary = j["dims"];
}

void cmd_entropy(Context& ctx) {
  json j;
  if (auto u1 = u1_params_of(ctx.config)) {
    const SmoothProbe f = parse_smooth_probe(require(ctx.config, "probe"));
    const json& ts = require(ctx.config, "t");
    const std::vector<double> t = ts.is_array() ? parse_doubles(ts, "t") : std::vector<double>{ts.get<double>()};
    json vals = json::array();
    for (double x : t)
      vals.push_back({{"t", x}, {"entropy", u1_entropy(f, x, *u1, ctx.tol.quadrature())}});
    j = {{"model", ctx.config.at("model")}, {"source", "closed form half-line integral"},
         {"quadrature", {{"abs_tol", ctx.tol.quad_abs}, {"rel_tol", ctx.tol.quad_rel}}},
         {"values", vals}};
    ctx.bundle->write_json("entropy.json", j);
    ctx.summary = {{"points", t.size()}};
    return;
  }
  const SpaceSpec spec = space_of(ctx.config, ctx.tol);
  auto pure = purify_spec(spec, ctx.tol);
  const json& sub = require(ctx.config, "subspace");
  const EntropyPipeline p = entropy_pipeline(pure, span_columns(pure, parse_subspace(sub, spec), ctx.tol.rank), ctx.tol.rank);
  EntropyForm form = p.form;
  form.infinity_threshold = ctx.tol.infinity;
  const VectorKplus f = parse_probe(require(ctx.config, "probe"), spec, *pure, ctx.tol);
  const EntropyValue s = form.value(f);
  j["entropy"] = entropy_json(s);
  j["infinity_threshold"] = ctx.tol.infinity;
  if (ctx.config.contains("g")) {
    const VectorKplus g = parse_probe(ctx.config.at("g"), spec, *pure, ctx.tol);
    j["relative_entropy"] = entropy_json(relative_entropy(form, g, f));
    j["relative_entropy_note"] = "S(g - f)";
  }
  if (ctx.config.contains("cut")) {
    const Decomposition d0 = decompose(pure, span_columns(pure, parse_subspace(ctx.config.at("cut"), spec), ctx.tol.rank), ctx.tol.rank);
    const EntropyValue sq = form.value_frame(d0.Q * pure->to_frame(f));
    j["entropy_cut_probe"] = entropy_json(sq);
    if (!s.infinite && !sq.infinite) j["delta"] = s.value - sq.value;
    else j["delta"] = nullptr;
  }
  // closed forms where the model has one
  if (auto mask = subspace_mask(sub, spec)) {
    const json& pj = ctx.config.at("probe");
    if (spec.model == "oscillator" && pj.is_array() && static_cast<int>(pj.size()) == spec.dim()) {
      const EntropyValue ref = oscillator_entropy(spec.m, *mask, parse_vector(pj, "probe"));
      j["oracle"] = {{"name", "oscillator closed form 2 (f, E arcoth(M) f)"}, {"value", entropy_json(ref)}};
      if (!ref.infinite && !s.infinite) j["oracle"]["abs_error"] = std::abs(ref.value - s.value);
    } else if (spec.model == "abelian" && pj.is_object()) {
      Eigen::VectorXd im = pj.contains("im") ? parse_vector(pj.at("im"), "probe.im") : Eigen::VectorXd::Zero(spec.dim());
      const double ref = abelian_entropy(spec.mu, *mask, im);
      j["oracle"] = {{"name", "abelian closed form 2 sum mu (Im f)^2"}, {"value", ref}};
      if (!s.infinite) j["oracle"]["abs_error"] = std::abs(ref - s.value);
    }
  }
  ctx.bundle->write_json("entropy.json", j);
  ctx.summary = j["entropy"];
}

json derivative_json(const TfSurface& surface, const SurfaceSpec& ss, double t, const Context& ctx) {
  DerivativeOptions o;
  if (ctx.tol.fd_h > 0) o.h = ctx.tol.fd_h;
  o.jump_factor = ctx.tol.jump;
  json j{{"t", t}};
  try {
    const DerivativeReport r = derivative_report(surface, t, o);
    j.update({{"h", r.h},
              {"S", r.S},
              {"dS_dt", r.dS_dt},
              {"d2S_dt2", r.d2S_dt2},
              {"d2T_dt2_minus", r.d2T_dt2_minus},
              {"d2T_dsdt_minus", r.d2T_dsdt_minus},
              {"d2T_ds2_minus", r.d2T_ds2_minus},
              {"d2T_dt2_plus", r.d2T_dt2_plus},
              {"bound_residual_upper", r.bound_residual_upper},
              {"bound_residual_lower", r.bound_residual_lower},
              {"bound_residual_lower_smooth", r.bound_residual_lower_smooth}});
    if (ss.u1) {
      const SecondDerivativeTerms terms = u1_second_derivative_terms(*ss.u1_probe, t, *ss.u1, ctx.tol.quadrature());
      const double abs_err = std::abs(r.d2S_dt2 - terms.total());
      const double rel = abs_err / std::max(std::abs(terms.total()), 1e-300);
      // where f' vanishes the relative error means nothing; allow FD truncation
      const double floor = 10.0 * r.h * r.h * (1.0 + std::abs(r.S));
      j["closed_form"] = {{"boundary", terms.boundary},
                          {"bulk", terms.bulk},
                          {"total", terms.total()},
                          {"d2S_abs_error", abs_err},
                          {"d2S_relative_error", num(rel)},
                          {"abs_floor", floor},
                          {"d2T_dt2_minus_minus_bulk", r.d2T_dt2_minus - terms.bulk},
                          {"tolerance", ctx.tol.derivative_rel},
                          {"matches", abs_err <= ctx.tol.derivative_rel * std::abs(terms.total()) + floor},
                          {"oracle", "two-term split: boundary d2T/dsdt + bulk d2T/dt2 at s = t - 0"}};
    }
  } catch (const NumericalError& e) {
    j["skipped"] = e.what();
  } catch (const StencilOutOfDomain& e) {
    j["skipped"] = e.what();
  }
  return j;
}

void cmd_family_scan(Context& ctx) {
  const SurfaceSpec ss = build_surface(ctx.config, ctx.tol);
  const auto [s, t] = grids_of(ctx.config);
  auto t0 = Clock::now();
  const TfTable table = t_table(*ss.surface, s, t, ctx.threads);
  ctx.timings["table_s"] = seconds_since(t0);
  ctx.bundle->write("tf_table.csv", tf_csv(table));
  json diag = json::array();
  for (std::size_t k = 0; k < t.size(); ++k)
    diag.push_back({{"t", t[k]}, {"S", table.diagonal_infinite[k] ? json(nullptr) : json(table.entropy_diagonal(k))}});
  json j{{"family", ss.kind},
         {"description", ss.surface->description()},
         {"domain", {ss.surface->domain().first, ss.surface->domain().second}},
         {"s_points", s.size()},
         {"t_points", t.size()},
         {"max_finite_T", num(table.max_finite())},
         {"entropy_diagonal", diag}};
  ctx.bundle->write_json("family_scan.json", j);
  if (ctx.config.contains("derivative_points")) {
    json d = json::array();
    bool all_match = true;
    for (double x : parse_doubles(ctx.config.at("derivative_points"), "derivative_points")) {
      d.push_back(derivative_json(*ss.surface, ss, x, ctx));
      if (d.back().contains("closed_form") && !d.back()["closed_form"]["matches"].get<bool>()) all_match = false;
    }
    ctx.bundle->write_json("derivatives.json", {{"points", d}, {"split_matches_everywhere", all_match}});
  }
  ctx.summary = {{"cells", s.size() * t.size()}, {"max_finite_T", num(table.max_finite())}};
}

void cmd_dmp_check(Context& ctx) {
  const SurfaceSpec ss = build_surface(ctx.config, ctx.tol);
  if (!ss.family) throw ConfigError("dmp-check needs a finite-dimensional family");
  std::vector<std::pair<double, double>> pairs;
  if (ctx.config.contains("pairs")) {
    for (const auto& p : ctx.config.at("pairs")) {
      const auto v = parse_doubles(p, "pairs");
      if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError("pairs: expected [s, t] with s < t");
      pairs.emplace_back(v[0], v[1]);
    }
  } else {
    const auto [s, t] = grids_of(ctx.config);
    for (double a : s)
      for (double b : t)
        if (a < b) pairs.emplace_back(a, b);
  }
  const int samples = get_int(ctx.config, "samples", 32);
  json reps = json::array();
  bool all = true;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const DmpReport r = dmp_check(*ss.family, pairs[k].first, pairs[k].second, samples, ctx.tol.dmp, ctx.seed + k);
    all = all && r.holds;
    reps.push_back({{"s", r.s}, {"t", r.t}, {"residual", r.residual}, {"tol", r.tol}, {"holds", r.holds},
                    {"dim_plus", r.dim_plus}, {"dim_minus", r.dim_minus}, {"samples", r.samples},
                    {"density_condition", r.density_vacuous ? "automatic (finite dimension)" : "checked"}});
  }
  json j{{"family", ss.kind}, {"reports", reps}, {"all_hold", all}};
  if (ctx.config.contains("expect_holds")) {
    const bool want = ctx.config.at("expect_holds").get<bool>();
    j["expect_holds"] = want;
    ctx.properties_ok = want == all;
  }
  ctx.bundle->write_json("dmp.json", j);
  ctx.summary = {{"pairs", pairs.size()}, {"all_hold", all}};
}

std::string oracle_csv(const std::vector<OracleSuite>& suites) {
  std::string out = csv_header({"suite", "check", "instance", "engine", "reference", "error", "tol", "pass"});
  for (const auto& s : suites)
    for (const auto& r : s.rows)
      out += s.name + ',' + r.oracle + ',' + std::to_string(r.instance) + ',' + format_double(r.engine) + ',' +
             format_double(r.reference) + ',' + format_double(r.error) + ',' + format_double(r.tol) + ',' +
             (r.pass ? "1" : "0") + "\n";
  return out;
}

void cmd_property_suite(Context& ctx) {
  json j = json::object();
  bool ok = true;
  if (ctx.config.contains("grid")) {
    const SurfaceSpec ss = build_surface(ctx.config, ctx.tol);
    const auto [s, t] = grids_of(ctx.config);
    auto t0 = Clock::now();
    const TfTable table = t_table(*ss.surface, s, t, ctx.threads);
    ctx.timings["table_s"] = seconds_since(t0);
    ctx.bundle->write("tf_table.csv", tf_csv(table));
    const PropertyReport rep = property_suite(table, ctx.tol.property);
    std::vector<std::string> expected;
    if (ctx.config.contains("expect_violations"))
      for (const auto& x : ctx.config.at("expect_violations")) expected.push_back(x.get<std::string>());
    json checks = json::array();
    for (const auto& c : rep.checks) {
      const bool want_violation = std::find(expected.begin(), expected.end(), c.name) != expected.end();
      const bool as_expected = c.passed != want_violation;
      ok = ok && as_expected;
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"worst_slack", c.worst_slack},
                        {"violations", c.violations}, {"first_violation", c.first_violation},
                        {"violation_expected", want_violation}, {"as_expected", as_expected}});
    }
    for (const auto& e : expected)
      if (!rep.find(e)) throw ConfigError("expect_violations: unknown check '" + e + "'");
    j["table"] = {{"family", ss.kind}, {"tol", rep.tol}, {"infinite_cells", rep.infinite_cells}, {"checks", checks}};
  }
  if (ctx.config.contains("randomized")) {
    const json& r = ctx.config.at("randomized");
    Rng rng(ctx.seed);
    OracleSuite inv = invariant_suite(rng, get_int(r, "instances", 100), get_int(r, "max_dim", 6),
                                      get_double(r, "tol", ctx.tol.oracle));
    ctx.bundle->write("invariants.csv", oracle_csv({inv}));
    j["randomized"] = inv.summary();
    j["randomized"]["seed"] = ctx.seed;
    ok = ok && inv.failures() == 0;
  }
  if (j.empty()) throw ConfigError("property-suite needs a grid or a randomized section");
  j["all_passed"] = ok;
  ctx.bundle->write_json("property_report.json", j);
  ctx.properties_ok = ok;
  ctx.summary = {{"all_passed", ok}};
}

void cmd_oracle_compare(Context& ctx) {
  const json& list = require(ctx.config, "oracles");
  if (!list.is_array() || list.empty()) throw ConfigError("oracles must be a non-empty array");
  Rng rng(ctx.seed);
  std::vector<OracleSuite> suites;
  for (const auto& o : list) {
    const std::string kind = get_string(o, "kind", "");
    const int n = get_int(o, "instances", 20);
    const int dim = get_int(o, "max_dim", 6);
    if (kind == "two_mode_delta") suites.push_back(oracle_two_mode_delta(rng, n, get_double(o, "tol", 1e-9)));
    else if (kind == "oscillator") suites.push_back(oracle_oscillator(rng, n, dim, get_double(o, "tol", ctx.tol.oracle)));
    else if (kind == "oscillator_spectrum") suites.push_back(oracle_oscillator_spectrum(rng, n, get_double(o, "tol", 1e-9)));
    else if (kind == "abelian") suites.push_back(oracle_abelian(rng, n, dim, get_double(o, "tol", 1e-9)));
    else if (kind == "direct_sum") suites.push_back(oracle_direct_sum(rng, n, get_double(o, "tol", 1e-9)));
    else if (kind == "pf_dual") suites.push_back(oracle_pf_dual(rng, n, dim, get_double(o, "tol", ctx.tol.oracle)));
    else if (kind == "invariants") suites.push_back(invariant_suite(rng, n, dim, get_double(o, "tol", ctx.tol.oracle)));
    else throw ConfigError("unknown oracle kind '" + kind + "'");
  }
  ctx.bundle->write("oracle.csv", oracle_csv(suites));
  json sums = json::array();
  bool ok = true;
  for (const auto& s : suites) {
    sums.push_back(s.summary());
    ok = ok && s.failures() == 0;
  }
  ctx.bundle->write_json("oracle.json", {{"seed", ctx.seed}, {"suites", sums}, {"all_passed", ok}});
  ctx.properties_ok = ok;
  ctx.summary = {{"all_passed", ok}};
}

void cmd_convergence(Context& ctx) {
  const json& c = require(ctx.config, "convergence");
  const std::string kind = get_string(c, "kind", "resolution");
  const SmoothProbe f = parse_smooth_probe(require(c, "probe"));
  const double t = get_double(c, "t");
  const QuadratureParams q = ctx.tol.quadrature();
  std::vector<double> xs, approx, exact;
  std::string csv;
  if (kind == "resolution") {
    std::vector<double> ns = parse_doubles(require(c, "resolutions"), "resolutions");
    const Domain w = parse_domain(require(c, "window"), "window");
    std::optional<double> beta;
    if (c.contains("beta") && !c.at("beta").is_null()) beta = get_double(c, "beta");
    const double ref = beta ? u1_kms_entropy(f, t, *beta, q) : u1_vacuum_entropy(f, t, q);
    auto one = [&](double nd) {
      const DiscretizedU1 d = discretize_u1(static_cast<int>(nd), w.first, w.second, beta, q);
      auto fam = discretized_u1_family(d);
      const EntropyValue v = fam->entropy(VectorKplus(d.project_probe(f, q)), t);
      if (v.infinite) throw NumericalError("discretized entropy is infinite");
      return v.value;
    };
    // independent resolutions; results land in input order
    std::vector<std::future<double>> jobs;
    std::vector<double> vals(ns.size());
    std::size_t next = 0;
    while (next < ns.size()) {
      jobs.clear();
      const std::size_t batch = std::min<std::size_t>(ns.size() - next, std::max(1, ctx.threads));
      for (std::size_t k = 0; k < batch; ++k) jobs.push_back(std::async(std::launch::async, one, ns[next + k]));
      for (std::size_t k = 0; k < batch; ++k) vals[next + k] = jobs[k].get();
      next += batch;
    }
    xs = ns;
    approx = vals;
    exact.assign(ns.size(), ref);
    csv = csv_header({"N", "S_N", "S_exact", "gap"});
  } else if (kind == "beta") {
    xs = parse_doubles(require(c, "betas"), "betas");
    const double vac = u1_vacuum_entropy(f, t, q);
    for (double b : xs) {
      approx.push_back(u1_kms_entropy(f, t, b, q));
      exact.push_back(vac);
    }
    csv = csv_header({"beta", "S_kms", "S_vacuum", "gap"});
  } else {
    throw ConfigError("convergence.kind must be resolution or beta");
  }
  json rows = json::array();
  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double gap = std::abs(exact[k] - approx[k]);
    decreasing = decreasing && gap < prev;
    prev = gap;
    csv += format_double(xs[k]) + ',' + format_double(approx[k]) + ',' + format_double(exact[k]) + ',' + format_double(gap) + "\n";
    rows.push_back({{"x", xs[k]}, {"value", approx[k]}, {"reference", exact[k]}, {"gap", gap}});
  }
  ctx.bundle->write("convergence.csv", csv);
  ctx.bundle->write_json("convergence.json", {{"kind", kind}, {"t", t}, {"rows", rows},
                                              {"gap_strictly_decreasing", decreasing},
                                              {"criterion", "qualitative: gap decreases, no rate asserted"}});
  ctx.properties_ok = decreasing;
  ctx.summary = {{"gap_strictly_decreasing", decreasing}};
}

using Handler = void (*)(Context&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> h{
      {"validate", cmd_validate},         {"decompose", cmd_decompose},
      {"entropy", cmd_entropy},           {"family-scan", cmd_family_scan},
      {"dmp-check", cmd_dmp_check},       {"property-suite", cmd_property_suite},
      {"oracle-compare", cmd_oracle_compare}, {"convergence", cmd_convergence}};
  return h;
}

json versions() {
  return {{"modent", "0.3.0"},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

json load_config(const RunOptions& opts) {
  if (opts.config) return *opts.config;
  if (opts.config_path.empty()) throw ConfigError("--config is required");
  std::ifstream is(opts.config_path);
  if (!is) throw IoError("cannot read config " + opts.config_path.string());
  try {
    return json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& h : handlers()) n.push_back(h.first);
    return n;
  }();
  return names;
}

void setup_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::get("modent");
    if (!logger) logger = spdlog::stderr_color_mt("modent");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S.%e] [%l] %v");
    const char* env = std::getenv("MODENT_LOG");
    const auto level = env ? spdlog::level::from_str(env) : spdlog::level::warn;
    // from_str maps unknown names to off; keep warnings in that case
    spdlog::set_level(env && level == spdlog::level::off && std::string(env) != "off" ? spdlog::level::warn
                                                                                        : level);
  });
}

RunResult run(const RunOptions& opts) {
  setup_logging();
  RunResult res;
  const auto t0 = Clock::now();
  std::optional<Bundle> bundle;
  Context ctx;
  json config_echo;

  auto finish = [&](int code, const std::string& status, const std::string& err) {
    res.exit_code = code;
    res.status = status;
    res.error = err;
    res.summary = ctx.summary;
    if (!bundle) return;
    json manifest{{"tool", "modent"},
                  {"command", opts.command},
                  {"status", status},
                  {"exit_code", code},
                  {"complete", code == 0 || code == 1},
                  {"config", config_echo},
                  {"config_path", opts.config_path.string()},
                  {"seed", ctx.seed},
                  {"threads", ctx.threads},
                  {"tolerances", ctx.tol.to_json()},
                  {"versions", versions()},
                  {"summary", ctx.summary},
                  {"files", bundle->file_list()}};
    ctx.timings["total_s"] = seconds_since(t0);
    manifest["timings"] = ctx.timings;
    if (!err.empty()) manifest["error"] = err;
    try {
      std::ofstream os(bundle->dir() / "manifest.json", std::ios::trunc);
      os << manifest.dump(2) << "\n";
      if (!os) throw IoError("manifest write failed");
      res.files = bundle->names();
      res.files.push_back("manifest.json");
    } catch (const std::exception& e) {
      res.exit_code = 4;
      res.status = "io_error";
      res.error = e.what();
    }
  };

  try {
    auto it = std::find_if(handlers().begin(), handlers().end(),
                           [&](const auto& h) { return h.first == opts.command; });
    if (it == handlers().end()) throw ConfigError("unknown command '" + opts.command + "'");
    bundle.emplace(opts.out_dir);
    ctx.bundle = &*bundle;
    ctx.config = load_config(opts);
    config_echo = ctx.config;
    if (!ctx.config.is_object()) throw ConfigError("config must be a JSON object");
    ctx.tol = parse_tolerances(ctx.config.value("tolerances", json()));
    for (const auto& o : opts.tol_overrides) apply_override(ctx.tol, o);
    ctx.seed = opts.seed ? *opts.seed : ctx.config.value("seed", std::uint64_t{0});
    ctx.threads = std::max(1, opts.threads);
    spdlog::info("running {} (seed {}, threads {})", opts.command, ctx.seed, ctx.threads);
    it->second(ctx);
    if (ctx.properties_ok) finish(0, "ok", "");
    else finish(1, "property_failure", "");
  } catch (const ConfigError& e) {
    finish(2, "config_error", e.what());
  } catch (const json::exception& e) {
    finish(2, "config_error", e.what());
  } catch (const NumericalError& e) {
    finish(3, "numerical_error", e.what());
  } catch (const IoError& e) {
    finish(4, "io_error", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    finish(4, "io_error", e.what());
  }
  if (res.exit_code != 0) spdlog::warn("{}: {} {}", opts.command, res.status, res.error);
  return res;
}

}  // namespace modent::cli
