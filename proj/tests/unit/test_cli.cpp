#include <gtest/gtest.h>

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "config.hpp"
#include "modent/errors.hpp"
#include "runner.hpp"

using modent::cli::RunOptions;
using modent::cli::run;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path config_dir() { return fs::path(MODENT_CONFIG_DIR); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "modent_cli_tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string sha256(const std::string& s) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  EVP_Digest(s.data(), s.size(), md, &n, EVP_sha256(), nullptr);
  std::string hex;
  char b[3];
  for (unsigned int i = 0; i < n; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

modent::cli::RunResult run_config(const std::string& cmd, const std::string& cfg, const fs::path& out,
                                  int threads = 1) {
  RunOptions o;
  o.command = cmd;
  o.config_path = config_dir() / cfg;
  o.out_dir = out;
  o.threads = threads;
  return run(o);
}

json manifest(const fs::path& out) { return json::parse(slurp(out / "manifest.json")); }

}  // namespace

TEST(Cli, ValidateValidSpace) {
  const auto out = scratch("validate");
  const auto r = run_config("validate", "space.json", out);
  EXPECT_EQ(r.exit_code, 0);
  const json v = json::parse(slurp(out / "validation.json"));
  EXPECT_TRUE(v["is_valid"].get<bool>());
  EXPECT_TRUE(manifest(out)["complete"].get<bool>());
}

TEST(Cli, TwoModeDeltaIsLogTwo) {
  const auto out = scratch("two_mode");
  ASSERT_EQ(run_config("entropy", "two_mode.json", out).exit_code, 0);
  const json e = json::parse(slurp(out / "entropy.json"));
  EXPECT_NEAR(e["delta"].get<double>(), std::log(2.0), 1e-9);
}

TEST(Cli, ManifestHashesEveryFile) {
  const auto out = scratch("hashes");
  ASSERT_EQ(run_config("family-scan", "u1_kms.json", out).exit_code, 0);
  const json m = manifest(out);
  EXPECT_EQ(m["config"]["model"], "u1_kms");
  EXPECT_TRUE(m.contains("versions"));
  EXPECT_TRUE(m["timings"].contains("total_s"));
  std::size_t n = 0;
  for (const auto& f : m["files"]) {
    EXPECT_EQ(f["sha256"].get<std::string>(), sha256(slurp(out / f["path"].get<std::string>())));
    ++n;
  }
  EXPECT_EQ(n, 3u);  // table, scan summary, derivatives
  const json d = json::parse(slurp(out / "derivatives.json"));
  EXPECT_TRUE(d["split_matches_everywhere"].get<bool>());
}

TEST(Cli, CsvIsByteIdenticalAcrossRunsAndThreads) {
  const auto a = scratch("repeat_a"), b = scratch("repeat_b");
  ASSERT_EQ(run_config("family-scan", "spectral_properties.json", a, 1).exit_code, 0);
  ASSERT_EQ(run_config("family-scan", "spectral_properties.json", b, 3).exit_code, 0);
  EXPECT_EQ(slurp(a / "tf_table.csv"), slurp(b / "tf_table.csv"));
  const std::string csv = slurp(a / "tf_table.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "s,t,T,is_infinite");
}

TEST(Cli, SeededOracleRunsRepeat) {
  const auto a = scratch("oracle_a"), b = scratch("oracle_b");
  ASSERT_EQ(run_config("oracle-compare", "oracles.json", a).exit_code, 0);
  ASSERT_EQ(run_config("oracle-compare", "oracles.json", b).exit_code, 0);
  EXPECT_EQ(slurp(a / "oracle.csv"), slurp(b / "oracle.csv"));
  RunOptions o;
  o.command = "oracle-compare";
  o.config_path = config_dir() / "oracles.json";
  o.out_dir = scratch("oracle_c");
  o.seed = 99;
  ASSERT_EQ(run(o).exit_code, 0);
  EXPECT_NE(slurp(a / "oracle.csv"), slurp(o.out_dir / "oracle.csv"));
}

TEST(Cli, PropertyFailureExitsOneWithReport) {
  json cfg = json::parse(slurp(config_dir() / "two_mode_pair_properties.json"));
  cfg.erase("expect_violations");
  RunOptions o;
  o.command = "property-suite";
  o.config = cfg;
  o.out_dir = scratch("propfail");
  const auto r = run(o);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_TRUE(fs::exists(o.out_dir / "property_report.json"));
  EXPECT_TRUE(manifest(o.out_dir)["complete"].get<bool>());
  // with the violation declared the run succeeds
  EXPECT_EQ(run_config("property-suite", "two_mode_pair_properties.json", scratch("propok")).exit_code, 0);
}

TEST(Cli, ConfigErrorsExitTwo) {
  RunOptions o;
  o.command = "validate";
  o.out_dir = scratch("cfgerr");
  o.config = json{{"space", {{"tau", {{1.0, 0.0}, {0.0, 1.0}}}, {"sigma", {{0.0, 2.0}, {-2.0, 0.0}}}}}};
  o.command = "decompose";
  o.config->operator[]("subspace") = json{{"full", true}};
  auto r = run(o);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(manifest(o.out_dir)["complete"].get<bool>());

  o.config = json{{"space", {{"model", "oscillator"}, {"m", {2.0}}}}};
  o.command = "validate";
  o.tol_overrides = {"nonsense=1"};
  EXPECT_EQ(run(o).exit_code, 2);
  o.tol_overrides = {"rank=abc"};
  EXPECT_EQ(run(o).exit_code, 2);
  o.tol_overrides = {};
  o.command = "no-such-command";
  EXPECT_EQ(run(o).exit_code, 2);

  RunOptions bad;
  bad.command = "validate";
  bad.out_dir = scratch("badjson");
  fs::create_directories(bad.out_dir);
  bad.config_path = bad.out_dir / "broken.json";
  std::ofstream(bad.config_path) << "{ not json";
  EXPECT_EQ(run(bad).exit_code, 2);
}

TEST(Cli, InvalidSpaceReportsAndExitsOne) {
  RunOptions o;
  o.command = "validate";
  o.out_dir = scratch("invalid");
  o.config = json{{"space", {{"tau", {{1.0, 0.0}, {0.0, 1.0}}}, {"sigma", {{0.0, 2.0}, {-2.0, 0.0}}}}}};
  EXPECT_EQ(run(o).exit_code, 1);
  EXPECT_FALSE(json::parse(slurp(o.out_dir / "validation.json"))["is_valid"].get<bool>());
}

TEST(Cli, NumericalErrorExitsThree) {
  RunOptions o;
  o.command = "entropy";
  o.out_dir = scratch("numerr");
  o.config = json{{"model", "u1_vacuum"}, {"probe", {{"kind", "bump"}}}, {"t", 0.3}};
  o.tol_overrides = {"quad_abs=0", "quad_rel=1e-300"};
  const auto r = run(o);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_FALSE(manifest(o.out_dir)["complete"].get<bool>());
}

TEST(Cli, UnwritableOutputExitsFour) {
  const auto base = scratch("ioerr");
  fs::create_directories(base);
  std::ofstream(base / "file") << "x";
  RunOptions o;
  o.command = "validate";
  o.config_path = config_dir() / "space.json";
  o.out_dir = base / "file" / "sub";
  EXPECT_EQ(run(o).exit_code, 4);
}

TEST(Cli, ToleranceOverrideIsRecorded) {
  RunOptions o;
  o.command = "validate";
  o.config_path = config_dir() / "space.json";
  o.out_dir = scratch("override");
  o.tol_overrides = {"rank=1e-9"};
  ASSERT_EQ(run(o).exit_code, 0);
  EXPECT_DOUBLE_EQ(manifest(o.out_dir)["tolerances"]["rank"].get<double>(), 1e-9);
}

TEST(Cli, DmpExpectations) {
  EXPECT_EQ(run_config("dmp-check", "dmp_spectral.json", scratch("dmp1")).exit_code, 0);
  const auto out = scratch("dmp2");
  EXPECT_EQ(run_config("dmp-check", "dmp_two_mode.json", out).exit_code, 0);
  EXPECT_FALSE(json::parse(slurp(out / "dmp.json"))["all_hold"].get<bool>());
}

TEST(Cli, ConvergenceSweeps) {
  const auto out = scratch("conv");
  ASSERT_EQ(run_config("convergence", "kms_beta.json", out).exit_code, 0);
  const std::string csv = slurp(out / "convergence.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "beta,S_kms,S_vacuum,gap");
}

TEST(Cli, DecomposeReportsBlocks) {
  const auto out = scratch("decomp");
  ASSERT_EQ(run_config("decompose", "decompose.json", out).exit_code, 0);
  const json d = json::parse(slurp(out / "decomposition.json"));
  EXPECT_EQ(d["dims"]["Lf"], 2);
  EXPECT_EQ(d["dims"]["Linf"], 0);
  EXPECT_LT(d["checks"]["orthogonality"].get<double>(), 1e-10);
}

TEST(CliConfig, GridsAndOverrides) {
  using modent::cli::parse_grid;
  const auto g = parse_grid(json{{"linspace", {0.0, 1.0, 5}}}, "g");
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[2], 0.5);
  EXPECT_THROW(parse_grid(json::array({1.0, 0.0}), "g"), modent::ConfigError);
  modent::cli::Tolerances t;
  modent::cli::apply_override(t, "dmp=1e-6");
  EXPECT_DOUBLE_EQ(t.dmp, 1e-6);
  EXPECT_THROW(modent::cli::apply_override(t, "dmp"), modent::ConfigError);
}

TEST(CliConfig, FormatDouble) {
  EXPECT_EQ(modent::cli::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(modent::cli::format_double(1.0 / 0.0), "inf");
}
