#include <iostream>

#include <CLI11.hpp>

#include "runner.hpp"

int main(int argc, char** argv) {
  modent::cli::setup_logging();
  modent::cli::RunOptions opts;
  std::string config, out = "modent_out";
  std::int64_t seed = -1;

  CLI::App app{"modent: modular entropy of coherent states on symplectic spaces"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (created if missing)");
  app.add_option("--seed", seed, "seed for randomized suites (overrides the config)");
  app.add_option("--threads", opts.threads, "worker threads for grid cells and sweeps")->check(CLI::PositiveNumber);
  app.add_option("--tol-override", opts.tol_overrides, "override a tolerance, KEY=VAL (repeatable)");

  const std::vector<std::pair<std::string, std::string>> subs{
      {"validate", "check tau, sigma and |sigma| <= tau; report purification data"},
      {"decompose", "four-way split of K+ and the projectors P_a, P_f, Q"},
      {"entropy", "entropy S_L(f), relative entropy and cut deltas"},
      {"family-scan", "T_f(s, t) table and derivative reports"},
      {"dmp-check", "differential modular position residuals"},
      {"property-suite", "monotonicity, constancy, rectangle and modular invariants"},
      {"oracle-compare", "engine against closed forms on random instances"},
      {"convergence", "discretization and KMS-to-vacuum sweeps"}};
  for (const auto& [name, help] : subs) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  opts.command = app.get_subcommands().front()->get_name();
  opts.config_path = config;
  opts.out_dir = out;
  if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);

  const auto res = modent::cli::run(opts);
  if (res.exit_code >= 2) std::cerr << "modent " << opts.command << ": " << res.error << "\n";
  else std::cout << res.summary.dump() << "\n";
  return res.exit_code;
}
