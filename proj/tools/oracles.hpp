#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "modent/random_instances.hpp"

namespace modent::cli {

/// One engine-versus-reference comparison.
struct OracleRow {
  std::string oracle;
  int instance = 0;
  double engine = 0.0;
  double reference = 0.0;
  double error = 0.0;
  double tol = 0.0;
  bool pass = true;
};

struct OracleSuite {
  std::string name;
  std::string reference;  // what the engine is compared against
  std::vector<OracleRow> rows;

  int failures() const;
  double worst_error() const;
  nlohmann::json summary() const;
};

/// delta = S1(f) - S1(Q0 f) on C^2 with m = (2, 3) against (b^2 - a^2) log 2.
OracleSuite oracle_two_mode_delta(Rng& rng, int instances, double tol = 1e-9);
/// Oscillator entropies against 2 (f, E arcoth(M) f); tol scales with 1 + S.
OracleSuite oracle_oscillator(Rng& rng, int instances, int max_dim, double tol = 1e-8);
/// One mode: spectrum of log Delta against +-2 arcoth(m).
OracleSuite oracle_oscillator_spectrum(Rng& rng, int instances, double tol = 1e-9);
/// sigma = 0: entropy against 2 sum mu (Im f)^2.
OracleSuite oracle_abelian(Rng& rng, int instances, int max_dim, double tol = 1e-9);
/// Oscillator and abelian blocks: entropy of the sum against the sum of entropies.
OracleSuite oracle_direct_sum(Rng& rng, int instances, double tol = 1e-9);
/// P_f from the basis solve against the modular formula, factorial instances.
OracleSuite oracle_pf_dual(Rng& rng, int instances, int max_dim, double tol = 1e-8);
/// Modular identities on random spaces and subspaces; each row is a residual
/// compared with zero (or with one for the R - c(K)^2 bound).
OracleSuite invariant_suite(Rng& rng, int instances, int max_dim, double tol = 1e-8);

}  // namespace modent::cli
