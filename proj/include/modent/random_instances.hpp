#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "modent/core_spaces.hpp"

namespace modent {

using Rng = std::mt19937_64;

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols);
Eigen::VectorXd random_vector(Rng& rng, int n);
double random_uniform(Rng& rng, double lo, double hi);

/// tau = A A^T + c 1 in a random basis; sigma = L Dn L^T with Dn a random
/// antisymmetric matrix whose singular values lie in [dmin, dmax] (<= 1).
/// Odd n leaves one kernel direction.
SymplecticHilbertSpace random_space(Rng& rng, int n, double dmin = 0.1, double dmax = 0.9);

/// As above with prescribed singular values of D (one per 2x2 block; the
/// remaining n - 2 * norms.size() directions are kernel).
SymplecticHilbertSpace random_space_with_norms(Rng& rng, int n, const Eigen::VectorXd& norms);

/// Pure space: all singular values of D equal to one (n even).
SymplecticHilbertSpace random_pure_space(Rng& rng, int n);

/// Columns: k random vectors of K.
Eigen::MatrixXd random_generators(Rng& rng, int n, int k);

struct OscillatorInstance {
  std::vector<double> m;
  std::vector<bool> in_e;
  Eigen::VectorXd f;  // 2n reals
};

OscillatorInstance random_oscillator(Rng& rng, int n, double mlo = 1.01, double mhi = 10.0);

struct AbelianInstance {
  std::vector<double> mu;
  std::vector<bool> in_y;
  Eigen::VectorXd re, im;
};

AbelianInstance random_abelian(Rng& rng, int n);

}  // namespace modent
