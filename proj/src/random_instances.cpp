#include "modent/random_instances.hpp"

#include <algorithm>

#include "modent/errors.hpp"

namespace modent {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

Eigen::VectorXd random_vector(Rng& rng, int n) { return random_matrix(rng, n, 1).col(0); }

double random_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

namespace {

Eigen::MatrixXd random_orthogonal(Rng& rng, int n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, n, n));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

SymplecticHilbertSpace assemble(Rng& rng, int n, const Eigen::VectorXd& pair_norms) {
  const Eigen::MatrixXd a = random_matrix(rng, n, n);
  const Eigen::MatrixXd tau = a * a.transpose() / n + 0.5 * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd dn = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < pair_norms.size(); ++k) {
    dn(2 * k, 2 * k + 1) = pair_norms(k);
    dn(2 * k + 1, 2 * k) = -pair_norms(k);
  }
  const Eigen::MatrixXd o = random_orthogonal(rng, n);
  dn = o * dn * o.transpose();
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(tau).matrixL();
  Eigen::MatrixXd sigma = l * dn * l.transpose();
  sigma = 0.5 * (sigma - sigma.transpose());
  return SymplecticHilbertSpace(tau, sigma);
}

}  // namespace

SymplecticHilbertSpace random_space(Rng& rng, int n, double dmin, double dmax) {
  Eigen::VectorXd norms(n / 2);
  for (int k = 0; k < n / 2; ++k) norms(k) = random_uniform(rng, dmin, dmax);
  return assemble(rng, n, norms);
}

SymplecticHilbertSpace random_space_with_norms(Rng& rng, int n, const Eigen::VectorXd& norms) {
  if (2 * norms.size() > n) throw ConfigError("random_space_with_norms: too many blocks");
  return assemble(rng, n, norms);
}

SymplecticHilbertSpace random_pure_space(Rng& rng, int n) {
  return assemble(rng, n, Eigen::VectorXd::Ones(n / 2));
}

Eigen::MatrixXd random_generators(Rng& rng, int n, int k) { return random_matrix(rng, n, k); }

OscillatorInstance random_oscillator(Rng& rng, int n, double mlo, double mhi) {
  OscillatorInstance inst;
  std::bernoulli_distribution coin(0.6);
  for (int j = 0; j < n; ++j) {
    inst.m.push_back(random_uniform(rng, mlo, mhi));
    inst.in_e.push_back(coin(rng));
  }
  inst.f = random_vector(rng, 2 * n);
  return inst;
}

AbelianInstance random_abelian(Rng& rng, int n) {
  AbelianInstance inst;
  std::bernoulli_distribution coin(0.5);
  for (int j = 0; j < n; ++j) {
    inst.mu.push_back(random_uniform(rng, 0.1, 3.0));
    inst.in_y.push_back(coin(rng));
  }
  inst.re = random_vector(rng, n);
  inst.im = random_vector(rng, n);
  return inst;
}

}  // namespace modent
