#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "modent/families.hpp"
#include "modent/random_instances.hpp"

namespace modent::th {

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline Eigen::MatrixXd mask_columns(int n, const std::vector<bool>& mask) {
  Eigen::MatrixXd g(n, 0);
  for (int j = 0; j < n; ++j)
    if (mask[j]) {
      g.conservativeResize(n, g.cols() + 1);
      g.col(g.cols() - 1) = Eigen::VectorXd::Unit(n, j);
    }
  return g;
}

// C^2 with m = (2, 3) and L0 = span_R{(1, 1), (i, 0)}.
inline Eigen::MatrixXd two_mode_l0() {
  Eigen::MatrixXd l0(4, 2);
  l0 << 1, 0, 0, 1, 1, 0, 0, 0;
  return l0;
}

}  // namespace modent::th
