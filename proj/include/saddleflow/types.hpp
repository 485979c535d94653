#pragma once

#include <Eigen/Dense>

namespace saddleflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Primal-dual pair z = (x, lambda). Flattened layout is [x; lambda], which is
// the phase-space ordering used by the integrator throughout.
struct PrimalDualState {
  Vector x;
  Vector lambda;

  Index primal_dim() const { return x.size(); }
  Index dual_dim() const { return lambda.size(); }

  bool all_finite() const { return x.allFinite() && lambda.allFinite(); }

  double squared_norm() const { return x.squaredNorm() + lambda.squaredNorm(); }

  Vector flat() const {
    Vector z(x.size() + lambda.size());
    z << x, lambda;
    return z;
  }

  static PrimalDualState split(const Vector& z, Index primal_dim);
};

}  // namespace saddleflow
