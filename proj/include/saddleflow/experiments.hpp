#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saddleflow/diagnostics.hpp"
#include "saddleflow/flows.hpp"
#include "saddleflow/model.hpp"

namespace saddleflow {

// A built-in problem with reference initial data, a certified saddle point
// and the constants entering the rate predictions.
struct ReferenceInstance {
  std::string name;
  SaddleProblem problem;
  Vector x0;
  Vector lambda0;
  SaddlePoint saddle;
  double alpha = 0.0;
  double gamma = 0.0;
  OperatorConstants ops;
  bool scalar_hessian = false;

  PrimalDualState z0() const { return {x0, lambda0}; }
};

// min (x1^2 - x1 x2 + x2^2)/2  s.t.  x = (1, 1), started from
// x0 = (-1, 1), lambda0 = (1, 1). Saddle point ((1,1), (-1/2,-1/2)),
// alpha = 1/2, gamma = 3/2, constraint moduli all 1.
ReferenceInstance example1();

// min alpha (x1^2 + x2^2)/2  s.t.  (x1 + x2)/sqrt(2) = 1, started from
// x0 = (-1, 1), lambda0 = 1. Scalar Hessian, A surjective with modulus 1:
// the damping regime is decided by alpha^2 vs 4.
ReferenceInstance example2(double alpha);

// min x^2/2 s.t. x = 1 stated twice (duplicated row), so the multiplier is
// non-unique: M = {lambda : lambda_1 + lambda_2 = -1}. Started from x0 = 2,
// lambda0 = (5.5, -0.5); the flow conserves lambda_1 - lambda_2 and
// converges to the orthogonal projection of lambda0 onto M.
ReferenceInstance multiplier_line_problem();

// Reproducible random strongly convex QP: spectrum of Q spans exactly
// [alpha, gamma] (n >= 2), Gaussian q, full-row-rank Gaussian A (1 <= m <= n)
// and b = A * (Gaussian point), so the problem is always feasible.
struct RandomQp {
  SaddleProblem problem;
  SaddlePoint saddle;
};
RandomQp random_qp(std::uint64_t seed, Index n, Index m, double alpha,
                   double gamma);

// Embeds a single-block problem as a two-block one via a slack block:
// g(y) = ||y||^2/2 with B = 0, so the y-block decouples and the lifted
// saddle is (xi, 0, eta). Used to cross-check the two-block flow against
// the plain one.
StructuredProblem structured_lift(const SaddleProblem& p);
StructuredSaddle lifted_saddle(const StructuredProblem& lifted,
                               const SaddlePoint& saddle);

// Reference configuration of the accelerated flow (nu = 3, theta = 1/2,
// mu = 1/2, t0 = 1) with initial positions (x0, 0, lambda0) at rest.
struct AahSetup {
  AahParams params;
  Vector phase0;  // [positions; velocities]
};
AahSetup reference_aah_setup(const StructuredProblem& lifted, const Vector& x0,
                             const Vector& lambda0);

// Deterministic end-to-end reproduction of the two study figures.
// fig1: first-order flow on example1 (T = 50) plus the accelerated flow on
// its lifted form (t in [1, 100]); fig2: example2 for alpha in {1, 2, 3}
// (T = 40). Each run is written as CSV next to a JSON summary comparing
// fitted and predicted decay rates. Returns the paths written.
enum class Figure { fig1, fig2 };
struct ReplicateResult {
  std::vector<std::string> files;
};
ReplicateResult replicate(Figure figure, const std::string& out_dir);

}  // namespace saddleflow
