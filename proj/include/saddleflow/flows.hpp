#pragma once

#include <functional>
#include <memory>

#include "saddleflow/model.hpp"
#include "saddleflow/types.hpp"

namespace saddleflow {

// Right-hand side of an ODE zdot = F(t, z) on flattened phase vectors.
using Field = std::function<Vector(double, const Vector&)>;

// Two-block problem min f(x) + g(y) s.t. Ax + By = c.
struct StructuredProblem {
  std::shared_ptr<const Objective> f;
  std::shared_ptr<const Objective> g;
  Matrix A;  // m x n
  Matrix B;  // m x p
  Vector c;  // m

  StructuredProblem(std::shared_ptr<const Objective> f_in,
                    std::shared_ptr<const Objective> g_in, Matrix A_in,
                    Matrix B_in, Vector c_in);

  Index nx() const { return A.cols(); }
  Index ny() const { return B.cols(); }
  Index nl() const { return c.size(); }
};

struct StructuredState {
  Vector x;
  Vector y;
  Vector lambda;

  bool all_finite() const {
    return x.allFinite() && y.allFinite() && lambda.allFinite();
  }
  Vector flat() const;
  static StructuredState split(const Vector& s, Index nx, Index ny);
};

struct StructuredSaddle {
  Vector xi;
  Vector psi;
  Vector eta;
  double stationarity_x = 0.0;
  double stationarity_y = 0.0;
  double feasibility = 0.0;

  bool certified(double tol = 1e-8) const {
    return stationarity_x <= tol && stationarity_y <= tol &&
           feasibility <= tol;
  }
};

// Fills in the residuals for a candidate structured saddle point.
StructuredSaddle certify_structured(const StructuredProblem& p,
                                    Vector xi, Vector psi, Vector eta);

// Parameters of the second-order accelerated flow: vanishing damping nu/t,
// extrapolation theta*t, augmentation mu, start time t0.
struct AahParams {
  double nu = 3.0;
  double theta = 0.5;
  double mu = 0.0;
  double t0 = 1.0;

  void validate() const;
};

// First-order saddle flow zdot = -T(z):
// xdot = -(grad f(x) + A'lambda), lambdadot = -(b - Ax).
PrimalDualState ah_field(const SaddleProblem& p, const PrimalDualState& z);

// Two-block variant on (x, y, lambda).
StructuredState gah_field(const StructuredProblem& p,
                          const StructuredState& s);

// L(x,y,lambda) = f(x) + g(y) + <lambda, Ax + By - c>.
double structured_lagrangian(const StructuredProblem& p,
                             const StructuredState& s);

// Augmented Lagrangian L_mu = L + (mu/2)||Ax + By - c||^2 and its gradients.
double augmented_lagrangian(const StructuredProblem& p, double mu,
                            const StructuredState& s);

struct AugLagGrads {
  Vector gx;       // grad f(x) + A'(lambda + mu r)
  Vector gy;       // grad g(y) + B'(lambda + mu r)
  Vector glambda;  // r = Ax + By - c
};
AugLagGrads augmented_lagrangian_grads(const StructuredProblem& p, double mu,
                                       const StructuredState& s);

// Second-order non-autonomous accelerated flow on the phase vector
// [x; y; lambda; xdot; ydot; lambdadot]:
//   xddot      = -(nu/t) xdot      - grad_x L_mu(x, y, lambda + theta t lambdadot)
//   yddot      = -(nu/t) ydot      - grad_y L_mu(x, y, lambda + theta t lambdadot)
//   lambdaddot = -(nu/t) lambdadot + grad_l L_mu(x + theta t xdot,
//                                                y + theta t ydot, lambda)
Vector aah_field(const StructuredProblem& p, const AahParams& params, double t,
                 const Vector& phase);

// Flat-field adaptors for the integrator. Each closure keeps its own copy of
// the problem data.
Field make_ah_field(const SaddleProblem& p);
Field make_gah_field(const StructuredProblem& p);
Field make_aah_field(const StructuredProblem& p, const AahParams& params);

// (xddot, lambdaddot) obtained by differentiating the first-order flow along
// itself: xddot = -hess f(x) xdot - A'lambdadot, lambdaddot = A xdot.
// Requires a Hessian.
PrimalDualState ah_second_derivative(const SaddleProblem& p,
                                     const PrimalDualState& z,
                                     const PrimalDualState& zdot);

// Residual norms of the damped-oscillator equations satisfied along the
// first-order flow when hess f = alpha * identity:
//   xddot + alpha xdot + A'A (x - xbar) = 0
//   lambdaddot + alpha lambdadot + AA' (lambda - lambdabar) = 0
// Throws std::invalid_argument unless the objective is quadratic with
// Q = alpha * identity.
double oscillator_residual_primal(const SaddleProblem& p, const Vector& x,
                                  const Vector& xdot, const Vector& xddot,
                                  const Vector& xbar);
double oscillator_residual_dual(const SaddleProblem& p, const Vector& lambda,
                                const Vector& lambdadot,
                                const Vector& lambdaddot,
                                const Vector& lambdabar);

}  // namespace saddleflow
