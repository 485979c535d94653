#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "saddleflow/types.hpp"

namespace saddleflow {

class QuadraticObjective;

// Convex C^1 objective on R^n. Implementations must be immutable so problems
// can share them freely.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  virtual bool has_hessian() const { return false; }
  // Hessian-vector product at x; throws std::logic_error when unavailable.
  virtual Vector hessian_vec(const Vector& x, const Vector& v) const;

  // Non-null when this objective is quadratic (cheap downcast used by the
  // direct KKT path and the matrix-flow oracle).
  virtual const QuadraticObjective* quadratic() const { return nullptr; }
};

// f(x) = x'Qx/2 + q'x + c0 with Q symmetric positive semidefinite.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Matrix Q, Vector q, double c0 = 0.0);

  Index dim() const override { return q_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  bool has_hessian() const override { return true; }
  Vector hessian_vec(const Vector& x, const Vector& v) const override;
  const QuadraticObjective* quadratic() const override { return this; }

  const Matrix& Q() const { return Q_; }
  const Vector& q() const { return q_; }
  double c0() const { return c0_; }

  // Extreme eigenvalues of Q (strong-convexity / Lipschitz moduli).
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }

 private:
  Matrix Q_;
  Vector q_;
  double c0_;
  double alpha_;
  double gamma_;
};

// Callback-backed objective for non-quadratic models. Curvature bounds, when
// known to the caller, are declared rather than estimated.
class SmoothObjective final : public Objective {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;
  using HessVecFn = std::function<Vector(const Vector&, const Vector&)>;

  SmoothObjective(Index dim, ValueFn value, GradFn gradient,
                  HessVecFn hessian_vec = nullptr,
                  std::optional<double> declared_alpha = std::nullopt,
                  std::optional<double> declared_gamma = std::nullopt);

  Index dim() const override { return dim_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  bool has_hessian() const override { return static_cast<bool>(hess_); }
  Vector hessian_vec(const Vector& x, const Vector& v) const override;

  std::optional<double> declared_alpha() const { return alpha_; }
  std::optional<double> declared_gamma() const { return gamma_; }

 private:
  Index dim_;
  ValueFn value_;
  GradFn grad_;
  HessVecFn hess_;
  std::optional<double> alpha_;
  std::optional<double> gamma_;
};

// Affine equality constraint Ax = b.
struct LinearConstraint {
  Matrix A;
  Vector b;

  LinearConstraint(Matrix A_in, Vector b_in);

  Index primal_dim() const { return A.cols(); }
  Index dual_dim() const { return A.rows(); }
};

// min f(x) s.t. Ax = b, viewed through its Lagrangian saddle problem.
struct SaddleProblem {
  std::shared_ptr<const Objective> objective;
  LinearConstraint constraint;

  SaddleProblem(std::shared_ptr<const Objective> objective_in,
                LinearConstraint constraint_in);

  Index primal_dim() const { return constraint.primal_dim(); }
  Index dual_dim() const { return constraint.dual_dim(); }
};

// A certified primal-dual solution (xi, eta): stationarity is
// ||grad f(xi) + A' eta|| and feasibility is ||A xi - b||. When the
// multiplier is non-unique, eta is the minimum-norm element and
// multiplier_directions spans the direction space of the solution set
// (the kernel of A', stored as orthonormal columns).
struct SaddlePoint {
  Vector xi;
  Vector eta;
  double stationarity_residual = 0.0;
  double feasibility_residual = 0.0;
  bool multiplier_min_norm = false;
  Matrix multiplier_directions;  // m x k, k = 0 when the multiplier is unique

  bool certified(double tol = 1e-8) const {
    return stationarity_residual <= tol && feasibility_residual <= tol;
  }

  PrimalDualState state() const { return {xi, eta}; }
};

enum class KktStatus { ok, infeasible, unbounded };

struct KktResult {
  KktStatus status = KktStatus::ok;
  SaddlePoint point;    // valid only when status == ok
  std::string message;  // human-readable reason when status != ok
};

// Bounds of the constraint operator: beta_primal = lambda_min(A'A)
// (A bounded below), beta_dual = lambda_min(AA') (A' bounded below, i.e. A
// surjective), a_norm_sq = lambda_max(A'A) = ||A||^2.
struct OperatorConstants {
  double beta_primal = 0.0;
  double beta_dual = 0.0;
  double a_norm_sq = 0.0;
};

// L(x, lambda) = f(x) + <lambda, Ax - b>.
double lagrangian(const SaddleProblem& p, const PrimalDualState& z);

// (grad_x L, grad_lambda L) = (grad f(x) + A'lambda, Ax - b).
std::pair<Vector, Vector> lagrangian_grad(const SaddleProblem& p,
                                          const PrimalDualState& z);

// Monotone operator T(z) = (grad f(x) + A'lambda, b - Ax); zeros of T are
// exactly the saddle points of L.
PrimalDualState saddle_operator(const SaddleProblem& p,
                                const PrimalDualState& z);

// Solves the KKT system grad f(xi) + A'eta = 0, A xi = b for a quadratic
// objective. Direct bordered solve with partial pivoting; falls back to a
// least-squares path when the bordered matrix is singular (rank-deficient A
// or semidefinite Q), distinguishing infeasibility (b not in range(A)) from
// an objective unbounded on the feasible set. Requires a QuadraticObjective.
KktResult kkt_solve(const SaddleProblem& p);

// Orthogonal projection of lambda0 onto the multiplier set
// M(xi) = { lambda : A'lambda = -grad f(xi) }; throws std::runtime_error if
// M(xi) is empty (xi not a constrained minimizer).
Vector multiplier_projection(const SaddleProblem& p, const Vector& xi,
                             const Vector& lambda0);

OperatorConstants operator_constants(const LinearConstraint& c);

// (alpha, gamma) = extreme eigenvalues of Q.
std::pair<double, double> convexity_constants(const QuadraticObjective& f);

// D_f(y, x) = f(y) - f(x) - <grad f(x), y - x>.
double bregman_distance(const Objective& f, const Vector& y, const Vector& x);

// Residual of the quadratic-likeness condition
// 2 D_f(y, x) - <hess f(x)(x - y), x - y>; identically zero iff f is
// quadratic along the segment. Requires a Hessian.
double condition_c_residual(const Objective& f, const Vector& x,
                            const Vector& y);

// Randomized central-difference check of the gradient over the box
// center +- half_width. Returns the worst relative error over `trials`
// random (point, direction) pairs.
double gradient_check(const Objective& f, const Vector& center,
                      double half_width, int trials, std::uint64_t seed);

}  // namespace saddleflow
