#include "saddleflow/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "saddleflow/rng.hpp"

namespace saddleflow {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

PrimalDualState PrimalDualState::split(const Vector& z, Index primal_dim) {
  require(primal_dim >= 0 && primal_dim <= z.size(),
          "split: primal dimension out of range");
  return {z.head(primal_dim), z.tail(z.size() - primal_dim)};
}

Vector Objective::hessian_vec(const Vector&, const Vector&) const {
  throw std::logic_error("objective does not provide a Hessian");
}

QuadraticObjective::QuadraticObjective(Matrix Q, Vector q, double c0)
    : Q_(std::move(Q)), q_(std::move(q)), c0_(c0) {
  require(Q_.rows() == Q_.cols(), "QuadraticObjective: Q must be square");
  require(Q_.rows() == q_.size(), "QuadraticObjective: Q/q dimension mismatch");
  require(Q_.rows() >= 1, "QuadraticObjective: empty problem");
  require(Q_.allFinite() && q_.allFinite() && std::isfinite(c0_),
          "QuadraticObjective: non-finite data");
  require(Q_ == Q_.transpose(), "QuadraticObjective: Q must be symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> es(Q_, Eigen::EigenvaluesOnly);
  alpha_ = es.eigenvalues().minCoeff();
  gamma_ = es.eigenvalues().maxCoeff();
  require(alpha_ >= -1e-10 * std::max(1.0, std::abs(gamma_)),
          "QuadraticObjective: Q must be positive semidefinite");
  alpha_ = std::max(alpha_, 0.0);
}

double QuadraticObjective::value(const Vector& x) const {
  require(x.size() == dim(), "QuadraticObjective::value: dimension mismatch");
  return 0.5 * x.dot(Q_ * x) + q_.dot(x) + c0_;
}

Vector QuadraticObjective::gradient(const Vector& x) const {
  require(x.size() == dim(),
          "QuadraticObjective::gradient: dimension mismatch");
  return Q_ * x + q_;
}

Vector QuadraticObjective::hessian_vec(const Vector& x, const Vector& v) const {
  require(x.size() == dim() && v.size() == dim(),
          "QuadraticObjective::hessian_vec: dimension mismatch");
  return Q_ * v;
}

SmoothObjective::SmoothObjective(Index dim, ValueFn value, GradFn gradient,
                                 HessVecFn hessian_vec,
                                 std::optional<double> declared_alpha,
                                 std::optional<double> declared_gamma)
    : dim_(dim),
      value_(std::move(value)),
      grad_(std::move(gradient)),
      hess_(std::move(hessian_vec)),
      alpha_(declared_alpha),
      gamma_(declared_gamma) {
  require(dim_ >= 1, "SmoothObjective: dimension must be positive");
  require(static_cast<bool>(value_) && static_cast<bool>(grad_),
          "SmoothObjective: value and gradient callbacks are required");
  if (alpha_ && gamma_)
    require(*alpha_ <= *gamma_, "SmoothObjective: alpha must be <= gamma");
}

double SmoothObjective::value(const Vector& x) const {
  require(x.size() == dim_, "SmoothObjective::value: dimension mismatch");
  return value_(x);
}

Vector SmoothObjective::gradient(const Vector& x) const {
  require(x.size() == dim_, "SmoothObjective::gradient: dimension mismatch");
  Vector g = grad_(x);
  require(g.size() == dim_, "SmoothObjective: gradient callback wrong size");
  return g;
}

Vector SmoothObjective::hessian_vec(const Vector& x, const Vector& v) const {
  if (!hess_) return Objective::hessian_vec(x, v);
  require(x.size() == dim_ && v.size() == dim_,
          "SmoothObjective::hessian_vec: dimension mismatch");
  return hess_(x, v);
}

LinearConstraint::LinearConstraint(Matrix A_in, Vector b_in)
    : A(std::move(A_in)), b(std::move(b_in)) {
  require(A.rows() >= 1 && A.cols() >= 1, "LinearConstraint: A must be m x n");
  require(A.rows() == b.size(), "LinearConstraint: A/b dimension mismatch");
  require(A.allFinite() && b.allFinite(), "LinearConstraint: non-finite data");
}

SaddleProblem::SaddleProblem(std::shared_ptr<const Objective> objective_in,
                             LinearConstraint constraint_in)
    : objective(std::move(objective_in)), constraint(std::move(constraint_in)) {
  require(static_cast<bool>(objective), "SaddleProblem: null objective");
  require(objective->dim() == constraint.primal_dim(),
          "SaddleProblem: objective/constraint dimension mismatch");
}

namespace {

void require_state(const SaddleProblem& p, const PrimalDualState& z) {
  require(z.x.size() == p.primal_dim() && z.lambda.size() == p.dual_dim(),
          "state dimension does not match problem");
}

}  // namespace

double lagrangian(const SaddleProblem& p, const PrimalDualState& z) {
  require_state(p, z);
  return p.objective->value(z.x) +
         z.lambda.dot(p.constraint.A * z.x - p.constraint.b);
}

std::pair<Vector, Vector> lagrangian_grad(const SaddleProblem& p,
                                          const PrimalDualState& z) {
  require_state(p, z);
  Vector gx = p.objective->gradient(z.x) + p.constraint.A.transpose() * z.lambda;
  Vector gl = p.constraint.A * z.x - p.constraint.b;
  return {std::move(gx), std::move(gl)};
}

PrimalDualState saddle_operator(const SaddleProblem& p,
                                const PrimalDualState& z) {
  auto [gx, gl] = lagrangian_grad(p, z);
  return {std::move(gx), -gl};
}

KktResult kkt_solve(const SaddleProblem& p) {
  const QuadraticObjective* f = p.objective->quadratic();
  require(f != nullptr, "kkt_solve: requires a quadratic objective");

  const Matrix& A = p.constraint.A;
  const Vector& b = p.constraint.b;
  const Index n = p.primal_dim();
  const Index m = p.dual_dim();

  Matrix K(n + m, n + m);
  K.topLeftCorner(n, n) = f->Q();
  K.topRightCorner(n, m) = A.transpose();
  K.bottomLeftCorner(m, n) = A;
  K.bottomRightCorner(m, m).setZero();
  Vector rhs(n + m);
  rhs << -f->q(), b;

  KktResult result;
  auto finish = [&](Vector xi, Vector eta, bool min_norm,
                    Matrix directions) {
    SaddlePoint sp;
    sp.xi = std::move(xi);
    sp.eta = std::move(eta);
    sp.stationarity_residual =
        (f->gradient(sp.xi) + A.transpose() * sp.eta).norm();
    sp.feasibility_residual = (A * sp.xi - b).norm();
    sp.multiplier_min_norm = min_norm;
    sp.multiplier_directions = std::move(directions);
    result.status = KktStatus::ok;
    result.point = std::move(sp);
    return result;
  };

  // Direct bordered solve; valid whenever K is nonsingular, which requires
  // A of full row rank and Q definite on ker(A). A singular-but-consistent
  // system (e.g. duplicated constraint rows) would still produce a small
  // residual here, so rank-check first instead of trusting the residual.
  if (Eigen::FullPivLU<Matrix>(K).isInvertible()) {
    Eigen::PartialPivLU<Matrix> lu(K);
    Vector z = lu.solve(rhs);
    if (z.allFinite() &&
        (K * z - rhs).norm() <= 1e-9 * (1.0 + rhs.norm())) {
      return finish(z.head(n), z.tail(m), false, Matrix(m, 0));
    }
  }

  // Degenerate bordered matrix: decide feasibility first, then minimize over
  // the feasible affine set xi_f + ker(A).
  Eigen::CompleteOrthogonalDecomposition<Matrix> codA(A);
  Vector xf = codA.solve(b);
  if ((A * xf - b).norm() > 1e-8 * (1.0 + b.norm())) {
    result.status = KktStatus::infeasible;
    result.message = "constraint right-hand side is not in range(A)";
    return result;
  }

  Vector xi = xf;
  Eigen::FullPivLU<Matrix> luA(A);
  if (luA.dimensionOfKernel() > 0) {
    Matrix Z = luA.kernel();  // n x k, k >= 1
    Matrix H = Z.transpose() * f->Q() * Z;
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const double hmax = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() <= 1e-10 * std::max(1.0, hmax)) {
      result.status = KktStatus::unbounded;
      result.message =
          "objective is not definite on the feasible directions; no unique "
          "minimizer (unbounded below or a flat valley)";
      return result;
    }
    Vector w = es.eigenvectors() *
               (es.eigenvalues().cwiseInverse().asDiagonal() *
                (es.eigenvectors().transpose() *
                 (-Z.transpose() * (f->Q() * xf + f->q()))));
    xi += Z * w;
  }

  // Minimum-norm multiplier via the pseudoinverse of A'.
  Vector g = -f->gradient(xi);
  Eigen::CompleteOrthogonalDecomposition<Matrix> codAt(A.transpose());
  Vector eta = codAt.solve(g);

  Matrix directions(m, 0);
  bool min_norm = false;
  if (codA.rank() < m) {
    min_norm = true;
    // Orthonormal basis of ker(A') = range(A)-perp from a full SVD of A.
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU);
    Index r = 0;
    const double tol = 1e-12 * std::max<double>(1.0, svd.singularValues()[0]);
    for (Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > tol) ++r;
    directions = svd.matrixU().rightCols(m - r);
  }
  return finish(std::move(xi), std::move(eta), min_norm, std::move(directions));
}

Vector multiplier_projection(const SaddleProblem& p, const Vector& xi,
                             const Vector& lambda0) {
  require(xi.size() == p.primal_dim(),
          "multiplier_projection: xi dimension mismatch");
  require(lambda0.size() == p.dual_dim(),
          "multiplier_projection: lambda0 dimension mismatch");
  const Matrix At = p.constraint.A.transpose();
  const Vector g = -p.objective->gradient(xi);

  Eigen::CompleteOrthogonalDecomposition<Matrix> codAt(At);
  Vector probe = codAt.solve(g);
  if ((At * probe - g).norm() > 1e-8 * (1.0 + g.norm()))
    throw std::runtime_error(
        "multiplier_projection: multiplier set is empty at this primal point");

  // P(lambda0) = lambda0 - pinv(A') (A' lambda0 - g): the correction lies in
  // range(A), so the displacement is orthogonal to the direction space
  // ker(A') of the multiplier set.
  Vector correction = codAt.solve(At * lambda0 - g);
  return lambda0 - correction;
}

OperatorConstants operator_constants(const LinearConstraint& c) {
  OperatorConstants out;
  const Matrix gram_primal = c.A.transpose() * c.A;
  const Matrix gram_dual = c.A * c.A.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> ep(gram_primal, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> ed(gram_dual, Eigen::EigenvaluesOnly);
  out.beta_primal = std::max(0.0, ep.eigenvalues().minCoeff());
  out.beta_dual = std::max(0.0, ed.eigenvalues().minCoeff());
  out.a_norm_sq = std::max(0.0, ep.eigenvalues().maxCoeff());
  return out;
}

std::pair<double, double> convexity_constants(const QuadraticObjective& f) {
  return {f.alpha(), f.gamma()};
}

double bregman_distance(const Objective& f, const Vector& y, const Vector& x) {
  require(y.size() == f.dim() && x.size() == f.dim(),
          "bregman_distance: dimension mismatch");
  return f.value(y) - f.value(x) - f.gradient(x).dot(y - x);
}

double condition_c_residual(const Objective& f, const Vector& x,
                            const Vector& y) {
  const Vector d = x - y;
  return 2.0 * bregman_distance(f, y, x) - f.hessian_vec(x, d).dot(d);
}

double gradient_check(const Objective& f, const Vector& center,
                      double half_width, int trials, std::uint64_t seed) {
  require(center.size() == f.dim(), "gradient_check: dimension mismatch");
  require(half_width > 0.0 && trials > 0, "gradient_check: bad parameters");
  Rng rng(seed);
  const Index n = f.dim();
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    Vector x(n);
    for (Index i = 0; i < n; ++i)
      x[i] = center[i] + half_width * (2.0 * rng.uniform() - 1.0);
    Vector d = rng.gaussian_vector(n);
    if (d.norm() < 1e-12) d.setOnes();
    d.normalize();
    const double h = 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff());
    const double fd = (f.value(x + h * d) - f.value(x - h * d)) / (2.0 * h);
    const double an = f.gradient(x).dot(d);
    worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
  }
  return worst;
}

}  // namespace saddleflow
