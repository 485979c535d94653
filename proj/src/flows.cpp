#include "saddleflow/flows.hpp"

#include <cmath>
#include <stdexcept>

namespace saddleflow {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_state(const StructuredProblem& p, const StructuredState& s) {
  require(s.x.size() == p.nx() && s.y.size() == p.ny() &&
              s.lambda.size() == p.nl(),
          "structured state dimension does not match problem");
}

// Extracts alpha from a quadratic objective with Q = alpha * identity.
double scalar_hessian_modulus(const SaddleProblem& p) {
  const QuadraticObjective* f = p.objective->quadratic();
  require(f != nullptr,
          "oscillator residual: requires a quadratic objective");
  const double alpha = f->Q()(0, 0);
  const Matrix scaled_id = alpha * Matrix::Identity(f->dim(), f->dim());
  require((f->Q() - scaled_id).cwiseAbs().maxCoeff() <=
              1e-12 * std::max(1.0, std::abs(alpha)),
          "oscillator residual: requires hess f = alpha * identity");
  return alpha;
}

}  // namespace

StructuredProblem::StructuredProblem(std::shared_ptr<const Objective> f_in,
                                     std::shared_ptr<const Objective> g_in,
                                     Matrix A_in, Matrix B_in, Vector c_in)
    : f(std::move(f_in)),
      g(std::move(g_in)),
      A(std::move(A_in)),
      B(std::move(B_in)),
      c(std::move(c_in)) {
  require(static_cast<bool>(f) && static_cast<bool>(g),
          "StructuredProblem: null objective");
  require(A.rows() >= 1 && A.cols() >= 1 && B.cols() >= 1,
          "StructuredProblem: empty blocks");
  require(A.rows() == B.rows() && A.rows() == c.size(),
          "StructuredProblem: row dimension mismatch");
  require(f->dim() == A.cols() && g->dim() == B.cols(),
          "StructuredProblem: objective/block dimension mismatch");
  require(A.allFinite() && B.allFinite() && c.allFinite(),
          "StructuredProblem: non-finite data");
}

Vector StructuredState::flat() const {
  Vector s(x.size() + y.size() + lambda.size());
  s << x, y, lambda;
  return s;
}

StructuredState StructuredState::split(const Vector& s, Index nx, Index ny) {
  require(nx >= 1 && ny >= 1 && s.size() > nx + ny,
          "StructuredState::split: bad dimensions");
  return {s.head(nx), s.segment(nx, ny), s.tail(s.size() - nx - ny)};
}

StructuredSaddle certify_structured(const StructuredProblem& p, Vector xi,
                                    Vector psi, Vector eta) {
  StructuredSaddle sp;
  sp.xi = std::move(xi);
  sp.psi = std::move(psi);
  sp.eta = std::move(eta);
  sp.stationarity_x =
      (p.f->gradient(sp.xi) + p.A.transpose() * sp.eta).norm();
  sp.stationarity_y =
      (p.g->gradient(sp.psi) + p.B.transpose() * sp.eta).norm();
  sp.feasibility = (p.A * sp.xi + p.B * sp.psi - p.c).norm();
  return sp;
}

void AahParams::validate() const {
  require(nu >= 3.0, "AahParams: nu must be >= 3");
  require(theta >= 1.0 / (nu - 1.0) - 1e-15 && theta <= 0.5 + 1e-15,
          "AahParams: theta must lie in [1/(nu-1), 1/2]");
  require(mu >= 0.0, "AahParams: mu must be >= 0");
  require(t0 > 0.0, "AahParams: t0 must be positive");
}

PrimalDualState ah_field(const SaddleProblem& p, const PrimalDualState& z) {
  PrimalDualState t = saddle_operator(p, z);
  t.x = -t.x;
  t.lambda = -t.lambda;
  return t;
}

StructuredState gah_field(const StructuredProblem& p,
                          const StructuredState& s) {
  require_state(p, s);
  StructuredState d;
  d.x = -(p.f->gradient(s.x) + p.A.transpose() * s.lambda);
  d.y = -(p.g->gradient(s.y) + p.B.transpose() * s.lambda);
  d.lambda = p.A * s.x + p.B * s.y - p.c;
  return d;
}

double structured_lagrangian(const StructuredProblem& p,
                             const StructuredState& s) {
  require_state(p, s);
  return p.f->value(s.x) + p.g->value(s.y) +
         s.lambda.dot(p.A * s.x + p.B * s.y - p.c);
}

double augmented_lagrangian(const StructuredProblem& p, double mu,
                            const StructuredState& s) {
  require(mu >= 0.0, "augmented_lagrangian: mu must be >= 0");
  const Vector r = p.A * s.x + p.B * s.y - p.c;
  return structured_lagrangian(p, s) + 0.5 * mu * r.squaredNorm();
}

AugLagGrads augmented_lagrangian_grads(const StructuredProblem& p, double mu,
                                       const StructuredState& s) {
  require(mu >= 0.0, "augmented_lagrangian_grads: mu must be >= 0");
  require_state(p, s);
  AugLagGrads g;
  g.glambda = p.A * s.x + p.B * s.y - p.c;
  const Vector shifted = s.lambda + mu * g.glambda;
  g.gx = p.f->gradient(s.x) + p.A.transpose() * shifted;
  g.gy = p.g->gradient(s.y) + p.B.transpose() * shifted;
  return g;
}

Vector aah_field(const StructuredProblem& p, const AahParams& params, double t,
                 const Vector& phase) {
  params.validate();
  const Index nx = p.nx(), ny = p.ny(), nl = p.nl();
  const Index d = nx + ny + nl;
  require(phase.size() == 2 * d, "aah_field: phase dimension mismatch");
  require(t >= params.t0 * (1.0 - 1e-12),
          "aah_field: t must be >= t0");

  StructuredState pos = StructuredState::split(phase.head(d), nx, ny);
  StructuredState vel = StructuredState::split(phase.tail(d), nx, ny);
  const double damping = params.nu / t;
  const double reach = params.theta * t;

  // Primal accelerations see the extrapolated dual variable.
  StructuredState dual_shifted = pos;
  dual_shifted.lambda = pos.lambda + reach * vel.lambda;
  AugLagGrads gd = augmented_lagrangian_grads(p, params.mu, dual_shifted);

  // The dual acceleration sees the extrapolated primal variables.
  StructuredState primal_shifted = pos;
  primal_shifted.x = pos.x + reach * vel.x;
  primal_shifted.y = pos.y + reach * vel.y;
  AugLagGrads gp = augmented_lagrangian_grads(p, params.mu, primal_shifted);

  Vector out(2 * d);
  out.head(d) = phase.tail(d);
  out.segment(d, nx) = -damping * vel.x - gd.gx;
  out.segment(d + nx, ny) = -damping * vel.y - gd.gy;
  out.tail(nl) = -damping * vel.lambda + gp.glambda;
  return out;
}

Field make_ah_field(const SaddleProblem& p) {
  const Index n = p.primal_dim();
  return [p, n](double, const Vector& z) {
    return ah_field(p, PrimalDualState::split(z, n)).flat();
  };
}

Field make_gah_field(const StructuredProblem& p) {
  const Index nx = p.nx(), ny = p.ny();
  return [p, nx, ny](double, const Vector& s) {
    return gah_field(p, StructuredState::split(s, nx, ny)).flat();
  };
}

Field make_aah_field(const StructuredProblem& p, const AahParams& params) {
  params.validate();
  return [p, params](double t, const Vector& phase) {
    return aah_field(p, params, t, phase);
  };
}

PrimalDualState ah_second_derivative(const SaddleProblem& p,
                                     const PrimalDualState& z,
                                     const PrimalDualState& zdot) {
  require(z.x.size() == p.primal_dim() && z.lambda.size() == p.dual_dim() &&
              zdot.x.size() == z.x.size() &&
              zdot.lambda.size() == z.lambda.size(),
          "ah_second_derivative: dimension mismatch");
  PrimalDualState dd;
  dd.x = -p.objective->hessian_vec(z.x, zdot.x) -
         p.constraint.A.transpose() * zdot.lambda;
  dd.lambda = p.constraint.A * zdot.x;
  return dd;
}

double oscillator_residual_primal(const SaddleProblem& p, const Vector& x,
                                  const Vector& xdot, const Vector& xddot,
                                  const Vector& xbar) {
  const double alpha = scalar_hessian_modulus(p);
  const Matrix& A = p.constraint.A;
  return (xddot + alpha * xdot + A.transpose() * (A * (x - xbar))).norm();
}

double oscillator_residual_dual(const SaddleProblem& p, const Vector& lambda,
                                const Vector& lambdadot,
                                const Vector& lambdaddot,
                                const Vector& lambdabar) {
  const double alpha = scalar_hessian_modulus(p);
  const Matrix& A = p.constraint.A;
  return (lambdaddot + alpha * lambdadot +
          A * (A.transpose() * (lambda - lambdabar)))
      .norm();
}

}  // namespace saddleflow
