#include "saddleflow/validate.hpp"

#include <cmath>
#include <sstream>

#include "saddleflow/integrate.hpp"
#include "saddleflow/rng.hpp"

namespace saddleflow {

namespace {

std::string measured(double value, double threshold) {
  std::ostringstream os;
  os << "measured " << value << ", threshold " << threshold;
  return os.str();
}

CheckResult bounded(const std::string& name, double value, double threshold) {
  return {name, value <= threshold, measured(value, threshold)};
}

PrimalDualState random_state(Rng& rng, Index n, Index m, double box) {
  PrimalDualState z;
  z.x = Vector::NullaryExpr(n, [&](Index) { return rng.uniform_in(-box, box); });
  z.lambda =
      Vector::NullaryExpr(m, [&](Index) { return rng.uniform_in(-box, box); });
  return z;
}

}  // namespace

std::vector<CheckResult> run_validation(const ReferenceInstance& inst,
                                        std::uint64_t seed) {
  std::vector<CheckResult> out;
  const SaddleProblem& p = inst.problem;
  const SaddlePoint& sp = inst.saddle;
  const Index n = p.primal_dim();
  const Index m = p.dual_dim();
  Rng rng(seed);

  // Saddle-point certificate: KKT residuals and T(z*) = 0.
  {
    const double resid = std::max(sp.stationarity_residual,
                                  sp.feasibility_residual);
    out.push_back(bounded("kkt-certified", resid, 1e-8));
    const PrimalDualState tz = saddle_operator(p, sp.state());
    out.push_back(bounded("operator-zero-at-saddle",
                          std::sqrt(tz.squared_norm()), 1e-8));
  }

  // <T(z1) - T(z2), z1 - z2> >= 0 over random pairs.
  {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const PrimalDualState z1 = random_state(rng, n, m, 5.0);
      const PrimalDualState z2 = random_state(rng, n, m, 5.0);
      const PrimalDualState t1 = saddle_operator(p, z1);
      const PrimalDualState t2 = saddle_operator(p, z2);
      const double inner = (t1.x - t2.x).dot(z1.x - z2.x) +
                           (t1.lambda - t2.lambda).dot(z1.lambda - z2.lambda);
      worst = std::min(worst, inner);
    }
    out.push_back(bounded("operator-monotone", -worst, 1e-10));
  }

  // Strong-convexity lower bounds: <T(z)-T(z*), z-z*> >= alpha ||x-xi||^2
  // and gap(z) >= (alpha/2) ||x-xi||^2 for feasible-saddle anchors.
  if (inst.alpha > 0.0) {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const PrimalDualState z = random_state(rng, n, m, 5.0);
      const PrimalDualState tz = saddle_operator(p, z);
      const PrimalDualState ts = saddle_operator(p, sp.state());
      const double inner = (tz.x - ts.x).dot(z.x - sp.xi) +
                           (tz.lambda - ts.lambda).dot(z.lambda - sp.eta);
      const double ep = (z.x - sp.xi).squaredNorm();
      worst = std::min(worst, inner - inst.alpha * ep);
      const double gap = lagrangian(p, {z.x, sp.eta}) -
                         lagrangian(p, {sp.xi, z.lambda});
      worst = std::min(worst, gap - 0.5 * inst.alpha * ep);
    }
    out.push_back(bounded("strong-monotonicity-gap", -worst, 1e-9));
  }

  // Quadratic objectives satisfy the quadratic-likeness identity exactly.
  if (p.objective->quadratic() != nullptr) {
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Vector x = rng.gaussian_vector(n) * 3.0;
      const Vector y = rng.gaussian_vector(n) * 3.0;
      worst = std::max(worst,
                       std::abs(condition_c_residual(*p.objective, x, y)));
    }
    out.push_back(bounded("condition-c-quadratic", worst, 1e-9));
  }

  out.push_back(bounded(
      "gradient-check",
      gradient_check(*p.objective, Vector::Zero(n), 4.0, 40, seed + 1), 1e-5));

  // Projection onto the multiplier set: feasibility of the image,
  // idempotence, and non-expansiveness.
  {
    const Vector g = -p.objective->gradient(sp.xi);
    double worst = 0.0;
    for (int k = 0; k < 25; ++k) {
      const Vector l0 = rng.gaussian_vector(m) * 4.0;
      const Vector pr = multiplier_projection(p, sp.xi, l0);
      worst = std::max(worst,
                       (p.constraint.A.transpose() * pr - g).norm());
      const Vector pr2 = multiplier_projection(p, sp.xi, pr);
      worst = std::max(worst, (pr2 - pr).norm());
      const Vector l1 = rng.gaussian_vector(m) * 4.0;
      const Vector pr1 = multiplier_projection(p, sp.xi, l1);
      worst = std::max(worst,
                       (pr - pr1).norm() - (l0 - l1).norm());
    }
    out.push_back(bounded("multiplier-projection", worst, 1e-8));
  }

  // d/dt L = ||lambdadot||^2 - ||xdot||^2 along the flow field.
  {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const PrimalDualState z = random_state(rng, n, m, 5.0);
      worst = std::max(worst, std::abs(lagrangian_identity_residual(
                                  p, z, ah_field(p, z))));
    }
    out.push_back(bounded("lagrangian-identity", worst, 1e-9));
  }

  // A short flow run: nonnegative gap, monotone velocity and distance,
  // the averaged-gap bound, and agreement with the closed-form flow.
  {
    IntegratorConfig cfg;
    cfg.method = Method::adaptive_dp54;
    cfg.rtol = 1e-9;
    cfg.atol = 1e-12;
    cfg.horizon = 20.0;
    cfg.sample_interval = 0.05;
    const Vector z0 = inst.z0().flat();
    const Trajectory traj = integrate(make_ah_field(p), z0, 0.0, cfg);
    const DiagnosticsSeries ds = diagnostics_series(p, traj, sp);

    double min_gap = 0.0;
    for (double g : ds.gap) min_gap = std::min(min_gap, g);
    out.push_back(bounded("gap-nonnegative", -min_gap, 1e-9));

    const auto mv = monotonicity_violations(ds.vel_sq, 1e-9);
    const auto me = monotonicity_violations(ds.err_sq_full, 1e-9);
    out.push_back({"flow-descent", mv.violations == 0 && me.violations == 0,
                   "velocity jumps " + std::to_string(mv.violations) +
                       ", distance jumps " + std::to_string(me.violations)});

    const double z0_err = (z0 - sp.state().flat()).squaredNorm();
    out.push_back(
        bounded("cesaro-bound", cesaro_bound_check(ds, z0_err), 1e-7));

    if (p.objective->quadratic() != nullptr) {
      const Vector zT = linear_flow_oracle(p, z0, traj.times.back());
      out.push_back(bounded("oracle-agreement",
                            (traj.states.back() - zT).norm(), 1e-6));
    }
  }

  return out;
}

}  // namespace saddleflow
