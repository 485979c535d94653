#include "saddleflow/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace saddleflow {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_traj(const Trajectory& traj, Index expected_dim) {
  require(traj.size() >= 1, "diagnostics: empty trajectory");
  require(traj.states.size() == traj.size() &&
              traj.derivatives.size() == traj.size(),
          "diagnostics: ragged trajectory");
  require(traj.states.front().size() == expected_dim,
          "diagnostics: trajectory dimension does not match problem");
}

// Running trapezoid average of the sampled states.
class CesaroAccumulator {
 public:
  explicit CesaroAccumulator(double t0, Vector z0)
      : t_prev_(t0), t0_(t0), z_prev_(std::move(z0)),
        integral_(Vector::Zero(z_prev_.size())) {}

  Vector advance(double t, const Vector& z) {
    integral_ += 0.5 * (t - t_prev_) * (z + z_prev_);
    t_prev_ = t;
    z_prev_ = z;
    return integral_ / (t - t0_);
  }

 private:
  double t_prev_, t0_;
  Vector z_prev_;
  Vector integral_;
};

}  // namespace

DiagnosticsSeries diagnostics_series(const SaddleProblem& p,
                                     const Trajectory& traj,
                                     const SaddlePoint& saddle) {
  const Index n = p.primal_dim();
  const Index m = p.dual_dim();
  require_traj(traj, n + m);
  require(saddle.xi.size() == n && saddle.eta.size() == m,
          "diagnostics: saddle dimension mismatch");

  const double f_at_xi = p.objective->value(saddle.xi);
  // L(x, eta) - L(xi, lambda); the feasibility of xi is not assumed exact,
  // so keep the lambda term of the second Lagrangian.
  auto gap_at = [&](const Vector& x, const Vector& lambda) {
    const Vector rx = p.constraint.A * x - p.constraint.b;
    const Vector rxi = p.constraint.A * saddle.xi - p.constraint.b;
    return (p.objective->value(x) + saddle.eta.dot(rx)) -
           (f_at_xi + lambda.dot(rxi));
  };

  DiagnosticsSeries d;
  d.times = traj.times;
  const std::size_t count = traj.size();
  d.gap.reserve(count);
  d.vel_sq.reserve(count);
  d.err_sq_full.reserve(count);
  d.err_sq_primal.reserve(count);
  d.cesaro_gap.reserve(count);
  d.cesaro_states.reserve(count);

  CesaroAccumulator cesaro(traj.times.front(), traj.states.front());
  for (std::size_t k = 0; k < count; ++k) {
    const Vector& z = traj.states[k];
    const Vector x = z.head(n);
    const Vector lambda = z.tail(m);
    d.gap.push_back(gap_at(x, lambda));
    d.vel_sq.push_back(traj.derivatives[k].squaredNorm());
    const double ep = (x - saddle.xi).squaredNorm();
    d.err_sq_primal.push_back(ep);
    d.err_sq_full.push_back(ep + (lambda - saddle.eta).squaredNorm());
    const Vector sigma =
        (k == 0) ? z : cesaro.advance(traj.times[k], z);
    d.cesaro_states.push_back(sigma);
    d.cesaro_gap.push_back(gap_at(sigma.head(n), sigma.tail(m)));
  }
  return d;
}

DiagnosticsSeries structured_diagnostics_series(const StructuredProblem& p,
                                                const Trajectory& traj,
                                                const StructuredSaddle& saddle,
                                                bool second_order_phase) {
  const Index nx = p.nx(), ny = p.ny(), nl = p.nl();
  const Index dim = nx + ny + nl;
  require_traj(traj, second_order_phase ? 2 * dim : dim);
  require(saddle.xi.size() == nx && saddle.psi.size() == ny &&
              saddle.eta.size() == nl,
          "diagnostics: saddle dimension mismatch");

  auto gap_at = [&](const StructuredState& s) {
    StructuredState primal{s.x, s.y, saddle.eta};
    StructuredState dual{saddle.xi, saddle.psi, s.lambda};
    return structured_lagrangian(p, primal) - structured_lagrangian(p, dual);
  };

  DiagnosticsSeries d;
  d.times = traj.times;
  const std::size_t count = traj.size();

  CesaroAccumulator cesaro(traj.times.front(),
                           traj.states.front().head(dim));
  for (std::size_t k = 0; k < count; ++k) {
    const Vector pos = traj.states[k].head(dim);
    const StructuredState s = StructuredState::split(pos, nx, ny);
    // For second-order phase vectors the meaningful velocity is the state's
    // own velocity block; for first-order flows it is the field value.
    const Vector vel = second_order_phase ? traj.states[k].tail(dim)
                                          : traj.derivatives[k];
    d.gap.push_back(gap_at(s));
    d.vel_sq.push_back(vel.squaredNorm());
    const double ep = (s.x - saddle.xi).squaredNorm() +
                      (s.y - saddle.psi).squaredNorm();
    d.err_sq_primal.push_back(ep);
    d.err_sq_full.push_back(ep + (s.lambda - saddle.eta).squaredNorm());
    const Vector sigma =
        (k == 0) ? pos : cesaro.advance(traj.times[k], pos);
    d.cesaro_states.push_back(sigma);
    d.cesaro_gap.push_back(gap_at(StructuredState::split(sigma, nx, ny)));
  }
  return d;
}

double cesaro_bound_check(const DiagnosticsSeries& d, double z0_err_sq) {
  require(d.size() >= 2, "cesaro_bound_check: need at least two samples");
  const double t0 = d.times.front();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < d.size(); ++k)
    worst = std::max(worst, (d.times[k] - t0) * d.cesaro_gap[k]);
  return worst - 0.5 * z0_err_sq;
}

double lagrangian_identity_residual(const SaddleProblem& p,
                                    const PrimalDualState& z,
                                    const PrimalDualState& zdot) {
  auto [gx, gl] = lagrangian_grad(p, z);
  const double dLdt = gx.dot(zdot.x) + gl.dot(zdot.lambda);
  return dLdt + zdot.x.squaredNorm() - zdot.lambda.squaredNorm();
}

MonotonicityReport monotonicity_violations(const std::vector<double>& s,
                                           double tol) {
  require(tol >= 0.0, "monotonicity_violations: tol must be >= 0");
  MonotonicityReport rep;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double allowed = tol * (1.0 + std::abs(s[k]));
    const double jump = s[k + 1] - s[k];
    if (jump > allowed) {
      ++rep.violations;
      rep.worst_jump = std::max(rep.worst_jump, jump);
    }
  }
  return rep;
}

RateFit fit_rate(const std::vector<double>& times,
                 const std::vector<double>& values, double t_lo, double t_hi,
                 FitMode mode, int poly_order) {
  require(times.size() == values.size(), "fit_rate: ragged input");
  require(t_lo < t_hi, "fit_rate: empty window");
  require(poly_order >= 0, "fit_rate: poly_order must be >= 0");
  require(mode == FitMode::poly_corrected || poly_order == 0,
          "fit_rate: poly_order only applies to poly_corrected fits");

  // Windowed (t, v) samples.
  std::vector<double> wt, wv;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_lo || times[k] > t_hi) continue;
    wt.push_back(times[k]);
    wv.push_back(values[k]);
  }

  std::vector<double> ft, fy;
  auto push_point = [&](double t, double v) {
    if (v < 1e-300) return;                  // below the floor: unusable
    if (mode == FitMode::poly_corrected && t <= 0.0) return;
    double y = std::log(v);
    if (mode == FitMode::poly_corrected) y -= poly_order * std::log(t);
    ft.push_back(t);
    fy.push_back(y);
  };

  if (mode == FitMode::envelope) {
    for (std::size_t k = 1; k + 1 < wt.size(); ++k)
      if (wv[k] > wv[k - 1] && wv[k] > wv[k + 1]) push_point(wt[k], wv[k]);
  } else {
    for (std::size_t k = 0; k < wt.size(); ++k) push_point(wt[k], wv[k]);
  }

  if (ft.size() < 5)
    throw std::runtime_error(
        "fit_rate: fewer than 5 usable points in the window");

  const auto np = static_cast<double>(ft.size());
  double st = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < ft.size(); ++k) {
    st += ft[k];
    sy += fy[k];
  }
  const double mt = st / np, my = sy / np;
  double stt = 0.0, sty = 0.0;
  for (std::size_t k = 0; k < ft.size(); ++k) {
    stt += (ft[k] - mt) * (ft[k] - mt);
    sty += (ft[k] - mt) * (fy[k] - my);
  }
  require(stt > 0.0, "fit_rate: degenerate window (all times equal)");

  RateFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.mode = mode;
  fit.poly_order = poly_order;
  fit.points_used = ft.size();
  fit.slope = sty / stt;
  fit.intercept = my - fit.slope * mt;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < ft.size(); ++k) {
    const double pred = fit.intercept + fit.slope * ft[k];
    ss_res += (fy[k] - pred) * (fy[k] - pred);
    ss_tot += (fy[k] - my) * (fy[k] - my);
  }
  fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

TheoreticalRates theoretical_rates(double alpha, double beta, double gamma,
                                   bool scalar_hessian) {
  require(alpha > 0.0 && beta > 0.0 && gamma > 0.0,
          "theoretical_rates: constants must be positive");
  require(alpha <= gamma + 1e-12 * std::max(1.0, gamma),
          "theoretical_rates: alpha must be <= gamma");

  TheoreticalRates r;
  if (gamma * gamma <= 4.0 * beta) {
    r.rho = 0.5 * alpha;
  } else {
    r.rho = 0.5 * std::min(alpha, gamma - std::sqrt(gamma * gamma - 4.0 * beta));
  }
  r.discriminant = r.rho * r.rho - gamma * r.rho + beta;

  if (!scalar_hessian) {
    r.regime = DampingRegime::none;
    r.predicted_decay_exponent = 2.0 * r.rho;
    r.t_squared_factor =
        std::abs(r.discriminant) <= 1e-12 * std::max(1.0, beta);
    return r;
  }

  // hess f = alpha * identity: the flow decouples into damped oscillators
  // with characteristic polynomial s^2 + alpha s + beta = 0.
  const double disc = alpha * alpha - 4.0 * beta;
  const double tol = 1e-12 * std::max(1.0, 4.0 * beta);
  if (disc < -tol) {
    r.regime = DampingRegime::under_damped;
    r.predicted_decay_exponent = alpha;
  } else if (disc <= tol) {
    r.regime = DampingRegime::critically_damped;
    r.predicted_decay_exponent = alpha;
    r.t_squared_factor = true;
  } else {
    r.regime = DampingRegime::over_damped;
    r.delta = std::sqrt(disc);
    r.predicted_decay_exponent = alpha - *r.delta;
  }
  return r;
}

ExpBound exp_bound_supremum(const std::vector<double>& times,
                            const std::vector<double>& values, double rate) {
  require(times.size() == values.size() && !times.empty(),
          "exp_bound_supremum: ragged or empty input");
  ExpBound best;
  best.log_supremum = -std::numeric_limits<double>::infinity();
  best.attained_at = times.front();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (values[k] <= 0.0) continue;
    const double lg = std::log(values[k]) + rate * times[k];
    if (lg > best.log_supremum) {
      best.log_supremum = lg;
      best.attained_at = times[k];
    }
  }
  best.supremum = std::isfinite(best.log_supremum)
                      ? std::exp(best.log_supremum)
                      : 0.0;
  return best;
}

double slowest_decay_rate(const Matrix& M, double tol) {
  require(M.rows() == M.cols() && M.rows() >= 1,
          "slowest_decay_rate: M must be square");
  Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  double slow = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < M.rows(); ++i) {
    const double re = es.eigenvalues()[i].real();
    if (re < -tol) slow = std::max(slow, re);
  }
  if (!std::isfinite(slow))
    throw std::runtime_error("slowest_decay_rate: no decaying eigenvalues");
  return -2.0 * slow;
}

}  // namespace saddleflow
