#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "saddleflow/flows.hpp"
#include "saddleflow/integrate.hpp"
#include "saddleflow/model.hpp"

namespace saddleflow {

// Per-sample convergence measures of a trajectory against a certified saddle
// point (xi, eta):
//   gap           L(x(t), eta) - L(xi, lambda(t))        (primal-dual gap)
//   vel_sq        squared norm of the phase velocity
//   err_sq_full   ||x - xi||^2 + ||lambda - eta||^2
//   err_sq_primal squared distance of the primal block only
//   cesaro_gap    gap evaluated at the running time average
//                 sigma(t) = 1/(t - t0) * integral of z (trapezoid rule);
//                 sigma(t0) = z(t0).
struct DiagnosticsSeries {
  std::vector<double> times;
  std::vector<double> gap;
  std::vector<double> vel_sq;
  std::vector<double> err_sq_full;
  std::vector<double> err_sq_primal;
  std::vector<double> cesaro_gap;
  std::vector<Vector> cesaro_states;

  std::size_t size() const { return times.size(); }
};

DiagnosticsSeries diagnostics_series(const SaddleProblem& p,
                                     const Trajectory& traj,
                                     const SaddlePoint& saddle);

// Same measures for two-block trajectories. With second_order_phase the
// states are [positions; velocities]: positions feed the gap/error columns
// and the state's velocity block (not the stored derivative) feeds vel_sq.
DiagnosticsSeries structured_diagnostics_series(const StructuredProblem& p,
                                                const Trajectory& traj,
                                                const StructuredSaddle& saddle,
                                                bool second_order_phase);

// Largest value over samples t > t0 of (t - t0) * cesaro_gap(t) minus
// z0_err_sq / 2. The ergodic estimate says this is <= 0 up to quadrature
// error; positive return values are violations.
double cesaro_bound_check(const DiagnosticsSeries& d, double z0_err_sq);

// Residual of d/dt L(z(t)) = ||lambdadot||^2 - ||xdot||^2 along the
// first-order flow: <grad_x L, xdot> + <grad_l L, lambdadot>
// + ||xdot||^2 - ||lambdadot||^2, evaluated for a given (z, zdot) pair.
double lagrangian_identity_residual(const SaddleProblem& p,
                                    const PrimalDualState& z,
                                    const PrimalDualState& zdot);

struct MonotonicityReport {
  std::size_t violations = 0;
  double worst_jump = 0.0;  // largest s[k+1] - s[k] beyond the tolerance
};

// Counts k with s[k+1] > s[k] + tol * (1 + |s[k]|).
MonotonicityReport monotonicity_violations(const std::vector<double>& s,
                                           double tol);

enum class FitMode { raw, envelope, poly_corrected };

struct RateFit {
  double t_lo = 0.0, t_hi = 0.0;
  double slope = 0.0;      // d(log v)/dt; negative for decaying series
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points_used = 0;
  FitMode mode = FitMode::raw;
  int poly_order = 0;
};

// Least-squares line through (t, log v(t)) for samples in [t_lo, t_hi].
// envelope: fit only local maxima of v inside the window (for oscillatory
// decay). poly_corrected: fit log v - poly_order * log t (removes a known
// polynomial factor). Values below 1e-300 are dropped; throws
// std::runtime_error if fewer than 5 usable points remain.
RateFit fit_rate(const std::vector<double>& times,
                 const std::vector<double>& values, double t_lo, double t_hi,
                 FitMode mode = FitMode::raw, int poly_order = 0);

enum class DampingRegime { none, under_damped, critically_damped, over_damped };

// Predicted decay of the squared error under strong convexity alpha,
// gradient Lipschitz constant gamma and constraint-operator modulus beta:
//   rho = alpha/2                                   if gamma^2 <= 4 beta
//       = min(alpha, gamma - sqrt(gamma^2-4beta))/2 otherwise,
// giving err_sq = O(exp(-2 rho t)) (an extra factor t^2 appears when
// rho^2 - gamma rho + beta = 0). With a scalar Hessian (hess f = alpha I)
// the sharper oscillator analysis applies and the regime split on
// alpha^2 - 4 beta fixes the exact exponent.
struct TheoreticalRates {
  double rho = 0.0;
  double discriminant = 0.0;  // rho^2 - gamma rho + beta
  double predicted_decay_exponent = 0.0;  // of err_sq, i.e. e^{-exponent t}
  bool t_squared_factor = false;
  DampingRegime regime = DampingRegime::none;
  std::optional<double> delta;  // sqrt(alpha^2 - 4 beta), over-damped only
};

TheoreticalRates theoretical_rates(double alpha, double beta, double gamma,
                                   bool scalar_hessian);

struct ExpBound {
  double supremum = 0.0;
  double attained_at = 0.0;
  double log_supremum = 0.0;
};

// sup over samples of exp(rate * t) * v(t), evaluated in log space so large
// rates cannot overflow; non-positive samples are skipped.
ExpBound exp_bound_supremum(const std::vector<double>& times,
                            const std::vector<double>& values, double rate);

// Decay rate of the squared distance to equilibrium predicted by the
// spectrum of the flow matrix: -2 * max{ Re mu : Re mu < -tol } over
// eigenvalues mu of M. Throws std::runtime_error if no eigenvalue decays.
double slowest_decay_rate(const Matrix& M, double tol = 1e-9);

}  // namespace saddleflow
