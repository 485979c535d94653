#pragma once

#include <stdexcept>
#include <vector>

#include "saddleflow/flows.hpp"
#include "saddleflow/model.hpp"
#include "saddleflow/types.hpp"

namespace saddleflow {

enum class Method { fixed_rk4, adaptive_dp54 };

struct IntegratorConfig {
  Method method = Method::adaptive_dp54;
  double step = 1e-3;              // fixed-mode step size
  double rtol = 1e-9;              // adaptive relative tolerance
  double atol = 1e-12;             // adaptive absolute tolerance
  double horizon = 10.0;           // absolute end time T
  double sample_interval = 0.05;   // spacing of stored samples

  void validate(double t_start) const;
};

// Trajectory sampled on the uniform grid t_k = t_start + k * sample_interval.
// derivatives[k] is a fresh field evaluation at (times[k], states[k]).
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> derivatives;

  std::size_t size() const { return times.size(); }
};

// Integration aborted because the state or field left the representable
// range; `t` is the time of the failed evaluation.
struct BlowupError : std::runtime_error {
  double t;
  explicit BlowupError(double t_in);
};

// Classical fourth-order Runge-Kutta step from (t, z) with step h > 0.
Vector rk4_step(const Field& f, double t, const Vector& z, double h);

// Integrates zdot = f(t, z) from (t_start, z0) to cfg.horizon and returns
// samples every cfg.sample_interval (the first sample is z0 itself).
// Fixed mode subdivides each sample interval into equal RK4 steps of size
// <= cfg.step. Adaptive mode uses a Dormand-Prince 5(4) pair with PI step
// control and fills the sample grid from its fifth-order dense output.
// Throws BlowupError on non-finite states and std::runtime_error if the
// adaptive step size underflows (below 1e-13).
Trajectory integrate(const Field& f, const Vector& z0, double t_start,
                     const IntegratorConfig& cfg);

// The first-order flow of a quadratic problem is affine:
// zdot = M z + r with M = [[-Q, -A'], [A, 0]] and r = [-q; -b].
struct AffineField {
  Matrix M;
  Vector r;
};
AffineField field_matrix(const SaddleProblem& p);

// Closed-form flow value z(t) = z* + exp(t M)(z0 - z*), where z* is the
// saddle point from kkt_solve. Independent of the steppers above; used as an
// oracle against them. Requires a quadratic objective and a solvable KKT
// system.
Vector linear_flow_oracle(const SaddleProblem& p, const Vector& z0, double t);

}  // namespace saddleflow
