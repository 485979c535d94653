#include "saddleflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

namespace saddleflow {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string blowup_message(double t) {
  return "flow left the representable range at t = " + std::to_string(t);
}

}  // namespace

BlowupError::BlowupError(double t_in)
    : std::runtime_error(blowup_message(t_in)), t(t_in) {}

void IntegratorConfig::validate(double t_start) const {
  require(std::isfinite(horizon) && std::isfinite(t_start),
          "IntegratorConfig: non-finite times");
  require(sample_interval > 0.0,
          "IntegratorConfig: sample_interval must be positive");
  require(horizon >= t_start + sample_interval,
          "IntegratorConfig: horizon must cover at least one sample interval");
  if (method == Method::fixed_rk4) {
    require(step > 0.0, "IntegratorConfig: step must be positive");
  } else {
    require(rtol > 0.0 && atol > 0.0,
            "IntegratorConfig: tolerances must be positive");
  }
}

Vector rk4_step(const Field& f, double t, const Vector& z, double h) {
  require(h > 0.0, "rk4_step: h must be positive");
  const Vector k1 = f(t, z);
  const Vector k2 = f(t + 0.5 * h, z + (0.5 * h) * k1);
  const Vector k3 = f(t + 0.5 * h, z + (0.5 * h) * k2);
  const Vector k4 = f(t + h, z + h * k3);
  Vector out = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) throw BlowupError(t);
  return out;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                 a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
// Difference between the 5th- and 4th-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Weights of the fifth-order dense-output polynomial.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

struct DenseStep {
  double t = 0.0, h = 0.0;
  Vector r1, r2, r3, r4, r5;

  Vector eval(double ts) const {
    double theta = (ts - t) / h;
    theta = std::clamp(theta, 0.0, 1.0);
    const double th1 = 1.0 - theta;
    return r1 + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)));
  }
};

double scaled_error(const Vector& err, const Vector& y, const Vector& ynew,
                    double atol, double rtol) {
  double acc = 0.0;
  for (Index i = 0; i < err.size(); ++i) {
    const double sc =
        atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
    const double q = err[i] / sc;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

// Starting step size, following the classic two-stage estimate from
// Hairer/Norsett/Wanner.
double initial_step(const Field& f, double t0, const Vector& y0,
                    const Vector& f0, double atol, double rtol, double hmax) {
  double dnf = 0.0, dny = 0.0;
  for (Index i = 0; i < y0.size(); ++i) {
    const double sc = atol + rtol * std::abs(y0[i]);
    dnf += (f0[i] / sc) * (f0[i] / sc);
    dny += (y0[i] / sc) * (y0[i] / sc);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6
                                            : 0.01 * std::sqrt(dny / dnf);
  h = std::min(h, hmax);
  const Vector y1 = y0 + h * f0;
  const Vector f1 = f(t0 + h, y1);
  double der2 = 0.0;
  for (Index i = 0; i < y0.size(); ++i) {
    const double sc = atol + rtol * std::abs(y0[i]);
    der2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 =
      (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, hmax});
}

}  // namespace

Trajectory integrate(const Field& f, const Vector& z0, double t_start,
                     const IntegratorConfig& cfg) {
  cfg.validate(t_start);
  require(z0.size() >= 1, "integrate: empty state");
  if (!z0.allFinite()) throw BlowupError(t_start);

  const double ds = cfg.sample_interval;
  const auto k_max = static_cast<std::size_t>(
      std::floor((cfg.horizon - t_start) / ds + 1e-9));
  const double t_end = t_start + static_cast<double>(k_max) * ds;
  const auto sample_time = [&](std::size_t k) {
    return t_start + static_cast<double>(k) * ds;
  };

  Trajectory traj;
  traj.times.reserve(k_max + 1);
  traj.states.reserve(k_max + 1);
  traj.derivatives.reserve(k_max + 1);

  auto emit = [&](double t, const Vector& y) {
    Vector dy = f(t, y);
    if (!y.allFinite() || !dy.allFinite()) throw BlowupError(t);
    traj.times.push_back(t);
    traj.states.push_back(y);
    traj.derivatives.push_back(std::move(dy));
  };
  emit(t_start, z0);

  if (cfg.method == Method::fixed_rk4) {
    const auto n_sub = static_cast<std::size_t>(
        std::max(1.0, std::ceil(ds / cfg.step - 1e-9)));
    const double h = ds / static_cast<double>(n_sub);
    Vector y = z0;
    for (std::size_t k = 0; k < k_max; ++k) {
      const double tk = sample_time(k);
      for (std::size_t j = 0; j < n_sub; ++j)
        y = rk4_step(f, tk + static_cast<double>(j) * h, y, h);
      emit(sample_time(k + 1), y);
    }
    return traj;
  }

  // Dormand-Prince 5(4) with PI step-size control (FSAL pair).
  constexpr double safe = 0.9, fac1 = 0.2, fac2 = 10.0;
  constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75;
  constexpr double facc1 = 1.0 / fac1, facc2 = 1.0 / fac2;

  double t = t_start;
  Vector y = z0;
  Vector k1 = f(t, y);
  if (!k1.allFinite()) throw BlowupError(t);

  double h = initial_step(f, t, y, k1, cfg.atol, cfg.rtol, t_end - t_start);
  double facold = 1e-4;
  bool rejected = false;
  std::size_t k_next = 1;

  while (k_next <= k_max) {
    if (h < 1e-13)
      throw std::runtime_error(
          "integrate: adaptive step size underflow at t = " +
          std::to_string(t));
    h = std::min(h, t_end - t);

    const Vector k2 = f(t + c2 * h, y + h * (a21 * k1));
    const Vector k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Vector k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 =
        f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = f(
        t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector ynew =
        y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vector k7 = f(t + h, ynew);
    if (!ynew.allFinite() || !k7.allFinite()) throw BlowupError(t);

    const Vector errv =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = scaled_error(errv, y, ynew, cfg.atol, cfg.rtol);

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      // Accepted: build the dense-output polynomial and fill the sample grid
      // covered by this step.
      DenseStep dense;
      dense.t = t;
      dense.h = h;
      dense.r1 = y;
      dense.r2 = ynew - y;
      dense.r3 = h * k1 - dense.r2;
      dense.r4 = dense.r2 - h * k7 - dense.r3;
      dense.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 +
                      d7 * k7);

      const double t_new = t + h;
      const double slack = 1e-10 * std::max(1.0, std::abs(t_new)) + 1e-14;
      while (k_next <= k_max && sample_time(k_next) <= t_new + slack) {
        const double ts = sample_time(k_next);
        emit(ts, dense.eval(ts));
        ++k_next;
      }

      facold = std::max(err, 1e-4);
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double hnew = h / fac;
      if (rejected) hnew = std::min(hnew, h);
      rejected = false;
      t = t_new;
      y = ynew;
      k1 = k7;  // first-same-as-last
      h = hnew;
    } else {
      h = h / std::min(facc1, fac11 / safe);
      rejected = true;
    }
  }
  return traj;
}

AffineField field_matrix(const SaddleProblem& p) {
  const QuadraticObjective* f = p.objective->quadratic();
  require(f != nullptr, "field_matrix: requires a quadratic objective");
  const Index n = p.primal_dim();
  const Index m = p.dual_dim();
  AffineField af;
  af.M.resize(n + m, n + m);
  af.M.topLeftCorner(n, n) = -f->Q();
  af.M.topRightCorner(n, m) = -p.constraint.A.transpose();
  af.M.bottomLeftCorner(m, n) = p.constraint.A;
  af.M.bottomRightCorner(m, m).setZero();
  af.r.resize(n + m);
  af.r << -f->q(), -p.constraint.b;
  return af;
}

Vector linear_flow_oracle(const SaddleProblem& p, const Vector& z0, double t) {
  const AffineField af = field_matrix(p);
  require(z0.size() == af.M.rows(), "linear_flow_oracle: z0 dimension");
  KktResult kkt = kkt_solve(p);
  if (kkt.status != KktStatus::ok)
    throw std::runtime_error("linear_flow_oracle: no saddle point (" +
                             kkt.message + ")");
  // With M z* + r = 0, the affine flow reduces to
  // z(t) = z* + exp(t M)(z0 - z*), valid also for singular M.
  Vector zstar = kkt.point.state().flat();
  const Matrix expm = (t * af.M).exp();
  return zstar + expm * (z0 - zstar);
}

}  // namespace saddleflow
