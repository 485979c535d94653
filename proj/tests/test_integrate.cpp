#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "saddleflow/experiments.hpp"
#include "saddleflow/integrate.hpp"
#include "test_util.hpp"

using namespace saddleflow;
using tu::vec1;
using tu::vec2;

namespace {

IntegratorConfig fixed_cfg(double step, double horizon, double ds = 0.05) {
  IntegratorConfig cfg;
  cfg.method = Method::fixed_rk4;
  cfg.step = step;
  cfg.horizon = horizon;
  cfg.sample_interval = ds;
  return cfg;
}

IntegratorConfig adaptive_cfg(double rtol, double atol, double horizon,
                              double ds = 0.05) {
  IntegratorConfig cfg;
  cfg.method = Method::adaptive_dp54;
  cfg.rtol = rtol;
  cfg.atol = atol;
  cfg.horizon = horizon;
  cfg.sample_interval = ds;
  return cfg;
}

}  // namespace

TEST_CASE("one fourth-order step of exponential decay") {
  const Field f = [](double, const Vector& z) { return Vector(-z); };
  const Vector z1 = rk4_step(f, 0.0, vec1(1.0), 0.1);
  // 1 - h + h^2/2 - h^3/6 + h^4/24 at h = 0.1.
  CHECK(z1[0] == doctest::Approx(0.9048375).epsilon(1e-15));
  CHECK_THROWS_AS(rk4_step(f, 0.0, vec1(1.0), 0.0), std::invalid_argument);
}

TEST_CASE("affine field matrix and offset of the reference problem") {
  SaddleProblem p = tu::reference_problem();
  const AffineField af = field_matrix(p);
  Matrix expected(4, 4);
  expected << -1.0, 0.5, -1.0, 0.0,   //
      0.5, -1.0, 0.0, -1.0,           //
      1.0, 0.0, 0.0, 0.0,             //
      0.0, 1.0, 0.0, 0.0;
  CHECK((af.M - expected).cwiseAbs().maxCoeff() == 0.0);
  Vector r(4);
  r << 0.0, 0.0, -1.0, -1.0;
  CHECK((af.r - r).norm() == 0.0);

  // The saddle point is the equilibrium of the affine flow.
  const KktResult kkt = kkt_solve(p);
  CHECK((af.M * kkt.point.state().flat() + af.r).norm() <= 1e-12);

  // The closed-form flow starts at z0 and matches the field's derivative.
  const Vector z0 = PrimalDualState{vec2(-1.0, 1.0), vec2(1.0, 1.0)}.flat();
  CHECK((linear_flow_oracle(p, z0, 0.0) - z0).norm() <= 1e-12);
}

TEST_CASE("fixed-step flow matches the closed-form flow") {
  SaddleProblem p = tu::reference_problem();
  const Vector z0 = PrimalDualState{vec2(-1.0, 1.0), vec2(1.0, 1.0)}.flat();
  const Trajectory traj =
      integrate(make_ah_field(p), z0, 0.0, fixed_cfg(1e-3, 5.0));
  REQUIRE(traj.size() == 101);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vector exact = linear_flow_oracle(p, z0, traj.times[k]);
    worst = std::max(worst, (traj.states[k] - exact).norm());
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("fixed-step error contracts at fourth order") {
  ReferenceInstance inst = example2(2.0);
  const Vector z0 = inst.z0().flat();
  auto final_error = [&](double h) {
    const Trajectory traj = integrate(make_ah_field(inst.problem), z0, 0.0,
                                      fixed_cfg(h, 1.0, 1.0));
    return (traj.states.back() - linear_flow_oracle(inst.problem, z0, 1.0))
        .norm();
  };
  const double e1 = final_error(0.02);
  const double e2 = final_error(0.01);
  REQUIRE(e2 > 1e-14);  // above rounding noise, so the ratio is meaningful
  const double ratio = e1 / e2;
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("adaptive flow tracks the closed-form flow at every sample") {
  SaddleProblem p = tu::reference_problem();
  const Vector z0 = PrimalDualState{vec2(-1.0, 1.0), vec2(1.0, 1.0)}.flat();
  const Trajectory traj =
      integrate(make_ah_field(p), z0, 0.0, adaptive_cfg(1e-9, 1e-12, 10.0));
  REQUIRE(traj.size() == 201);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vector exact = linear_flow_oracle(p, z0, traj.times[k]);
    worst = std::max(worst, (traj.states[k] - exact).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("adaptive and fixed modes agree on the sample grid") {
  SaddleProblem p = tu::reference_problem();
  const Vector z0 = PrimalDualState{vec2(-1.0, 1.0), vec2(1.0, 1.0)}.flat();
  const Trajectory fixed =
      integrate(make_ah_field(p), z0, 0.0, fixed_cfg(1e-3, 10.0));
  const Trajectory adaptive =
      integrate(make_ah_field(p), z0, 0.0, adaptive_cfg(1e-9, 1e-12, 10.0));
  REQUIRE(fixed.size() == adaptive.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    REQUIRE(fixed.times[k] == adaptive.times[k]);
    worst = std::max(worst, (fixed.states[k] - adaptive.states[k]).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("sample grid is exact and derivatives are fresh evaluations") {
  SaddleProblem p = tu::reference_problem();
  const Field f = make_ah_field(p);
  const Vector z0 = PrimalDualState{vec2(-1.0, 1.0), vec2(1.0, 1.0)}.flat();

  // Horizon that is not a multiple of the sample interval: grid stops at the
  // last covered multiple.
  IntegratorConfig cfg = fixed_cfg(0.02, 2.03, 0.05);
  const Trajectory traj = integrate(f, z0, 0.0, cfg);
  REQUIRE(traj.size() == 41);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(traj.times[k] == 0.05 * static_cast<double>(k));
    CHECK((traj.derivatives[k] - f(traj.times[k], traj.states[k])).norm() ==
          0.0);
  }

  const Trajectory atraj = integrate(f, z0, 0.0, adaptive_cfg(1e-9, 1e-12,
                                                              2.03, 0.05));
  REQUIRE(atraj.size() == 41);
  for (std::size_t k = 0; k < atraj.size(); ++k)
    CHECK(atraj.times[k] == 0.05 * static_cast<double>(k));
}

TEST_CASE("an equilibrium start stays put in both modes") {
  SaddleProblem p = tu::reference_problem();
  const Vector zstar = kkt_solve(p).point.state().flat();
  for (const IntegratorConfig& cfg :
       {fixed_cfg(1e-2, 3.0), adaptive_cfg(1e-9, 1e-12, 3.0)}) {
    const Trajectory traj = integrate(make_ah_field(p), zstar, 0.0, cfg);
    double worst = 0.0;
    for (const Vector& z : traj.states)
      worst = std::max(worst, (z - zstar).norm());
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("non-autonomous fields are integrated and densely sampled") {
  // zdot = cos(t), z(0) = 0: z(t) = sin(t).
  const Field f = [](double t, const Vector&) { return vec1(std::cos(t)); };
  const Trajectory traj =
      integrate(f, vec1(0.0), 0.0, adaptive_cfg(1e-10, 1e-13, 6.0, 0.05));
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k)
    worst = std::max(worst,
                     std::abs(traj.states[k][0] - std::sin(traj.times[k])));
  CHECK(worst <= 1e-9);

  // Shifted start time: zdot = 2/t with z(1) = 0 gives z = 2 log t.
  const Field g = [](double t, const Vector&) { return vec1(2.0 / t); };
  const Trajectory traj2 =
      integrate(g, vec1(0.0), 1.0, adaptive_cfg(1e-10, 1e-13, 5.0, 0.1));
  CHECK(traj2.times.front() == 1.0);
  CHECK(traj2.times.back() == doctest::Approx(5.0));
  double worst2 = 0.0;
  for (std::size_t k = 0; k < traj2.size(); ++k)
    worst2 = std::max(
        worst2, std::abs(traj2.states[k][0] - 2.0 * std::log(traj2.times[k])));
  CHECK(worst2 <= 1e-9);
}

TEST_CASE("finite-time blow-up raises a time-stamped error") {
  // zdot = z^2 from 1 blows up at t = 1.
  const Field f = [](double, const Vector& z) {
    return Vector(z.array().square());
  };
  try {
    integrate(f, vec1(1.0), 0.0, fixed_cfg(1e-2, 2.0));
    FAIL("expected BlowupError");
  } catch (const BlowupError& e) {
    CHECK(e.t >= 0.9);
    CHECK(e.t <= 2.0);
  }
  // The adaptive stepper either detects the overflow or underflows its step.
  CHECK_THROWS_AS(
      integrate(f, vec1(1.0), 0.0, adaptive_cfg(1e-9, 1e-12, 2.0)),
      std::runtime_error);
}

TEST_CASE("configuration and input validation") {
  SaddleProblem p = tu::reference_problem();
  const Field f = make_ah_field(p);
  const Vector z0 = Vector::Zero(4);

  CHECK_THROWS_AS(integrate(f, z0, 0.0, fixed_cfg(0.0, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate(f, z0, 0.0, fixed_cfg(1e-3, 0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate(f, z0, 5.0, fixed_cfg(1e-3, 5.01, 0.05)),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate(f, z0, 0.0, adaptive_cfg(0.0, 1e-12, 1.0)),
                  std::invalid_argument);

  Vector bad = z0;
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(integrate(f, bad, 0.0, fixed_cfg(1e-3, 1.0)), BlowupError);
}

TEST_CASE("closed-form flow handles a singular field matrix") {
  // Duplicated constraint rows: the flow matrix has a zero eigenvalue and
  // the multiplier difference lambda_1 - lambda_2 is conserved.
  SaddleProblem p = tu::duplicated_row_problem();
  Vector z0(3);
  z0 << 2.0, 5.5, -0.5;
  const Vector zT = linear_flow_oracle(p, z0, 60.0);
  CHECK(std::abs((zT[1] - zT[2]) - 6.0) <= 1e-9);
  // Long-time limit: x -> 1 and lambda -> projection (2.5, -3.5).
  CHECK(std::abs(zT[0] - 1.0) <= 1e-9);
  CHECK(std::abs(zT[1] - 2.5) <= 1e-8);
  CHECK(std::abs(zT[2] + 3.5) <= 1e-8);

  // No saddle point: the oracle refuses.
  Matrix A(2, 2);
  A << 1.0, 1.0, 1.0, 1.0;
  SaddleProblem infeasible(
      std::make_shared<QuadraticObjective>(Matrix::Identity(2, 2),
                                           Vector::Zero(2)),
      LinearConstraint(A, vec2(1.0, 2.0)));
  CHECK_THROWS_AS(linear_flow_oracle(infeasible, Vector::Zero(4), 1.0),
                  std::runtime_error);
}

TEST_CASE("closed-form and stepped flows agree through the dual route") {
  SaddleProblem p = tu::reference_problem();
  const Vector z0 = PrimalDualState{vec2(-1.0, 1.0), vec2(1.0, 1.0)}.flat();
  const Trajectory traj =
      integrate(make_ah_field(p), z0, 0.0, adaptive_cfg(1e-11, 1e-14, 3.0));
  const Vector exact = linear_flow_oracle(p, z0, 3.0);
  CHECK((traj.states.back() - exact).norm() <= 1e-8);
}
