#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "saddleflow/model.hpp"
#include "saddleflow/rng.hpp"
#include "test_util.hpp"

using namespace saddleflow;
using tu::vec1;
using tu::vec2;

namespace {

const PrimalDualState kZ0{vec2(-1.0, 1.0), vec2(1.0, 1.0)};

}  // namespace

TEST_CASE("quadratic objective evaluates value, gradient and Hessian") {
  SaddleProblem p = tu::reference_problem();
  const Objective& f = *p.objective;
  // f(-1, 1) = (1 + 1 + 1)/2.
  CHECK(f.value(kZ0.x) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK((f.gradient(kZ0.x) - vec2(-1.5, 1.5)).norm() == doctest::Approx(0.0));
  CHECK(f.has_hessian());
  CHECK((f.hessian_vec(kZ0.x, vec2(2.0, 0.0)) - vec2(2.0, -1.0)).norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("quadratic objective rejects invalid data") {
  Matrix asym(2, 2);
  asym << 1.0, 0.1, 0.0, 1.0;
  CHECK_THROWS_AS(QuadraticObjective(asym, Vector::Zero(2)),
                  std::invalid_argument);

  Matrix indef(2, 2);
  indef << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(QuadraticObjective(indef, Vector::Zero(2)),
                  std::invalid_argument);

  CHECK_THROWS_AS(QuadraticObjective(Matrix::Identity(2, 2), Vector::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("problem construction rejects dimension mismatches") {
  auto f = std::make_shared<QuadraticObjective>(Matrix::Identity(3, 3),
                                                Vector::Zero(3));
  CHECK_THROWS_AS(
      SaddleProblem(f, LinearConstraint(Matrix::Identity(2, 2),
                                        Vector::Ones(2))),
      std::invalid_argument);
  CHECK_THROWS_AS(LinearConstraint(Matrix::Identity(2, 2), Vector::Ones(3)),
                  std::invalid_argument);
}

TEST_CASE("primal-dual state flattens and splits") {
  const Vector z = kZ0.flat();
  REQUIRE(z.size() == 4);
  CHECK(z[0] == -1.0);
  CHECK(z[3] == 1.0);
  const PrimalDualState back = PrimalDualState::split(z, 2);
  CHECK((back.x - kZ0.x).norm() == 0.0);
  CHECK((back.lambda - kZ0.lambda).norm() == 0.0);
  CHECK(kZ0.squared_norm() == doctest::Approx(4.0));
}

TEST_CASE("Lagrangian and its gradients at the reference start point") {
  SaddleProblem p = tu::reference_problem();
  // L(z0) = 1.5 + <(1,1), (-2,0)> = -0.5.
  CHECK(lagrangian(p, kZ0) == doctest::Approx(-0.5).epsilon(1e-15));

  auto [gx, gl] = lagrangian_grad(p, kZ0);
  CHECK((gx - vec2(-0.5, 2.5)).norm() == doctest::Approx(0.0));
  CHECK((gl - vec2(-2.0, 0.0)).norm() == doctest::Approx(0.0));

  const PrimalDualState t = saddle_operator(p, kZ0);
  CHECK((t.x - vec2(-0.5, 2.5)).norm() == doctest::Approx(0.0));
  CHECK((t.lambda - vec2(2.0, 0.0)).norm() == doctest::Approx(0.0));
}

TEST_CASE("Lagrangian is affine in the multiplier") {
  SaddleProblem p = tu::reference_problem();
  Rng rng(7);
  for (int k = 0; k < 20; ++k) {
    const Vector x = rng.gaussian_vector(2) * 3.0;
    const Vector l1 = rng.gaussian_vector(2) * 3.0;
    const Vector l2 = rng.gaussian_vector(2) * 3.0;
    const double a = rng.uniform();
    const double mixed = lagrangian(p, {x, a * l1 + (1.0 - a) * l2});
    const double combo =
        a * lagrangian(p, {x, l1}) + (1.0 - a) * lagrangian(p, {x, l2});
    CHECK(mixed == doctest::Approx(combo).epsilon(1e-12));
  }
}

TEST_CASE("direct KKT solve certifies the reference saddle point") {
  SaddleProblem p = tu::reference_problem();
  const KktResult r = kkt_solve(p);
  REQUIRE(r.status == KktStatus::ok);
  CHECK((r.point.xi - vec2(1.0, 1.0)).norm() <= 1e-12);
  CHECK((r.point.eta - vec2(-0.5, -0.5)).norm() <= 1e-12);
  CHECK(r.point.stationarity_residual <= 1e-12);
  CHECK(r.point.feasibility_residual <= 1e-12);
  CHECK(r.point.certified());
  CHECK_FALSE(r.point.multiplier_min_norm);
  CHECK(r.point.multiplier_directions.cols() == 0);

  // T vanishes at the saddle point.
  const PrimalDualState t = saddle_operator(p, r.point.state());
  CHECK(std::sqrt(t.squared_norm()) <= 1e-12);
}

TEST_CASE("KKT fallback returns the minimum-norm multiplier") {
  SaddleProblem p = tu::duplicated_row_problem();
  const KktResult r = kkt_solve(p);
  REQUIRE(r.status == KktStatus::ok);
  CHECK((r.point.xi - vec1(1.0)).norm() <= 1e-12);
  CHECK((r.point.eta - vec2(-0.5, -0.5)).norm() <= 1e-12);
  CHECK(r.point.multiplier_min_norm);
  REQUIRE(r.point.multiplier_directions.cols() == 1);
  // Direction space of the multiplier line is span(1, -1).
  const Vector d = r.point.multiplier_directions.col(0);
  CHECK(std::abs(d.norm() - 1.0) <= 1e-12);
  CHECK(std::abs(d.dot(vec2(1.0, 1.0))) <= 1e-12);
}

TEST_CASE("KKT detects infeasible and unbounded problems") {
  Matrix A(2, 2);
  A << 1.0, 1.0, 1.0, 1.0;
  SaddleProblem infeasible(
      std::make_shared<QuadraticObjective>(Matrix::Identity(2, 2),
                                           Vector::Zero(2)),
      LinearConstraint(A, vec2(1.0, 2.0)));
  CHECK(kkt_solve(infeasible).status == KktStatus::infeasible);

  // min x1^2/2 - x2 over x1 = 1: linear descent direction along x2.
  Matrix Q = Matrix::Zero(2, 2);
  Q(0, 0) = 1.0;
  Matrix A2(1, 2);
  A2 << 1.0, 0.0;
  SaddleProblem unbounded(
      std::make_shared<QuadraticObjective>(Q, vec2(0.0, -1.0)),
      LinearConstraint(A2, vec1(1.0)));
  CHECK(kkt_solve(unbounded).status == KktStatus::unbounded);
}

TEST_CASE("multiplier projection lands on the multiplier line") {
  SaddleProblem p = tu::duplicated_row_problem();
  const Vector xi = vec1(1.0);
  const Vector proj = multiplier_projection(p, xi, vec2(5.5, -0.5));
  CHECK((proj - vec2(2.5, -3.5)).norm() <= 1e-12);

  // Idempotent, and the displacement is orthogonal to the line direction.
  const Vector twice = multiplier_projection(p, xi, proj);
  CHECK((twice - proj).norm() <= 1e-12);
  const Vector moved = vec2(5.5, -0.5) - proj;
  CHECK(std::abs(moved.dot(vec2(1.0, -1.0))) <= 1e-12);

  // Non-expansive over random pairs.
  Rng rng(11);
  for (int k = 0; k < 25; ++k) {
    const Vector a = rng.gaussian_vector(2) * 4.0;
    const Vector b = rng.gaussian_vector(2) * 4.0;
    const Vector pa = multiplier_projection(p, xi, a);
    const Vector pb = multiplier_projection(p, xi, b);
    CHECK((pa - pb).norm() <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("multiplier projection rejects an empty multiplier set") {
  // grad f(xi) = (1, 2) is not in range(A') = span(1, 1).
  Matrix A(1, 2);
  A << 1.0, 1.0;
  SaddleProblem p(
      std::make_shared<QuadraticObjective>(Matrix::Identity(2, 2),
                                           Vector::Zero(2)),
      LinearConstraint(A, vec1(3.0)));
  CHECK_THROWS_AS(multiplier_projection(p, vec2(1.0, 2.0), vec1(0.0)),
                  std::runtime_error);
}

TEST_CASE("operator constants of the reference constraints") {
  SaddleProblem p = tu::reference_problem();
  const OperatorConstants oc = operator_constants(p.constraint);
  CHECK(oc.beta_primal == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(oc.beta_dual == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(oc.a_norm_sq == doctest::Approx(1.0).epsilon(1e-14));

  SaddleProblem dup = tu::duplicated_row_problem();
  const OperatorConstants od = operator_constants(dup.constraint);
  CHECK(od.beta_primal == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(od.beta_dual == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(od.a_norm_sq == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("convexity constants are the extreme eigenvalues") {
  SaddleProblem p = tu::reference_problem();
  const auto [alpha, gamma] =
      convexity_constants(*p.objective->quadratic());
  CHECK(alpha == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(gamma == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("Bregman distance of a quadratic is the Q-seminorm") {
  SaddleProblem p = tu::reference_problem();
  // D(y, x) with y - x = (1, 1): (1/2)(y-x)'Q(y-x) = 1/2.
  CHECK(bregman_distance(*p.objective, vec2(1.0, 1.0), vec2(0.0, 0.0)) ==
        doctest::Approx(0.5).epsilon(1e-14));

  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const Vector x = rng.gaussian_vector(2) * 3.0;
    const Vector y = rng.gaussian_vector(2) * 3.0;
    CHECK(bregman_distance(*p.objective, y, x) >= -1e-12);
  }
}

TEST_CASE("quadratic-likeness residual separates quadratics from quartics") {
  SaddleProblem p = tu::reference_problem();
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vector x = rng.gaussian_vector(2) * 3.0;
    const Vector y = rng.gaussian_vector(2) * 3.0;
    CHECK(std::abs(condition_c_residual(*p.objective, x, y)) <= 1e-12);
  }

  // f(x) = x^4: residual at x = 1, y = 0 is 2*(0 - 1 + 4) - 12 = -6.
  SmoothObjective quartic(
      1, [](const Vector& x) { return std::pow(x[0], 4); },
      [](const Vector& x) { return vec1(4.0 * std::pow(x[0], 3)); },
      [](const Vector& x, const Vector& v) {
        return vec1(12.0 * x[0] * x[0] * v[0]);
      });
  CHECK(condition_c_residual(quartic, vec1(1.0), vec1(0.0)) ==
        doctest::Approx(-6.0).epsilon(1e-12));
}

TEST_CASE("gradient check accepts consistent objectives and flags broken ones") {
  SaddleProblem p = tu::reference_problem();
  CHECK(gradient_check(*p.objective, Vector::Zero(2), 3.0, 50, 17) <= 1e-7);

  SmoothObjective broken(
      2, [](const Vector& x) { return 0.5 * x.squaredNorm(); },
      [](const Vector& x) { return Vector(2.0 * x); });  // wrong by 2x
  CHECK(gradient_check(broken, Vector::Zero(2), 3.0, 50, 17) > 1e-2);
}

TEST_CASE("saddle operator is monotone and strongly monotone in the primal") {
  SaddleProblem p = tu::reference_problem();
  const double alpha = p.objective->quadratic()->alpha();
  Rng rng(23);
  for (int k = 0; k < 100; ++k) {
    const PrimalDualState z1{rng.gaussian_vector(2) * 5.0,
                             rng.gaussian_vector(2) * 5.0};
    const PrimalDualState z2{rng.gaussian_vector(2) * 5.0,
                             rng.gaussian_vector(2) * 5.0};
    const PrimalDualState t1 = saddle_operator(p, z1);
    const PrimalDualState t2 = saddle_operator(p, z2);
    const double inner = (t1.x - t2.x).dot(z1.x - z2.x) +
                         (t1.lambda - t2.lambda).dot(z1.lambda - z2.lambda);
    CHECK(inner >= alpha * (z1.x - z2.x).squaredNorm() - 1e-10);
  }
}

TEST_CASE("saddle inequality holds around the certified point") {
  SaddleProblem p = tu::reference_problem();
  const KktResult r = kkt_solve(p);
  REQUIRE(r.status == KktStatus::ok);
  Rng rng(29);
  for (int k = 0; k < 50; ++k) {
    const Vector x = rng.gaussian_vector(2) * 5.0;
    const Vector l = rng.gaussian_vector(2) * 5.0;
    const double left = lagrangian(p, {r.point.xi, l});
    const double mid = lagrangian(p, {r.point.xi, r.point.eta});
    const double right = lagrangian(p, {x, r.point.eta});
    CHECK(left <= mid + 1e-10);
    CHECK(mid <= right + 1e-10);
  }
}

TEST_CASE("smooth objective validates callbacks and declared constants") {
  CHECK_THROWS_AS(SmoothObjective(0, nullptr, nullptr),
                  std::invalid_argument);
  SmoothObjective f(
      2, [](const Vector& x) { return 0.5 * x.squaredNorm(); },
      [](const Vector& x) { return Vector(x); }, nullptr, 1.0, 1.0);
  CHECK(f.declared_alpha() == 1.0);
  CHECK_FALSE(f.has_hessian());
  CHECK_THROWS_AS(f.hessian_vec(Vector::Zero(2), Vector::Zero(2)),
                  std::logic_error);
  CHECK_THROWS_AS(f.value(Vector::Zero(3)), std::invalid_argument);
}
