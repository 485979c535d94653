#include "saddleflow/experiments.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <json.hpp>

#include "saddleflow/integrate.hpp"
#include "saddleflow/io.hpp"
#include "saddleflow/rng.hpp"

namespace saddleflow {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

ReferenceInstance make_instance(std::string name, SaddleProblem problem,
                                Vector x0, Vector lambda0,
                                bool scalar_hessian) {
  KktResult kkt = kkt_solve(problem);
  if (kkt.status != KktStatus::ok)
    throw std::runtime_error("reference instance '" + name +
                             "' has no saddle point: " + kkt.message);
  const QuadraticObjective* f = problem.objective->quadratic();
  ReferenceInstance inst{std::move(name),
                         std::move(problem),
                         std::move(x0),
                         std::move(lambda0),
                         std::move(kkt.point),
                         f->alpha(),
                         f->gamma(),
                         {},
                         scalar_hessian};
  inst.ops = operator_constants(inst.problem.constraint);
  return inst;
}

}  // namespace

ReferenceInstance example1() {
  Matrix Q(2, 2);
  Q << 1.0, -0.5, -0.5, 1.0;
  Matrix A = Matrix::Identity(2, 2);
  SaddleProblem p(
      std::make_shared<QuadraticObjective>(Q, Vector::Zero(2)),
      LinearConstraint(A, Vector::Ones(2)));
  Vector x0(2), l0(2);
  x0 << -1.0, 1.0;
  l0 << 1.0, 1.0;
  return make_instance("example1", std::move(p), x0, l0, false);
}

ReferenceInstance example2(double alpha) {
  require(alpha > 0.0, "example2: alpha must be positive");
  const Matrix Q = alpha * Matrix::Identity(2, 2);
  Matrix A(1, 2);
  const double s = std::sqrt(2.0) / 2.0;
  A << s, s;
  SaddleProblem p(
      std::make_shared<QuadraticObjective>(Q, Vector::Zero(2)),
      LinearConstraint(A, Vector::Ones(1)));
  Vector x0(2), l0(1);
  x0 << -1.0, 1.0;
  l0 << 1.0;
  return make_instance("example2", std::move(p), x0, l0, true);
}

ReferenceInstance multiplier_line_problem() {
  Matrix A(2, 1);
  A << 1.0, 1.0;
  SaddleProblem p(
      std::make_shared<QuadraticObjective>(Matrix::Identity(1, 1),
                                           Vector::Zero(1)),
      LinearConstraint(A, Vector::Ones(2)));
  Vector x0(1), l0(2);
  x0 << 2.0;
  l0 << 5.5, -0.5;
  return make_instance("multiplier-line", std::move(p), x0, l0, true);
}

RandomQp random_qp(std::uint64_t seed, Index n, Index m, double alpha,
                   double gamma) {
  require(n >= 2, "random_qp: n must be >= 2");
  require(m >= 1 && m <= n, "random_qp: need 1 <= m <= n");
  require(alpha > 0.0 && alpha <= gamma,
          "random_qp: need 0 < alpha <= gamma");
  Rng rng(seed);

  // Orthogonal eigenbasis with a deterministic sign convention.
  Matrix G = rng.gaussian_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix U = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix R = qr.matrixQR();
  for (Index j = 0; j < n; ++j)
    if (R(j, j) < 0.0) U.col(j) *= -1.0;

  // Spectrum attains both requested extremes.
  Vector eigs(n);
  eigs[0] = alpha;
  eigs[n - 1] = gamma;
  for (Index i = 1; i + 1 < n; ++i) eigs[i] = rng.uniform_in(alpha, gamma);
  Matrix Q = U * eigs.asDiagonal() * U.transpose();
  Q = 0.5 * (Q + Q.transpose()).eval();

  const Vector q = rng.gaussian_vector(n);

  Matrix A;
  for (int attempt = 0;; ++attempt) {
    A = rng.gaussian_matrix(m, n);
    Eigen::JacobiSVD<Matrix> svd(A);
    if (svd.singularValues()[m - 1] >
        1e-6 * svd.singularValues()[0])
      break;
    if (attempt > 64)
      throw std::runtime_error("random_qp: could not draw a full-rank A");
  }
  const Vector b = A * rng.gaussian_vector(n);

  SaddleProblem problem(
      std::make_shared<QuadraticObjective>(std::move(Q), q),
      LinearConstraint(std::move(A), b));
  KktResult kkt = kkt_solve(problem);
  if (kkt.status != KktStatus::ok)
    throw std::runtime_error("random_qp: generated instance unsolvable");
  return {std::move(problem), std::move(kkt.point)};
}

StructuredProblem structured_lift(const SaddleProblem& p) {
  auto g = std::make_shared<QuadraticObjective>(Matrix::Identity(1, 1),
                                                Vector::Zero(1));
  return StructuredProblem(p.objective, std::move(g), p.constraint.A,
                           Matrix::Zero(p.dual_dim(), 1), p.constraint.b);
}

StructuredSaddle lifted_saddle(const StructuredProblem& lifted,
                               const SaddlePoint& saddle) {
  return certify_structured(lifted, saddle.xi, Vector::Zero(1), saddle.eta);
}

AahSetup reference_aah_setup(const StructuredProblem& lifted, const Vector& x0,
                             const Vector& lambda0) {
  require(x0.size() == lifted.nx() && lambda0.size() == lifted.nl(),
          "reference_aah_setup: dimension mismatch");
  AahSetup setup;
  setup.params = AahParams{3.0, 0.5, 0.5, 1.0};
  const Index d = lifted.nx() + lifted.ny() + lifted.nl();
  setup.phase0 = Vector::Zero(2 * d);
  setup.phase0.head(lifted.nx()) = x0;
  setup.phase0.segment(lifted.nx() + lifted.ny(), lifted.nl()) = lambda0;
  return setup;
}

namespace {

// Least-squares slope of log v against log t (polynomial decay exponent).
RateFit loglog_rate(const std::vector<double>& times,
                    const std::vector<double>& values, double t_lo,
                    double t_hi, FitMode mode) {
  std::vector<double> lt, v;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_lo || times[k] > t_hi || times[k] <= 0.0) continue;
    lt.push_back(std::log(times[k]));
    v.push_back(values[k]);
  }
  try {
    return fit_rate(lt, v, std::log(t_lo), std::log(t_hi), mode);
  } catch (const std::runtime_error&) {
    return fit_rate(lt, v, std::log(t_lo), std::log(t_hi), FitMode::raw);
  }
}

nlohmann::json curve_entry(const std::string& curve, double fitted_rate,
                           double theoretical_rate, double r_squared,
                           const std::string& regime) {
  nlohmann::json j;
  j["curve"] = curve;
  j["fitted_rate"] = fitted_rate;
  j["theoretical_rate"] = theoretical_rate;
  j["r_squared"] = r_squared;
  j["regime"] = regime;
  return j;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_summary(const std::string& path, const std::string& figure,
                   const nlohmann::json& curves) {
  nlohmann::json j;
  j["figure"] = figure;
  j["curves"] = curves;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

ReplicateResult replicate_fig1(const std::string& out_dir) {
  ReplicateResult result;
  nlohmann::json curves = nlohmann::json::array();

  // First-order flow on the reference problem.
  ReferenceInstance inst = example1();
  IntegratorConfig cfg;
  cfg.method = Method::adaptive_dp54;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-13;
  cfg.horizon = 50.0;
  cfg.sample_interval = 0.05;
  Trajectory traj =
      integrate(make_ah_field(inst.problem), inst.z0().flat(), 0.0, cfg);
  DiagnosticsSeries ds = diagnostics_series(inst.problem, traj, inst.saddle);
  const std::string ah_csv = join_path(out_dir, "fig1_ah.csv");
  write_series_csv(ah_csv, ds);
  result.files.push_back(ah_csv);

  TheoreticalRates rates =
      theoretical_rates(inst.alpha, inst.ops.beta_primal, inst.gamma, false);
  RateFit fit = fit_rate(ds.times, ds.err_sq_primal, 20.0, 40.0);
  curves.push_back(curve_entry("ah_err_sq_primal", -fit.slope,
                               rates.predicted_decay_exponent, fit.r_squared,
                               "exponential"));

  // Accelerated flow on the lifted problem, t in [1, 100].
  StructuredProblem lifted = structured_lift(inst.problem);
  StructuredSaddle lsaddle = lifted_saddle(lifted, inst.saddle);
  AahSetup setup = reference_aah_setup(lifted, inst.x0, inst.lambda0);
  IntegratorConfig cfg2 = cfg;
  cfg2.horizon = 100.0;
  Trajectory traj2 = integrate(make_aah_field(lifted, setup.params),
                               setup.phase0, setup.params.t0, cfg2);
  DiagnosticsSeries ds2 =
      structured_diagnostics_series(lifted, traj2, lsaddle, true);
  const std::string aah_csv = join_path(out_dir, "fig1_aah.csv");
  write_series_csv(aah_csv, ds2);
  result.files.push_back(aah_csv);

  // The guarantee for the accelerated flow is polynomial: gap = O(1/t^2).
  RateFit aah_fit =
      loglog_rate(ds2.times, ds2.gap, 10.0, 100.0, FitMode::envelope);
  curves.push_back(curve_entry("aah_gap", -aah_fit.slope, 2.0,
                               aah_fit.r_squared, "polynomial"));

  const std::string summary = join_path(out_dir, "fig1_summary.json");
  write_summary(summary, "fig1", curves);
  result.files.push_back(summary);
  return result;
}

ReplicateResult replicate_fig2(const std::string& out_dir) {
  ReplicateResult result;
  nlohmann::json curves = nlohmann::json::array();

  struct Setup {
    double alpha;
    const char* csv;
    const char* curve;
    FitMode mode;
    int poly_order;
    double t_lo, t_hi;
  };
  // The under-damped curve oscillates too shallowly for ridge points
  // (amplitude 2 around mean 4), so a plain window fit is used throughout.
  const Setup setups[] = {
      {1.0, "fig2_alpha1.csv", "alpha1_err_sq_full", FitMode::raw, 0,
       5.0, 35.0},
      {2.0, "fig2_alpha2.csv", "alpha2_err_sq_full", FitMode::poly_corrected,
       2, 10.0, 25.0},
      {3.0, "fig2_alpha3.csv", "alpha3_err_sq_full", FitMode::raw, 0, 10.0,
       30.0},
  };

  for (const Setup& s : setups) {
    ReferenceInstance inst = example2(s.alpha);
    IntegratorConfig cfg;
    cfg.method = Method::adaptive_dp54;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-13;
    cfg.horizon = 40.0;
    cfg.sample_interval = 0.02;
    Trajectory traj =
        integrate(make_ah_field(inst.problem), inst.z0().flat(), 0.0, cfg);
    DiagnosticsSeries ds = diagnostics_series(inst.problem, traj, inst.saddle);
    const std::string csv = join_path(out_dir, s.csv);
    write_series_csv(csv, ds);
    result.files.push_back(csv);

    TheoreticalRates rates =
        theoretical_rates(inst.alpha, inst.ops.beta_dual, inst.gamma, true);
    RateFit fit = fit_rate(ds.times, ds.err_sq_full, s.t_lo, s.t_hi, s.mode,
                           s.poly_order);
    const char* regime =
        rates.regime == DampingRegime::under_damped      ? "under-damped"
        : rates.regime == DampingRegime::critically_damped
            ? "critically-damped"
            : "over-damped";
    curves.push_back(curve_entry(s.curve, -fit.slope,
                                 rates.predicted_decay_exponent,
                                 fit.r_squared, regime));
  }

  const std::string summary = join_path(out_dir, "fig2_summary.json");
  write_summary(summary, "fig2", curves);
  result.files.push_back(summary);
  return result;
}

}  // namespace

ReplicateResult replicate(Figure figure, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  return figure == Figure::fig1 ? replicate_fig1(out_dir)
                                : replicate_fig2(out_dir);
}

}  // namespace saddleflow
