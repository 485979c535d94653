#include "saddleflow/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>

#include "saddleflow/experiments.hpp"
#include "saddleflow/integrate.hpp"
#include "saddleflow/io.hpp"
#include "saddleflow/validate.hpp"

namespace saddleflow::cli {

namespace {

struct ProblemOptions {
  std::string problem = "example1";
  std::string problem_file;
  double alpha = 1.0;   // example2 curvature / random spectrum bottom
  double gamma = 10.0;  // random spectrum top
  std::uint64_t seed = 42;
  long n = 4;
  long m = 2;
};

struct RunOptions {
  ProblemOptions prob;
  std::string flow = "ah";
  std::string method = "dp54";
  double step = 1e-3;
  double rtol = 1e-9;
  double atol = 1e-12;
  double horizon = 50.0;
  double sample_interval = 0.05;
  AahParams aah;  // defaults nu=3, theta=0.5, mu=0.5, t0=1
  std::optional<std::string> out;
  std::string format = "csv";
};

struct RatesOptions {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  bool scalar_hessian = false;
};

struct ReplicateOptions {
  std::string figure;
  std::optional<std::string> out;
};

void add_problem_flags(CLI::App* cmd, ProblemOptions& o) {
  cmd->add_option("--problem", o.problem,
                  "Built-in problem: example1, example2, multiplier-line, "
                  "random")
      ->check(CLI::IsMember(
          {"example1", "example2", "multiplier-line", "random"}))
      ->capture_default_str();
  cmd->add_option("--problem-file", o.problem_file,
                  "JSON problem file (excludes --problem)")
      ->excludes("--problem");
  cmd->add_option("--alpha", o.alpha,
                  "example2 curvature / random spectrum minimum")
      ->capture_default_str();
  cmd->add_option("--gamma", o.gamma, "random spectrum maximum")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "random problem seed")
      ->capture_default_str();
  cmd->add_option("--n", o.n, "random problem primal dimension")
      ->capture_default_str();
  cmd->add_option("--m", o.m, "random problem constraint count")
      ->capture_default_str();
}

// A selected problem with reference data, shaped like the built-ins.
ReferenceInstance select_instance(const ProblemOptions& o) {
  if (!o.problem_file.empty()) {
    ProblemFile pf = load_problem_json(o.problem_file);
    KktResult kkt = kkt_solve(pf.problem);
    if (kkt.status != KktStatus::ok)
      throw std::runtime_error("problem has no saddle point: " + kkt.message);
    const QuadraticObjective* f = pf.problem.objective->quadratic();
    const Index n = pf.problem.primal_dim();
    const bool scalar =
        (f->Q() - f->alpha() * Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <=
        1e-12 * std::max(1.0, std::abs(f->alpha()));
    ReferenceInstance inst{std::filesystem::path(o.problem_file).stem().string(),
                           pf.problem,
                           pf.x0.value_or(Vector::Zero(n)),
                           pf.lambda0.value_or(
                               Vector::Zero(pf.problem.dual_dim())),
                           std::move(kkt.point),
                           f->alpha(),
                           f->gamma(),
                           {},
                           scalar};
    inst.ops = operator_constants(inst.problem.constraint);
    return inst;
  }
  if (o.problem == "example1") return example1();
  if (o.problem == "example2") return example2(o.alpha);
  if (o.problem == "multiplier-line") return multiplier_line_problem();
  // random
  RandomQp qp = random_qp(o.seed, o.n, o.m, o.alpha, o.gamma);
  const QuadraticObjective* f = qp.problem.objective->quadratic();
  ReferenceInstance inst{"random" + std::to_string(o.seed),
                         qp.problem,
                         Vector::Zero(qp.problem.primal_dim()),
                         Vector::Zero(qp.problem.dual_dim()),
                         std::move(qp.saddle),
                         f->alpha(),
                         f->gamma(),
                         {},
                         false};
  inst.ops = operator_constants(inst.problem.constraint);
  return inst;
}

IntegratorConfig integrator_config(const RunOptions& o) {
  IntegratorConfig cfg;
  cfg.method = (o.method == "rk4") ? Method::fixed_rk4 : Method::adaptive_dp54;
  cfg.step = o.step;
  cfg.rtol = o.rtol;
  cfg.atol = o.atol;
  cfg.horizon = o.horizon;
  cfg.sample_interval = o.sample_interval;
  return cfg;
}

int exec_run(const RunOptions& o) {
  const ReferenceInstance inst = select_instance(o.prob);
  const IntegratorConfig cfg = integrator_config(o);

  DiagnosticsSeries ds;
  if (o.flow == "ah") {
    const Trajectory traj =
        integrate(make_ah_field(inst.problem), inst.z0().flat(), 0.0, cfg);
    ds = diagnostics_series(inst.problem, traj, inst.saddle);
  } else {
    const StructuredProblem lifted = structured_lift(inst.problem);
    const StructuredSaddle lsaddle = lifted_saddle(lifted, inst.saddle);
    if (o.flow == "gah") {
      StructuredState s0{inst.x0, Vector::Zero(1), inst.lambda0};
      const Trajectory traj =
          integrate(make_gah_field(lifted), s0.flat(), 0.0, cfg);
      ds = structured_diagnostics_series(lifted, traj, lsaddle, false);
    } else {  // aah
      o.aah.validate();
      AahSetup setup = reference_aah_setup(lifted, inst.x0, inst.lambda0);
      setup.params = o.aah;
      const Trajectory traj = integrate(make_aah_field(lifted, setup.params),
                                        setup.phase0, setup.params.t0, cfg);
      ds = structured_diagnostics_series(lifted, traj, lsaddle, true);
    }
  }

  const std::string out_dir = resolve_out_dir(o.out);
  std::filesystem::create_directories(out_dir);
  const std::string ext = (o.format == "json") ? ".json" : ".csv";
  const std::string path =
      (std::filesystem::path(out_dir) / (inst.name + "_" + o.flow + ext))
          .string();
  if (o.format == "json")
    write_series_json(path, ds);
  else
    write_series_csv(path, ds);

  std::cout << "run: " << inst.name << " flow=" << o.flow
            << " method=" << o.method << " samples=" << ds.size() << '\n'
            << "final: t=" << format_full(ds.times.back())
            << " gap=" << format_full(ds.gap.back())
            << " err_sq_full=" << format_full(ds.err_sq_full.back())
            << " vel_sq=" << format_full(ds.vel_sq.back()) << '\n'
            << "wrote: " << path << '\n';
  return 0;
}

int exec_rates(const RatesOptions& o) {
  const TheoreticalRates r =
      theoretical_rates(o.alpha, o.beta, o.gamma, o.scalar_hessian);
  const char* regime =
      r.regime == DampingRegime::under_damped        ? "under-damped"
      : r.regime == DampingRegime::critically_damped ? "critically-damped"
      : r.regime == DampingRegime::over_damped       ? "over-damped"
                                                     : "general";
  std::cout << "rho = " << format_full(r.rho) << '\n'
            << "discriminant = " << format_full(r.discriminant) << '\n'
            << "err_sq decay exponent = "
            << format_full(r.predicted_decay_exponent)
            << (r.t_squared_factor ? "  (with t^2 factor)" : "") << '\n'
            << "regime = " << regime << '\n';
  if (r.delta) std::cout << "delta = " << format_full(*r.delta) << '\n';
  return 0;
}

int exec_replicate(const ReplicateOptions& o) {
  const Figure fig = (o.figure == "fig1") ? Figure::fig1 : Figure::fig2;
  const ReplicateResult res = replicate(fig, resolve_out_dir(o.out));
  for (const std::string& f : res.files) std::cout << "wrote: " << f << '\n';
  return 0;
}

int exec_validate(const ProblemOptions& o) {
  const ReferenceInstance inst = select_instance(o);
  const std::vector<CheckResult> checks = run_validation(inst);
  const CheckResult* first_fail = nullptr;
  for (const CheckResult& c : checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail
              << '\n';
    if (!c.pass && first_fail == nullptr) first_fail = &c;
  }
  if (first_fail != nullptr) {
    std::cerr << "validation failed at: " << first_fail->name << '\n';
    return 1;
  }
  std::cout << "all " << checks.size() << " checks passed for " << inst.name
            << '\n';
  return 0;
}

}  // namespace

std::string resolve_out_dir(const std::optional<std::string>& explicit_out) {
  if (explicit_out && !explicit_out->empty()) return *explicit_out;
  if (const char* env = std::getenv("SADDLE_FLOW_OUT"); env && *env != '\0')
    return env;
  return "out";
}

int run_main(int argc, const char* const* argv) {
  CLI::App app{
      "saddleflow: continuous-time saddle-point flows for linearly "
      "constrained convex minimization"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  RunOptions run_opts;
  std::string out_flag;  // shared buffer for --out
  CLI::App* run = app.add_subcommand(
      "run", "Integrate a flow and write its diagnostics series");
  add_problem_flags(run, run_opts.prob);
  run->add_option("--flow", run_opts.flow, "Flow: ah, gah, aah")
      ->check(CLI::IsMember({"ah", "gah", "aah"}));
  run->add_option("--method", run_opts.method,
                  "Integrator: dp54 (adaptive) or rk4 (fixed step)")
      ->check(CLI::IsMember({"dp54", "rk4"}));
  run->add_option("--step", run_opts.step, "fixed-mode step size");
  run->add_option("--rtol", run_opts.rtol, "adaptive relative tolerance");
  run->add_option("--atol", run_opts.atol, "adaptive absolute tolerance");
  run->add_option("--horizon", run_opts.horizon, "end time T");
  run->add_option("--sample-interval", run_opts.sample_interval,
                  "spacing of stored samples");
  CLI::Option* nu =
      run->add_option("--nu", run_opts.aah.nu, "accelerated damping (>= 3)");
  CLI::Option* theta = run->add_option("--theta", run_opts.aah.theta,
                                       "accelerated extrapolation");
  CLI::Option* mu =
      run->add_option("--mu", run_opts.aah.mu, "augmentation weight (>= 0)");
  CLI::Option* t0 =
      run->add_option("--t0", run_opts.aah.t0, "accelerated start time (> 0)");
  run->add_option("--out", out_flag, "output directory")
      ->envname("SADDLE_FLOW_OUT");
  run->add_option("--format", run_opts.format, "series format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  RatesOptions rates_opts;
  CLI::App* rates = app.add_subcommand(
      "rates", "Print the predicted decay rates for given constants");
  rates->add_option("--alpha", rates_opts.alpha, "strong convexity modulus")
      ->required();
  rates->add_option("--beta", rates_opts.beta, "constraint operator modulus")
      ->required();
  rates->add_option("--gamma", rates_opts.gamma, "gradient Lipschitz constant")
      ->required();
  rates->add_flag("--scalar-hessian", rates_opts.scalar_hessian,
                  "use the sharp scalar-Hessian regime split");

  ReplicateOptions rep_opts;
  std::string rep_out_flag;
  CLI::App* rep = app.add_subcommand(
      "replicate", "Reproduce the study figures (CSV + JSON summary)");
  rep->add_option("figure", rep_opts.figure, "fig1 or fig2")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2"}));
  rep->add_option("--out", rep_out_flag, "output directory")
      ->envname("SADDLE_FLOW_OUT");

  ProblemOptions val_opts;
  CLI::App* val = app.add_subcommand(
      "validate", "Run the invariant checks against a problem");
  add_problem_flags(val, val_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints the requested help, exit 0
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (run->parsed()) {
      if ((nu->count() || theta->count() || mu->count() || t0->count()) &&
          run_opts.flow != "aah") {
        std::cerr << "error: --nu/--theta/--mu/--t0 require --flow aah\n";
        return 2;
      }
      if (run->count("--out")) run_opts.out = out_flag;
      return exec_run(run_opts);
    }
    if (rates->parsed()) return exec_rates(rates_opts);
    if (rep->parsed()) {
      if (rep->count("--out")) rep_opts.out = rep_out_flag;
      return exec_replicate(rep_opts);
    }
    return exec_validate(val_opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("saddleflow");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace saddleflow::cli
