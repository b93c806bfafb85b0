// newtonmr: run optimizers, batch performance profiles and assumption
// diagnostics from the command line.
//
// Exit codes: 0 success, 1 the run failed, 2 configuration error.

#include <CLI11.hpp>
#include <Eigen/QR>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "newtonmr/diagnostics.hpp"
#include "newtonmr/harness/runner.hpp"
#include "newtonmr/problems/test_functions.hpp"

namespace fs = std::filesystem;
using namespace newtonmr;
using harness::ConfigError;
using harness::RunConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailed = 1;
constexpr int kExitConfig = 2;

// Flags that override the config file; unset flags leave it alone.
struct Overrides {
  std::string config_path;
  std::optional<std::string> problem;
  std::optional<std::string> data;
  std::optional<std::string> test_data;
  std::optional<std::string> solver;
  std::optional<std::string> mode;
  std::optional<Index> n, p;
  std::optional<int> classes;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon_g;
  std::optional<std::size_t> max_iters;

  void add_problem_flags(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--problem", problem, "softmax | gmm | quadratic | x2y2 | x4 | hinge | regularized_quartic");
    app->add_option("--data", data, "libsvm training data (softmax)");
    app->add_option("--test-data", test_data, "libsvm held-out data (softmax)");
    app->add_option("--n", n, "generator: number of samples");
    app->add_option("--p", p, "generator: feature dimension");
    app->add_option("--classes", classes, "generator: softmax classes");
    app->add_option("--seed", seed, "problem seed");
  }

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : harness::load_run_config(config_path);
    if (problem) cfg.problem.name = *problem;
    if (data) cfg.problem.data_path = *data;
    if (test_data) cfg.problem.test_path = *test_data;
    if (n) cfg.problem.n = *n;
    if (p) cfg.problem.p = *p;
    if (classes) cfg.problem.num_classes = *classes;
    if (seed) {
      cfg.problem.seed = *seed;
      cfg.profile.seed = *seed;
    }
    if (solver) {
      try {
        cfg.solver = solver_kind_from_string(*solver);
      } catch (const std::invalid_argument&) {
        throw ConfigError("unknown solver '" + *solver + "'");
      }
    }
    if (mode) {
      if (*mode == "exact") cfg.newton_mr.mode = NewtonMRMode::exact;
      else if (*mode == "inexact") cfg.newton_mr.mode = NewtonMRMode::inexact;
      else throw ConfigError("--mode must be exact or inexact");
    }
    if (epsilon_g) cfg.epsilon_g = *epsilon_g;
    if (max_iters) cfg.max_outer_iters = *max_iters;
    cfg.sync_termination();
    return cfg;
  }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_optimize(const Overrides& ov, const std::string& out_path, const std::string& accuracy_path) {
  RunConfig cfg = ov.load();
  if (!out_path.empty()) cfg.trace_path = out_path;
  cfg.validate();
  const harness::RunOutcome run = harness::run_single(cfg);
  const OptimizerTrace& tr = run.result.trace;
  const IterationRecord& last = tr.records.back();
  std::cout << "solver " << to_string(tr.solver) << "  status " << to_string(tr.status) << "  iters " << last.iter
            << "  f " << last.f << "  |g| " << last.grad_norm << "  cost " << oracle_cost(tr.counts) << "\n";
  if (run.problem.test) {
    const auto curve = harness::accuracy_curve(tr, *run.problem.test);
    std::cout << "test accuracy " << curve.back().second << "\n";
    if (!accuracy_path.empty()) {
      std::ofstream out(accuracy_path);
      harness::write_accuracy_csv(out, curve);
    }
  }
  return is_failure(tr.status) ? kExitRunFailed : kExitOk;
}

int cmd_profile(const Overrides& ov, std::optional<std::size_t> runs, std::optional<std::size_t> threads,
                const std::string& out_dir) {
  RunConfig cfg = ov.load();
  if (runs) cfg.profile.runs = *runs;
  if (threads) cfg.profile.threads = *threads;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (cfg.out_dir.empty()) throw ConfigError("profile needs --out DIR");
  cfg.validate();

  const harness::BatchResult batch = harness::run_batch(cfg);
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  write_file(dir / "config.json", harness::run_config_to_json(cfg));
  {
    std::ofstream out(dir / "cells.csv");
    harness::write_cells_csv(out, batch);
  }
  for (std::size_t m = 0; m < harness::kProfileMetrics.size(); ++m) {
    const harness::ProfileInput& in = batch.inputs[m];
    std::ofstream out(dir / ("profile_" + std::string(to_string(harness::kProfileMetrics[m])) + ".csv"));
    harness::write_profile_csv(out, harness::performance_profile(in, harness::profile_lambdas(in, cfg.profile.n_lambdas)));
  }
  std::size_t failed = 0;
  for (const harness::CellSummary& c : batch.cells) failed += is_failure(c.status);
  std::cout << batch.cells.size() << " runs, " << failed << " failed; results in " << dir.string() << "\n";
  return kExitOk;
}

int cmd_diagnose(const Overrides& ov, const std::string& report_path, const std::string& format,
                 std::size_t samples) {
  RunConfig cfg = ov.load();
  cfg.validate();
  const harness::BoundProblem bp = harness::bind_problem(cfg.problem);
  if (bp.oracle->dim() > kDiagnosticsMaxDim)
    throw ConfigError("diagnostics are limited to dimension " + std::to_string(kDiagnosticsMaxDim));

  DiagnoseOptions opts;
  opts.n_samples = samples;
  opts.seed = cfg.problem.seed;
  const std::string& name = cfg.problem.name;
  if (name == "x2y2" || name == "x4" || name == "hinge") opts.f_star = 0.0;
  if (name == "x4") opts.sample_radius = 10.0;
  if (const auto* ls = dynamic_cast<const LeastSquares*>(bp.oracle.get())) {
    const Vector xs = ls->a().completeOrthogonalDecomposition().solve(ls->b());
    opts.f_star = ls->value(xs);
  }
  const AssumptionReport rep = diagnose(name, *bp.oracle, bp.x0, opts);
  const std::string text = format == "json" ? rep.to_json() : rep.to_key_value();
  if (report_path.empty()) std::cout << text;
  else write_file(report_path, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Newton-MR and baseline optimizers, benchmark harness and assumption diagnostics"};
  app.require_subcommand(1);

  Overrides ov;
  std::string out_path, accuracy_path, out_dir, report_path, format = "json";
  std::optional<std::size_t> runs, threads;
  std::size_t samples = 10;

  CLI::App* opt = app.add_subcommand("optimize", "Run one solver on one problem and write its trace");
  ov.add_problem_flags(opt);
  opt->add_option("--solver", ov.solver, "newton-mr | newton-cg | lbfgs | nlcg | gauss-newton");
  opt->add_option("--mode", ov.mode, "Newton-MR mode: exact | inexact");
  opt->add_option("--epsilon-g", ov.epsilon_g, "gradient-norm tolerance");
  opt->add_option("--max-iters", ov.max_iters, "outer iteration cap");
  opt->add_option("--out", out_path, "trace CSV path");
  opt->add_option("--accuracy-out", accuracy_path, "test-accuracy CSV path (softmax with --test-data)");

  CLI::App* prof = app.add_subcommand("profile", "Repeated runs of several solvers and performance profiles");
  ov.add_problem_flags(prof);
  prof->add_option("--runs", runs, "repetitions");
  prof->add_option("--threads", threads, "worker threads");
  prof->add_option("--out", out_dir, "output directory");

  CLI::App* diag = app.add_subcommand("diagnose", "Empirical checks of the structural assumptions");
  ov.add_problem_flags(diag);
  diag->add_option("--report", report_path, "report path (stdout when omitted)");
  diag->add_option("--format", format, "json | kv")->check(CLI::IsMember({"json", "kv"}));
  diag->add_option("--samples", samples, "sample points around x0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (opt->parsed()) return cmd_optimize(ov, out_path, accuracy_path);
    if (prof->parsed()) return cmd_profile(ov, runs, threads, out_dir);
    return cmd_diagnose(ov, report_path, format, samples);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailed;
  }
}
