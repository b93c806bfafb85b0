#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "newtonmr/baselines.hpp"
#include "newtonmr/newton_mr.hpp"

namespace newtonmr::harness {

/// Invalid configuration, detected before any computation (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Problems the harness can bind by name.
inline constexpr std::string_view kProblemNames[] = {"softmax", "gmm",  "quadratic", "x2y2",
                                                     "x4",      "hinge", "regularized_quartic"};

struct ProblemSpec {
  std::string name = "gmm";
  /// libsvm training data for softmax; synthetic data is generated when empty.
  std::string data_path;
  /// Optional held-out libsvm data for softmax accuracy curves.
  std::string test_path;
  /// Generator sizes: GMM dimension p and points n; softmax features p,
  /// samples n and classes; quadratic A is n x p.
  Index n = 200;
  Index p = 10;
  int num_classes = 3;
  std::uint64_t seed = 1;
};

/// What the performance profile compares per run.
enum class ProfileMetric { grad_norm, objective, estimation_error };
enum class PerformanceMode {
  /// Oracle cost until the metric target is first met (+inf if never).
  cost_to_target,
  /// The final value of the metric itself.
  final_value,
};

std::string_view to_string(ProfileMetric m);
std::string_view to_string(PerformanceMode m);
PerformanceMode performance_mode_from_string(std::string_view s);

struct ProfileSettings {
  std::vector<SolverKind> solvers{SolverKind::newton_mr, SolverKind::newton_cg, SolverKind::lbfgs, SolverKind::nlcg,
                                  SolverKind::gauss_newton};
  std::size_t runs = 20;
  std::uint64_t seed = 1;
  /// Worker threads across runs; each solver run stays single-threaded.
  std::size_t threads = 1;
  /// ||g|| target.
  double grad_target = 1e-8;
  /// f target: f <= f_best + f_rel_tol * max(1, |f_best|), with f_best the
  /// smallest objective seen by any solver in the same run.
  double f_rel_tol = 1e-6;
  /// Estimation error target: err <= (1 + error_rel_tol) * err_best.
  double error_rel_tol = 0.01;
  PerformanceMode performance = PerformanceMode::cost_to_target;
  /// Number of lambda grid points in the emitted profile.
  std::size_t n_lambdas = 200;
};

struct RunConfig {
  ProblemSpec problem;
  SolverKind solver = SolverKind::newton_mr;
  /// Default hyper-parameters; termination fields are taken from `epsilon_g` and
  /// `max_outer_iters` below.
  NewtonMRConfig newton_mr;
  BaselineConfig baseline;
  double epsilon_g = 1e-10;
  std::size_t max_outer_iters = 1000;
  std::string trace_path;
  std::string out_dir;
  ProfileSettings profile;

  /// Copies the termination settings into both solver configs.
  void sync_termination();
  /// Throws ConfigError.
  void validate() const;
};

/// JSON schema (every key optional, unknown keys rejected):
///   {"problem":  {"name", "data", "test_data", "n", "p", "classes", "seed"},
///    "solver":   "newton-mr" | "newton-cg" | "lbfgs" | "nlcg" | "gauss-newton",
///    "newton_mr":{"rho", "theta", "mode": "exact"|"inexact",
///                 "inner_stop": "residual"|"feasibility", "max_linesearch",
///                 "reorthogonalize"},
///    "baseline": {"armijo_c1", "wolfe_c2", "lbfgs_history", "max_linesearch"},
///    "krylov":   {"max_iters", "rel_residual_tol"},
///    "termination": {"epsilon_g", "max_outer_iters", "stall_window"},
///    "output":   {"trace", "dir"},
///    "profile":  {"solvers", "runs", "seed", "threads", "grad_target",
///                 "f_rel_tol", "error_rel_tol", "performance", "n_lambdas"}}
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace newtonmr::harness
