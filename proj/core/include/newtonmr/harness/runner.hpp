#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "newtonmr/harness/config.hpp"
#include "newtonmr/harness/profile.hpp"
#include "newtonmr/problems/dataset.hpp"
#include "newtonmr/problems/gmm.hpp"

namespace newtonmr::harness {

/// A problem instance ready to optimize.
struct BoundProblem {
  std::string name;
  std::shared_ptr<const ObjectiveOracle> oracle;
  Vector x0;
  /// GMM only.
  std::optional<GroundTruth> truth;
  /// Softmax only: training and (optional) held-out data.
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> test;
};

/// Builds the oracle and starting point. GMM and softmax start at 0, the
/// quadratic is a Gaussian n x p least-squares problem started at 0, and the
/// remaining test functions use their suite starting points.
BoundProblem bind_problem(const ProblemSpec& spec);

/// Dispatches to the solver named by `kind` using the matching config.
OptimizerResult run_solver(SolverKind kind, const ObjectiveOracle& oracle, const Vector& x0,
                           const NewtonMRConfig& nmr, const BaselineConfig& base);

struct RunOutcome {
  BoundProblem problem;
  OptimizerResult result;
};

/// Validates, binds, runs and (when cfg.trace_path is set) writes the trace.
/// Config problems raise ConfigError before any oracle call.
RunOutcome run_single(const RunConfig& cfg);

/// Columns iter, f, grad_norm, alpha, inner_iters, linesearch_iters,
/// cum_oracle_cost, wall_ms, status, failed. Only the last row carries the
/// status; failed is 1 there when the run failed.
void write_trace_csv(std::ostream& os, const OptimizerTrace& trace);
void write_trace_csv(const std::string& path, const OptimizerTrace& trace);

/// Recomputes every record's cumulative cost from its inner-product and
/// line-search counts with the per-iteration formulas, and checks the
/// raw call counts against the final cost. Comparisons are exact.
bool verify_cost_accounting(const OptimizerTrace& trace);

struct CellSummary {
  std::size_t run = 0;
  SolverKind solver = SolverKind::newton_mr;
  std::uint64_t seed = 0;
  OptimizerStatus status = OptimizerStatus::max_iters;
  std::size_t iterations = 0;
  double final_f = 0.0;
  double final_grad = 0.0;
  /// NaN for problems without a ground truth.
  double final_error = 0.0;
  double total_cost = 0.0;
  bool accounting_exact = false;
  /// Per-metric performance scalar entered into the profile input.
  std::array<double, 3> performance{};
};

struct BatchResult {
  std::vector<CellSummary> cells;  // run-major, solvers in config order
  /// Indexed by ProfileMetric.
  std::array<ProfileInput, 3> inputs;
};

inline constexpr std::array<ProfileMetric, 3> kProfileMetrics{ProfileMetric::grad_norm, ProfileMetric::objective,
                                                              ProfileMetric::estimation_error};

/// Runs cfg.profile.runs repetitions of every solver in cfg.profile.solvers.
/// Run r uses seed cfg.profile.seed + r for fresh problem data. Failing cells
/// are recorded and the batch continues. Results do not depend on the
/// thread count.
BatchResult run_batch(const RunConfig& cfg);

void write_cells_csv(std::ostream& os, const BatchResult& batch);

}  // namespace newtonmr::harness
