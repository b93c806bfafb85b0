#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "newtonmr/operators.hpp"

namespace newtonmr {

enum class OptimizerStatus { grad_tol_reached, max_iters, linesearch_failed, inner_solver_failed, stalled };

std::string_view to_string(OptimizerStatus status);

/// Anything other than reaching the gradient tolerance or the iteration cap.
bool is_failure(OptimizerStatus status);

/// Row k describes the iterate x_k: its objective value and gradient norm,
/// together with the step that produced it (zeros for k = 0). The cumulative
/// cost includes evaluating f and grad f at x_k.
struct IterationRecord {
  std::size_t iter = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double alpha = 0.0;
  std::size_t inner_iters = 0;
  /// Operator products spent by the inner solver for this step.
  std::size_t inner_products = 0;
  std::size_t linesearch_iters = 0;
  /// Newton-MR only: the direction came from the plain MINRES-QLP fallback.
  bool fallback = false;
  double cum_oracle_cost = 0.0;
  double wall_ms = 0.0;
};

struct OptimizerTrace {
  SolverKind solver = SolverKind::newton_mr;
  OptimizerStatus status = OptimizerStatus::max_iters;
  std::vector<IterationRecord> records;
  /// Iterates x_0, x_1, ... when requested through OuterOptions.
  std::vector<Vector> iterates;
  OracleCounts counts;
};

struct OptimizerResult {
  Vector x;
  OptimizerTrace trace;
};

/// Called once per iterate, after its record has been appended.
using IterateHook = std::function<void(std::size_t k, const Vector& x, const IterationRecord& record)>;

/// Termination and bookkeeping shared by every outer loop.
struct OuterOptions {
  double epsilon_g = 1e-10;
  std::size_t max_outer_iters = 1000;
  /// A run is declared stalled after this many consecutive iterations whose
  /// relative objective decrease stays below stall_rel_decrease.
  std::size_t stall_window = 50;
  double stall_rel_decrease = 1e-16;
  bool keep_iterates = false;
  IterateHook on_iterate;

  void validate() const;
};

namespace detail {

// Shared trace bookkeeping for the outer loops.
class TraceRecorder {
public:
  TraceRecorder(SolverKind kind, const OuterOptions& opts, const CountedOracle& counted);

  /// Records x_k with f and grad norm already evaluated. Returns true when
  /// the loop should stop (status set).
  bool record(const Vector& x, double f, double grad_norm, double alpha, std::size_t inner_iters,
              std::size_t inner_products, std::size_t linesearch_iters, bool fallback = false);

  void fail(OptimizerStatus status) { trace_.status = status; }
  OptimizerTrace finish();

private:
  const OuterOptions& opts_;
  const CountedOracle& counted_;
  OptimizerTrace trace_;
  std::chrono::steady_clock::time_point start_;
  std::size_t flat_iters_ = 0;
};

}  // namespace detail

}  // namespace newtonmr
