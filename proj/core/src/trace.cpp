#include "newtonmr/trace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace newtonmr {

std::string_view to_string(OptimizerStatus status) {
  switch (status) {
    case OptimizerStatus::grad_tol_reached: return "grad_tol_reached";
    case OptimizerStatus::max_iters: return "max_iters";
    case OptimizerStatus::linesearch_failed: return "linesearch_failed";
    case OptimizerStatus::inner_solver_failed: return "inner_solver_failed";
    case OptimizerStatus::stalled: return "stalled";
  }
  return "unknown";
}

bool is_failure(OptimizerStatus status) {
  return status != OptimizerStatus::grad_tol_reached && status != OptimizerStatus::max_iters;
}

void OuterOptions::validate() const {
  if (!(epsilon_g > 0.0)) throw std::invalid_argument("epsilon_g must be positive");
  if (stall_window < 1) throw std::invalid_argument("stall_window must be >= 1");
}

namespace detail {

TraceRecorder::TraceRecorder(SolverKind kind, const OuterOptions& opts, const CountedOracle& counted)
    : opts_(opts), counted_(counted), start_(std::chrono::steady_clock::now()) {
  trace_.solver = kind;
}

bool TraceRecorder::record(const Vector& x, double f, double grad_norm, double alpha, std::size_t inner_iters,
                           std::size_t inner_products, std::size_t linesearch_iters, bool fallback) {
  IterationRecord rec;
  rec.iter = trace_.records.size();
  rec.f = f;
  rec.grad_norm = grad_norm;
  rec.alpha = alpha;
  rec.inner_iters = inner_iters;
  rec.inner_products = inner_products;
  rec.linesearch_iters = linesearch_iters;
  rec.fallback = fallback;
  rec.cum_oracle_cost = oracle_cost(counted_.counts());
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();

  if (!trace_.records.empty()) {
    const double prev = trace_.records.back().f;
    const double decrease = (prev - f) / std::max(std::abs(prev), 1e-300);
    flat_iters_ = decrease < opts_.stall_rel_decrease ? flat_iters_ + 1 : 0;
  }
  trace_.records.push_back(rec);
  if (opts_.keep_iterates) trace_.iterates.push_back(x);
  if (opts_.on_iterate) opts_.on_iterate(rec.iter, x, rec);

  if (!std::isfinite(f) || !std::isfinite(grad_norm)) {
    trace_.status = OptimizerStatus::linesearch_failed;
    return true;
  }
  if (grad_norm <= opts_.epsilon_g) {
    trace_.status = OptimizerStatus::grad_tol_reached;
    return true;
  }
  if (flat_iters_ >= opts_.stall_window) {
    trace_.status = OptimizerStatus::stalled;
    return true;
  }
  if (rec.iter >= opts_.max_outer_iters) {
    trace_.status = OptimizerStatus::max_iters;
    return true;
  }
  return false;
}

OptimizerTrace TraceRecorder::finish() {
  trace_.counts = counted_.counts();
  return std::move(trace_);
}

}  // namespace detail

}  // namespace newtonmr
