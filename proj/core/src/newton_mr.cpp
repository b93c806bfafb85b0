#include "newtonmr/newton_mr.hpp"

#include <stdexcept>
#include <string>

#include "newtonmr/dense.hpp"

namespace newtonmr {

void NewtonMRConfig::validate() const {
  OuterOptions::validate();
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("NewtonMRConfig: rho must lie in (0, 1)");
  if (!(theta >= 0.0 && theta < 1.0)) throw std::invalid_argument("NewtonMRConfig: theta must lie in [0, 1)");
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw std::invalid_argument("NewtonMRConfig: alpha0 must lie in (0, 1]");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw std::invalid_argument("NewtonMRConfig: backtrack_factor must lie in (0, 1)");
  }
  if (max_linesearch < 1) throw std::invalid_argument("NewtonMRConfig: max_linesearch must be >= 1");
  krylov.validate();
}

Vector exact_step(const Matrix& h, const Vector& g) {
  if (h.rows() != h.cols() || h.rows() != g.size()) throw std::invalid_argument("exact_step: dimension mismatch");
  return -dense::pinv_apply(h, g);
}

namespace {

struct Direction {
  Vector p;
  Vector hg;
  std::size_t inner_iters = 0;
  std::size_t products = 0;
  bool fallback = false;
  bool ok = false;
};

Direction exact_direction(const ObjectiveOracle& oracle, const Vector& x, const Vector& g) {
  Direction dir;
  const Matrix h = dense_hessian(oracle, x);
  dir.products = static_cast<std::size_t>(x.size());
  dir.p = exact_step(h, g);
  dir.hg = h * g;
  dir.ok = true;
  return dir;
}

Direction inexact_direction(const ObjectiveOracle& oracle, const Vector& x, const Vector& g,
                            const NewtonMRConfig& cfg) {
  Direction dir;
  const SymmetricOperator h = hessian_operator(oracle, x);
  RangeRestrictedConfig rr;
  rr.theta = cfg.theta;
  rr.max_iters = cfg.krylov.max_iters;
  rr.rel_residual_tol = cfg.inner_stop == InnerStop::residual ? cfg.krylov.rel_residual_tol : 0.0;
  rr.reorthogonalize = cfg.reorthogonalize || cfg.krylov.reorthogonalize;
  rr.pivot_tol = cfg.krylov.pivot_tol;
  RangeRestrictedSolution sol = minres_qlp_range_restricted(h, g, rr);
  dir.hg = std::move(sol.hg);
  dir.inner_iters = sol.report.iterations;
  dir.products = sol.report.operator_applications;
  if (sol.report.feasible) {
    dir.p = std::move(sol.p);
    dir.ok = true;
    return dir;
  }

  KrylovConfig plain = cfg.krylov;
  plain.reorthogonalize = rr.reorthogonalize;
  KrylovSolution fb = minres_qlp(h, -g, plain);
  dir.inner_iters += fb.report.iterations;
  dir.products += fb.report.operator_applications;
  dir.fallback = true;
  dir.p = std::move(fb.x);
  dir.ok = dir.p.dot(dir.hg) < 0.0;
  return dir;
}

}  // namespace

OptimizerResult newton_mr_solve(const ObjectiveOracle& oracle, const Vector& x0, const NewtonMRConfig& cfg) {
  cfg.validate();
  if (x0.size() != oracle.dim()) throw std::invalid_argument("newton_mr_solve: x0 dimension mismatch");
  if (cfg.mode == NewtonMRMode::exact && static_cast<std::size_t>(x0.size()) > cfg.exact_max_dim) {
    throw std::invalid_argument("newton_mr_solve: exact mode limited to dimension " +
                                std::to_string(cfg.exact_max_dim));
  }

  CountedOracle counted(oracle);
  detail::TraceRecorder recorder(SolverKind::newton_mr, cfg, counted);
  Vector x = x0;
  double alpha = 0.0;
  Direction last;
  std::size_t trials = 0;
  while (true) {
    const double f = counted.value(x);
    const Vector g = counted.gradient(x);
    if (recorder.record(x, f, g.norm(), alpha, last.inner_iters, last.products, trials, last.fallback)) break;

    last = cfg.mode == NewtonMRMode::exact ? exact_direction(counted, x, g) : inexact_direction(counted, x, g, cfg);
    trials = 0;
    if (cfg.on_direction) cfg.on_direction(x, g, last.p, last.fallback);
    if (!last.ok) {
      recorder.fail(OptimizerStatus::inner_solver_failed);
      break;
    }
    const LineSearchResult ls = linesearch_grad_armijo(counted, x, g, last.p, last.hg, cfg.rho, cfg.alpha0,
                                                       cfg.backtrack_factor, cfg.max_linesearch);
    trials = ls.trials;
    if (!ls.success) {
      recorder.fail(OptimizerStatus::linesearch_failed);
      break;
    }
    alpha = ls.alpha;
    x += alpha * last.p;
  }
  return {x, recorder.finish()};
}

}  // namespace newtonmr
