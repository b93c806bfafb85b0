#include "newtonmr/baselines.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace newtonmr {

void BaselineConfig::validate() const {
  OuterOptions::validate();
  if (!(0.0 < armijo_c1 && armijo_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
    throw std::invalid_argument("BaselineConfig: need 0 < armijo_c1 < wolfe_c2 < 1");
  }
  if (max_linesearch < 1) throw std::invalid_argument("BaselineConfig: max_linesearch must be >= 1");
  if (lbfgs_history < 1) throw std::invalid_argument("BaselineConfig: lbfgs_history must be >= 1");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw std::invalid_argument("BaselineConfig: backtrack_factor must lie in (0, 1)");
  }
  krylov.validate();
}

namespace {

void check_start(const ObjectiveOracle& oracle, const Vector& x0, const char* who) {
  if (x0.size() != oracle.dim()) throw std::invalid_argument(std::string(who) + ": x0 dimension mismatch");
}

// Newton-CG and Gauss-Newton differ only in the operator handed to CG.
template <class MakeOperator>
OptimizerResult truncated_newton(SolverKind kind, const ObjectiveOracle& oracle, const Vector& x0,
                                 const BaselineConfig& cfg, MakeOperator make_operator) {
  CountedOracle counted(oracle);
  detail::TraceRecorder recorder(kind, cfg, counted);
  Vector x = x0;
  double alpha = 0.0;
  std::size_t inner_iters = 0, products = 0, trials = 0;
  while (true) {
    const double f = counted.value(x);
    const Vector g = counted.gradient(x);
    if (recorder.record(x, f, g.norm(), alpha, inner_iters, products, trials)) break;

    const KrylovSolution sol = cg(make_operator(counted, x), -g, cfg.krylov);
    inner_iters = sol.report.iterations;
    products = sol.report.operator_applications;
    trials = 0;
    if (sol.report.status == SolverStatus::negative_curvature || !(sol.x.dot(g) < 0.0)) {
      recorder.fail(OptimizerStatus::inner_solver_failed);
      break;
    }
    const LineSearchResult ls = linesearch_armijo(counted, x, f, g, sol.x, cfg.armijo_c1, 1.0, cfg.backtrack_factor,
                                                  cfg.max_linesearch);
    trials = ls.trials;
    if (!ls.success) {
      recorder.fail(OptimizerStatus::linesearch_failed);
      break;
    }
    alpha = ls.alpha;
    x += alpha * sol.x;
  }
  return {x, recorder.finish()};
}

}  // namespace

OptimizerResult newton_cg_solve(const ObjectiveOracle& oracle, const Vector& x0, const BaselineConfig& cfg) {
  cfg.validate();
  check_start(oracle, x0, "newton_cg_solve");
  return truncated_newton(SolverKind::newton_cg, oracle, x0, cfg,
                          [](const ObjectiveOracle& o, const Vector& x) { return hessian_operator(o, x); });
}

OptimizerResult gauss_newton_solve(const ObjectiveOracle& oracle, const Vector& x0, const BaselineConfig& cfg) {
  cfg.validate();
  check_start(oracle, x0, "gauss_newton_solve");
  if (!oracle.has_gauss_newton()) throw std::invalid_argument("gauss_newton_solve: oracle has no Gauss-Newton operator");
  return truncated_newton(SolverKind::gauss_newton, oracle, x0, cfg,
                          [](const ObjectiveOracle& o, const Vector& x) { return gauss_newton_operator(o, x); });
}

Vector lbfgs_direction(const std::vector<Vector>& s, const std::vector<Vector>& y, const Vector& g) {
  const std::size_t m = s.size();
  Vector q = g;
  std::vector<double> a(m), rho(m);
  for (std::size_t i = m; i-- > 0;) {
    rho[i] = 1.0 / y[i].dot(s[i]);
    a[i] = rho[i] * s[i].dot(q);
    q -= a[i] * y[i];
  }
  if (m > 0) q *= s[m - 1].dot(y[m - 1]) / y[m - 1].squaredNorm();
  for (std::size_t i = 0; i < m; ++i) {
    const double b = rho[i] * y[i].dot(q);
    q += (a[i] - b) * s[i];
  }
  return -q;
}

LbfgsMemory::LbfgsMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw std::invalid_argument("LbfgsMemory: capacity must be >= 1");
}

bool LbfgsMemory::update(Vector s, Vector y) {
  if (!(s.dot(y) > 1e-12 * s.norm() * y.norm())) return false;
  if (s_.size() == capacity_) {
    s_.erase(s_.begin());
    y_.erase(y_.begin());
  }
  s_.push_back(std::move(s));
  y_.push_back(std::move(y));
  return true;
}

void LbfgsMemory::clear() {
  s_.clear();
  y_.clear();
}

OptimizerResult lbfgs_solve(const ObjectiveOracle& oracle, const Vector& x0, const BaselineConfig& cfg) {
  cfg.validate();
  check_start(oracle, x0, "lbfgs_solve");
  CountedOracle counted(oracle);
  detail::TraceRecorder recorder(SolverKind::lbfgs, cfg, counted);

  LbfgsMemory memory(cfg.lbfgs_history);
  Vector x = x0;
  Vector x_prev, g_prev;
  double alpha = 0.0;
  std::size_t trials = 0;
  while (true) {
    const double f = counted.value(x);
    const Vector g = counted.gradient(x);
    if (recorder.record(x, f, g.norm(), alpha, 0, 0, trials)) break;

    if (x_prev.size() > 0) memory.update(x - x_prev, g - g_prev);
    Vector p = memory.direction(g);
    if (!(p.dot(g) < 0.0)) {
      // Stale curvature information: restart from steepest descent.
      memory.clear();
      p = -g;
    }
    const double alpha0 = memory.size() == 0 ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    const LineSearchResult ls =
        wolfe_linesearch(counted, x, f, g, p, cfg.armijo_c1, cfg.wolfe_c2, alpha0, cfg.max_linesearch);
    trials = ls.trials;
    if (!ls.success) {
      recorder.fail(OptimizerStatus::linesearch_failed);
      break;
    }
    alpha = ls.alpha;
    x_prev = x;
    g_prev = g;
    x += alpha * p;
  }
  return {x, recorder.finish()};
}

double fr_pr_beta(const Vector& g_new, const Vector& g_old) {
  const double denom = g_old.squaredNorm();
  const double fr = g_new.squaredNorm() / denom;
  const double pr = g_new.dot(g_new - g_old) / denom;
  return std::clamp(pr, -fr, fr);
}

OptimizerResult nlcg_solve(const ObjectiveOracle& oracle, const Vector& x0, const BaselineConfig& cfg) {
  cfg.validate();
  check_start(oracle, x0, "nlcg_solve");
  CountedOracle counted(oracle);
  detail::TraceRecorder recorder(SolverKind::nlcg, cfg, counted);

  Vector x = x0;
  Vector p, g_prev;
  double alpha = 0.0;
  double prev_slope = 0.0;
  std::size_t trials = 0;
  while (true) {
    const double f = counted.value(x);
    const Vector g = counted.gradient(x);
    if (recorder.record(x, f, g.norm(), alpha, 0, 0, trials)) break;

    const bool first = p.size() == 0;
    if (first) {
      p = -g;
    } else {
      p = -g + fr_pr_beta(g, g_prev) * p;
      if (!(p.dot(g) < 0.0)) p = -g;
    }
    const double slope = p.dot(g);
    const double alpha0 = first ? 1.0 : alpha * prev_slope / slope;
    const LineSearchResult ls =
        wolfe_linesearch(counted, x, f, g, p, cfg.armijo_c1, cfg.wolfe_c2, alpha0, cfg.max_linesearch);
    trials = ls.trials;
    if (!ls.success) {
      recorder.fail(OptimizerStatus::linesearch_failed);
      break;
    }
    alpha = ls.alpha;
    prev_slope = slope;
    g_prev = g;
    x += alpha * p;
  }
  return {x, recorder.finish()};
}

}  // namespace newtonmr
