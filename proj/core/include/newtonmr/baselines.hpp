#pragma once

#include <cstddef>
#include <vector>

#include "newtonmr/krylov.hpp"
#include "newtonmr/line_search.hpp"
#include "newtonmr/trace.hpp"

namespace newtonmr {

struct BaselineConfig : OuterOptions {
  double armijo_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  std::size_t max_linesearch = 1000;
  std::size_t lbfgs_history = 20;
  /// Backtracking factor of the Armijo searches (Newton-CG, Gauss-Newton).
  double backtrack_factor = 0.5;
  KrylovConfig krylov;

  void validate() const;
};

/// Inexact Newton with CG inner solves and Armijo backtracking on f. Fails
/// with inner_solver_failed as soon as CG meets non-positive curvature.
OptimizerResult newton_cg_solve(const ObjectiveOracle& oracle, const Vector& x0, const BaselineConfig& cfg);

/// L-BFGS (two-loop recursion) with strong Wolfe steps.
OptimizerResult lbfgs_solve(const ObjectiveOracle& oracle, const Vector& x0, const BaselineConfig& cfg);

/// Nonlinear CG with the hybrid FR-PR coefficient and strong Wolfe steps.
OptimizerResult nlcg_solve(const ObjectiveOracle& oracle, const Vector& x0, const BaselineConfig& cfg);

/// Gauss-Newton: CG on the Gauss-Newton operator, Armijo on f. The oracle
/// must expose gauss_newton_vec.
OptimizerResult gauss_newton_solve(const ObjectiveOracle& oracle, const Vector& x0, const BaselineConfig& cfg);

/// Two-loop recursion: returns -H_k g for the inverse-Hessian approximation
/// built from the stored pairs (oldest first), scaled by
/// gamma = <s, y> / <y, y> of the newest pair.
Vector lbfgs_direction(const std::vector<Vector>& s, const std::vector<Vector>& y, const Vector& g);

/// Curvature pairs of L-BFGS, oldest first, holding at most `capacity`.
class LbfgsMemory {
public:
  explicit LbfgsMemory(std::size_t capacity);

  /// Stores (s, y) unless <s, y> <= 1e-12 ||s|| ||y||, dropping the oldest
  /// pair when full. Returns whether the pair was kept.
  bool update(Vector s, Vector y);
  void clear();
  std::size_t size() const { return s_.size(); }
  const std::vector<Vector>& s() const { return s_; }
  const std::vector<Vector>& y() const { return y_; }
  Vector direction(const Vector& g) const { return lbfgs_direction(s_, y_, g); }

private:
  std::size_t capacity_;
  std::vector<Vector> s_, y_;
};

/// Hybrid coefficient: beta_PR clipped to [-beta_FR, beta_FR].
double fr_pr_beta(const Vector& g_new, const Vector& g_old);

}  // namespace newtonmr
