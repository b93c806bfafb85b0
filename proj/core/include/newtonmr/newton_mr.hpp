#pragma once

#include <cstddef>
#include <functional>

#include "newtonmr/krylov.hpp"
#include "newtonmr/line_search.hpp"
#include "newtonmr/trace.hpp"

namespace newtonmr {

enum class NewtonMRMode { exact, inexact };

/// How the range-restricted inner solve decides it is done.
enum class InnerStop {
  /// Iterate until ||H p + g|| <= krylov.rel_residual_tol ||g|| (or the cap).
  residual,
  /// Return the first iterate satisfying the inexactness conditions for theta.
  feasibility,
};

/// Called with every direction before its line search: the iterate, its
/// gradient, the direction and whether it came from the plain MINRES-QLP
/// fallback.
using DirectionHook = std::function<void(const Vector& x, const Vector& g, const Vector& p, bool fallback)>;

struct NewtonMRConfig : OuterOptions {
  double rho = 1e-4;
  double theta = 0.5;
  std::size_t max_linesearch = 1000;
  double alpha0 = 1.0;
  double backtrack_factor = 0.5;
  NewtonMRMode mode = NewtonMRMode::inexact;
  InnerStop inner_stop = InnerStop::residual;
  KrylovConfig krylov;
  bool reorthogonalize = false;
  /// Exact mode materializes the Hessian; refuse beyond this dimension.
  std::size_t exact_max_dim = 2000;
  DirectionHook on_direction;

  void validate() const;
};

/// p = -H^+ g by symmetric eigendecomposition, dropping eigenvalues with
/// |lambda| <= 1e-12 max |lambda|.
Vector exact_step(const Matrix& h, const Vector& g);

OptimizerResult newton_mr_solve(const ObjectiveOracle& oracle, const Vector& x0, const NewtonMRConfig& cfg);

}  // namespace newtonmr
