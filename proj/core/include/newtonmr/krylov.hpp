#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "newtonmr/operators.hpp"

namespace newtonmr {

struct KrylovConfig {
  std::size_t max_iters = 100;
  double rel_residual_tol = 0.01;
  /// Full reorthogonalization of the Lanczos basis. Costs O(d * iters)
  /// memory; worth it when running to tight tolerances on singular systems.
  bool reorthogonalize = false;
  /// Pivots of the QLP factor at or below pivot_tol times the operator norm
  /// estimate count as zero. Without reorthogonalization, long solves on
  /// singular incompatible systems want a looser value (1e-10) since rounding
  /// in the left QR leaks into the solution; short Newton inner solves want a
  /// tight one so that genuinely small curvature is not discarded.
  double pivot_tol = 1e-14;

  void validate() const;
};

enum class SolverStatus { converged, max_iters, negative_curvature, breakdown, feasible };

std::string_view to_string(SolverStatus status);

struct SolverReport {
  std::size_t iterations = 0;
  /// Operator products performed, including any needed to build the start
  /// vector.
  std::size_t operator_applications = 0;
  double final_rel_residual = 0.0;
  SolverStatus status = SolverStatus::max_iters;
  /// Range-restricted solves: the returned iterate satisfies both
  /// inexactness inequalities.
  bool feasible = false;
  /// Set when the final step dropped a numerically zero pivot, i.e. the
  /// returned iterate is the minimum-length solution on a singular
  /// projected system. In range-restricted solves: a negligible pivot ended
  /// the solve.
  bool rank_deficient = false;
  /// ||op x_t - rhs|| for t = 0, 1, ..., iterations.
  std::vector<double> residual_history;
};

struct KrylovSolution {
  Vector x;
  Vector op_x;  // op applied to x, tracked by recurrence
  SolverReport report;
};

/// Called after every inner iteration with the iterate and op applied to it.
using IterateObserver = std::function<void(const Vector& x, const Vector& op_x)>;

/// MINRES-QLP for symmetric, possibly indefinite or singular systems.
/// Approximates the minimum-length least-squares solution of
/// min ||op x - rhs||. Stops when ||op x - rhs|| <= tol ||rhs||, when the
/// least-squares optimality estimate ||op r|| <= tol ||op|| ||r|| holds, on a
/// Lanczos breakdown, or at max_iters.
KrylovSolution minres_qlp(const SymmetricOperator& op, const Vector& rhs, const KrylovConfig& cfg,
                          const IterateObserver& observe = {});

struct RangeRestrictedConfig {
  double theta = 0.5;
  std::size_t max_iters = 100;
  /// When positive, iterate until ||op p + g|| <= tol ||g|| instead of
  /// stopping at the first feasible iterate.
  double rel_residual_tol = 0.0;
  bool reorthogonalize = false;
  /// Stop once the new diagonal of the triangular factor falls below
  /// pivot_tol times the running ||op|| estimate.
  double pivot_tol = 1e-14;

  void validate() const;
};

struct RangeRestrictedSolution {
  Vector p;
  Vector hp;  // op p
  Vector hg;  // op g, the Krylov start vector
  SolverReport report;
};

/// Inexactness test for a candidate direction:
///   <hp, g> <= -(1 - theta) ||g||^2   and   ||hp|| <= (1 + theta) ||g||.
bool satisfies_inexactness(const Vector& hp, const Vector& g, double theta, double slack = 0.0);

/// Minimum-residual solve of min ||op p + g|| restricted to the Krylov space
/// K_t(op, op g), so every iterate lies in Range(op). Returns the first
/// iterate satisfying the inexactness conditions (or, with a residual
/// tolerance, the first iterate meeting it). When no iterate is feasible the
/// minimum-residual iterate is returned with status max_iters or breakdown.
RangeRestrictedSolution minres_qlp_range_restricted(const SymmetricOperator& op, const Vector& g,
                                                    const RangeRestrictedConfig& cfg,
                                                    const IterateObserver& observe = {});

/// Curvature <d, op d> at or below this multiple of ||d||^2 ends CG.
inline constexpr double kNegativeCurvatureTol = 1e-12;

/// Conjugate gradients on op x = rhs. Terminates with negative_curvature as
/// soon as a search direction with non-positive curvature is met, returning
/// the last iterate.
KrylovSolution cg(const SymmetricOperator& op, const Vector& rhs, const KrylovConfig& cfg);

}  // namespace newtonmr
