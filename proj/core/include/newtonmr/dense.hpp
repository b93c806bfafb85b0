#pragma once

#include "newtonmr/types.hpp"

// Small-dense symmetric linear algebra used by exact Newton-MR steps and the
// assumption diagnostics. Not intended for large problems.

namespace newtonmr::dense {

/// Eigenvalues of magnitude at or below this fraction of the largest are
/// treated as zero.
inline constexpr double kRankTolerance = 1e-12;

/// Orthonormal basis of Range(h) and the matching nonzero eigenvalues.
struct SymmetricRange {
  Matrix basis;        // d x r
  Vector eigenvalues;  // r
};

SymmetricRange symmetric_range(const Matrix& h, double rank_tol = kRankTolerance);

/// Moore-Penrose pseudo-inverse of a symmetric matrix applied to `v`.
Vector pinv_apply(const Matrix& h, const Vector& v, double rank_tol = kRankTolerance);

/// Orthogonal projection of `v` onto Range(h).
Vector range_projection(const Matrix& h, const Vector& v, double rank_tol = kRankTolerance);

void require_symmetric(const Matrix& h, const char* what);

}  // namespace newtonmr::dense
