#include "newtonmr/dense.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace newtonmr::dense {

void require_symmetric(const Matrix& h, const char* what) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square");
  }
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument(std::string(what) + ": matrix must be symmetric");
  }
}

SymmetricRange symmetric_range(const Matrix& h, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("symmetric_range: eigendecomposition failed");
  }
  const Vector& lambda = eig.eigenvalues();
  const double lmax = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
  const double cut = rank_tol * lmax;

  Index rank = 0;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda[i]) > cut) ++rank;
  }
  SymmetricRange out{Matrix(h.rows(), rank), Vector(rank)};
  Index j = 0;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda[i]) > cut) {
      out.basis.col(j) = eig.eigenvectors().col(i);
      out.eigenvalues[j] = lambda[i];
      ++j;
    }
  }
  return out;
}

Vector pinv_apply(const Matrix& h, const Vector& v, double rank_tol) {
  const SymmetricRange range = symmetric_range(h, rank_tol);
  const Vector coeff = range.basis.transpose() * v;
  return range.basis * coeff.cwiseQuotient(range.eigenvalues);
}

Vector range_projection(const Matrix& h, const Vector& v, double rank_tol) {
  const SymmetricRange range = symmetric_range(h, rank_tol);
  return range.basis * (range.basis.transpose() * v);
}

}  // namespace newtonmr::dense
