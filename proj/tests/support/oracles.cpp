#include "oracles.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace testsupport {

Vector gaussian_vector(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = n01(rng);
  return v;
}

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n01(rng);
  return m;
}

Matrix random_orthogonal(Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(d, d, rng));
  return qr.householderQ();
}

KnownSpectrum known_spectrum(const Matrix& q, const Vector& lambda) {
  KnownSpectrum out;
  out.q = q;
  out.lambda = lambda;
  Vector inv = Vector::Zero(lambda.size());
  Vector mask = Vector::Zero(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) != 0.0) {
      inv(i) = 1.0 / lambda(i);
      mask(i) = 1.0;
    }
  }
  out.h = q * lambda.asDiagonal() * q.transpose();
  out.h = 0.5 * (out.h + out.h.transpose());
  out.h_pinv = q * inv.asDiagonal() * q.transpose();
  out.range_projector = q * mask.asDiagonal() * q.transpose();
  return out;
}

KnownSpectrum random_symmetric(Index d, Index rank, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Vector lambda = Vector::Zero(d);
  const double a = std::log10(lo), b = std::log10(hi);
  for (Index i = 0; i < rank; ++i) {
    const double m = std::pow(10.0, a + (b - a) * u01(rng));
    lambda(i) = i % 2 ? -m : m;
  }
  return known_spectrum(random_orthogonal(d, rng), lambda);
}

Matrix svd_pinv(const Matrix& a, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = s.size() ? rel_tol * s(0) : 0.0;
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double sigma_max(const Matrix& a) { return Eigen::JacobiSVD<Matrix>(a).singularValues()(0); }

double sigma_min(const Matrix& a) {
  const Vector s = Eigen::JacobiSVD<Matrix>(a).singularValues();
  return s(s.size() - 1);
}

Vector fd_gradient(const newtonmr::ObjectiveOracle& f, const Vector& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f.value(xp) - f.value(xm)) / (2.0 * h);
  }
  return g;
}

Vector fd_hess_vec(const newtonmr::ObjectiveOracle& f, const Vector& x, const Vector& v) {
  const double h = 1e-6 * (1.0 + x.norm());
  const Vector u = v / v.norm();
  return (f.gradient(x + h * u) - f.gradient(x - h * u)) / (2.0 * h) * v.norm();
}

double rel_error(const Vector& a, const Vector& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace testsupport
