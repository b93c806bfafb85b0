#include "newtonmr/problems/test_functions.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace newtonmr {

namespace {

void check_dim(const ObjectiveOracle& o, const Vector& x, const char* who) {
  if (x.size() != o.dim()) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

}  // namespace

double X2Y2::value(const Vector& x) const {
  check_dim(*this, x, "X2Y2");
  return x[0] * x[0] * x[1] * x[1];
}

Vector X2Y2::gradient(const Vector& x) const {
  check_dim(*this, x, "X2Y2");
  Vector g(2);
  g << 2.0 * x[0] * x[1] * x[1], 2.0 * x[0] * x[0] * x[1];
  return g;
}

Vector X2Y2::hess_vec(const Vector& x, const Vector& v) const {
  check_dim(*this, x, "X2Y2");
  const double hxx = 2.0 * x[1] * x[1];
  const double hxy = 4.0 * x[0] * x[1];
  const double hyy = 2.0 * x[0] * x[0];
  Vector out(2);
  out << hxx * v[0] + hxy * v[1], hxy * v[0] + hyy * v[1];
  return out;
}

LeastSquares::LeastSquares(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != b_.size()) throw std::invalid_argument("LeastSquares: rows of A differ from size of b");
}

double LeastSquares::value(const Vector& x) const {
  check_dim(*this, x, "LeastSquares");
  return 0.5 * (a_ * x - b_).squaredNorm();
}

Vector LeastSquares::gradient(const Vector& x) const {
  check_dim(*this, x, "LeastSquares");
  return a_.transpose() * (a_ * x - b_);
}

Vector LeastSquares::hess_vec(const Vector&, const Vector& v) const { return a_.transpose() * (a_ * v); }

SmoothedHinge::SmoothedHinge(Vector a, double b) : a_(std::move(a)), b_(b) {}

double SmoothedHinge::value(const Vector& x) const {
  check_dim(*this, x, "SmoothedHinge");
  const double m = std::max(0.0, b_ * a_.dot(x));
  return 0.5 * m * m;
}

Vector SmoothedHinge::gradient(const Vector& x) const {
  check_dim(*this, x, "SmoothedHinge");
  const double m = std::max(0.0, b_ * a_.dot(x));
  return (m * b_) * a_;
}

Vector SmoothedHinge::hess_vec(const Vector& x, const Vector& v) const {
  check_dim(*this, x, "SmoothedHinge");
  if (b_ * a_.dot(x) <= 0.0) return Vector::Zero(v.size());
  return (b_ * b_ * a_.dot(v)) * a_;
}

double Quartic1D::value(const Vector& x) const {
  check_dim(*this, x, "Quartic1D");
  const double t = x[0] * x[0];
  return t * t;
}

Vector Quartic1D::gradient(const Vector& x) const {
  check_dim(*this, x, "Quartic1D");
  return Vector::Constant(1, 4.0 * x[0] * x[0] * x[0]);
}

Vector Quartic1D::hess_vec(const Vector& x, const Vector& v) const {
  check_dim(*this, x, "Quartic1D");
  return Vector::Constant(1, 12.0 * x[0] * x[0] * v[0]);
}

RegularizedQuartic::RegularizedQuartic(Matrix a, Vector b, double mu) : a_(std::move(a)), b_(std::move(b)), mu_(mu) {
  if (a_.rows() != b_.size()) throw std::invalid_argument("RegularizedQuartic: rows of A differ from size of b");
  if (mu_ < 0.0) throw std::invalid_argument("RegularizedQuartic: mu must be nonnegative");
}

double RegularizedQuartic::value(const Vector& x) const {
  check_dim(*this, x, "RegularizedQuartic");
  const double s = x.squaredNorm();
  return 0.5 * (a_ * x - b_).squaredNorm() + 0.25 * mu_ * s * s;
}

Vector RegularizedQuartic::gradient(const Vector& x) const {
  check_dim(*this, x, "RegularizedQuartic");
  return a_.transpose() * (a_ * x - b_) + mu_ * x.squaredNorm() * x;
}

Vector RegularizedQuartic::hess_vec(const Vector& x, const Vector& v) const {
  check_dim(*this, x, "RegularizedQuartic");
  return a_.transpose() * (a_ * v) + mu_ * (x.squaredNorm() * v + 2.0 * x.dot(v) * x);
}

std::vector<NamedProblem> test_functions(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NamedProblem> out;
  out.push_back({"x2y2", std::make_shared<X2Y2>(), (Vector(2) << 1.0, 2.0).finished()});

  Matrix wide = gaussian_matrix(5, 10, rng);
  Vector b_wide = gaussian_matrix(5, 1, rng);
  out.push_back({"least_squares_wide", std::make_shared<LeastSquares>(wide, b_wide), Vector::Zero(10)});

  Matrix tall = gaussian_matrix(20, 6, rng);
  Vector b_tall = gaussian_matrix(20, 1, rng);
  out.push_back({"least_squares_tall", std::make_shared<LeastSquares>(tall, b_tall), Vector::Zero(6)});

  Vector a_hinge = gaussian_matrix(4, 1, rng);
  out.push_back({"smoothed_hinge", std::make_shared<SmoothedHinge>(a_hinge, 1.5), a_hinge});

  out.push_back({"x4", std::make_shared<Quartic1D>(), Vector::Constant(1, 3.0)});

  Matrix a_reg = gaussian_matrix(8, 8, rng);
  Vector b_reg = gaussian_matrix(8, 1, rng);
  out.push_back({"regularized_quartic", std::make_shared<RegularizedQuartic>(a_reg, b_reg, 0.5), Vector::Zero(8)});
  return out;
}

}  // namespace newtonmr
