#include "newtonmr/problems/softmax.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace newtonmr {

namespace {

// Row-wise log(1 + sum_c exp(z_c)), shifted by the row maximum (including
// the reference logit 0).
Vector log_partition(const Matrix& z) {
  Vector out(z.rows());
  for (Index i = 0; i < z.rows(); ++i) {
    const double m = std::max(0.0, z.row(i).maxCoeff());
    out[i] = m + std::log(std::exp(-m) + (z.row(i).array() - m).exp().sum());
  }
  return out;
}

}  // namespace

SoftmaxOracle::SoftmaxOracle(std::shared_ptr<const Dataset> data) : data_(std::move(data)) {
  if (!data_) throw std::invalid_argument("SoftmaxOracle: null dataset");
  data_->validate();
  if (data_->num_classes < 2) throw std::invalid_argument("SoftmaxOracle: need at least two classes");
  dim_ = static_cast<Index>(data_->num_classes - 1) * data_->p();
}

Matrix SoftmaxOracle::weights(const Vector& x) const {
  if (x.size() != dim_) throw std::invalid_argument("SoftmaxOracle: dimension mismatch");
  return Eigen::Map<const Matrix>(x.data(), data_->p(), data_->num_classes - 1);
}

Matrix SoftmaxOracle::logits(const Vector& x) const { return data_->times(weights(x)); }

double SoftmaxOracle::value(const Vector& x) const {
  const Matrix z = logits(x);
  double f = log_partition(z).sum();
  const int ref = data_->num_classes - 1;
  for (Index i = 0; i < z.rows(); ++i) {
    const int b = data_->labels[static_cast<std::size_t>(i)];
    if (b != ref) f -= z(i, b);
  }
  return f;
}

Vector SoftmaxOracle::gradient(const Vector& x) const {
  Matrix s = logits(x);
  const Vector lse = log_partition(s);
  s = (s.colwise() - lse).array().exp().matrix();
  const int ref = data_->num_classes - 1;
  for (Index i = 0; i < s.rows(); ++i) {
    const int b = data_->labels[static_cast<std::size_t>(i)];
    if (b != ref) s(i, b) -= 1.0;
  }
  const Matrix g = data_->transpose_times(s);
  return Eigen::Map<const Vector>(g.data(), g.size());
}

Vector SoftmaxOracle::hess_vec(const Vector& x, const Vector& v) const {
  if (v.size() != dim_) throw std::invalid_argument("SoftmaxOracle: dimension mismatch");
  Matrix s = logits(x);
  const Vector lse = log_partition(s);
  s = (s.colwise() - lse).array().exp().matrix();
  const Matrix zv = data_->times(Eigen::Map<const Matrix>(v.data(), data_->p(), data_->num_classes - 1));
  const Vector t = s.cwiseProduct(zv).rowwise().sum();
  const Matrix m = s.cwiseProduct(zv.colwise() - t);
  const Matrix hv = data_->transpose_times(m);
  return Eigen::Map<const Vector>(hv.data(), hv.size());
}

Matrix SoftmaxOracle::probabilities(const Vector& x) const {
  const Matrix z = logits(x);
  const Vector lse = log_partition(z);
  Matrix prob(z.rows(), data_->num_classes);
  prob.leftCols(z.cols()) = (z.colwise() - lse).array().exp().matrix();
  prob.col(z.cols()) = (-lse).array().exp().matrix();
  return prob;
}

std::vector<int> softmax_predict(const Dataset& data, const Vector& x) {
  const Index k = data.num_classes - 1;
  if (x.size() != k * data.p()) throw std::invalid_argument("softmax_predict: dimension mismatch");
  const Matrix z = data.times(Eigen::Map<const Matrix>(x.data(), data.p(), k));
  std::vector<int> pred(static_cast<std::size_t>(z.rows()));
  for (Index i = 0; i < z.rows(); ++i) {
    int best = static_cast<int>(k);
    double best_z = 0.0;
    for (Index c = 0; c < k; ++c) {
      if (z(i, c) > best_z || (z(i, c) == best_z && c < best)) {
        best = static_cast<int>(c);
        best_z = z(i, c);
      }
    }
    pred[static_cast<std::size_t>(i)] = best;
  }
  return pred;
}

double softmax_accuracy(const Dataset& data, const Vector& x) {
  const std::vector<int> pred = softmax_predict(data, x);
  if (pred.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

Dataset make_synthetic_softmax(Index n, Index p, int num_classes, std::uint64_t seed) {
  if (n < 1 || p < 1 || num_classes < 2) throw std::invalid_argument("make_synthetic_softmax: bad sizes");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix a(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) a(i, j) = normal(rng);
  Matrix w(p, num_classes);
  for (Index j = 0; j < p; ++j)
    for (Index c = 0; c < num_classes; ++c) w(j, c) = normal(rng) / std::sqrt(static_cast<double>(p));
  const Matrix z = a * w;

  std::vector<int> labels(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    const double m = z.row(i).maxCoeff();
    const Eigen::ArrayXd e = (z.row(i).array() - m).exp();
    double u = unif(rng) * e.sum();
    int c = 0;
    while (c < num_classes - 1 && u > e[c]) u -= e[c++];
    labels[static_cast<std::size_t>(i)] = c;
  }
  return make_dataset(std::move(a), std::move(labels), num_classes);
}

}  // namespace newtonmr
