#include "newtonmr/problems/gmm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace newtonmr {

double gmm_omega(double t) { return 0.5 * (1.0 + std::tanh(t)); }

double gmm_omega_d1(double t) {
  const double th = std::tanh(t);
  return 0.5 * (1.0 - th * th);
}

double gmm_omega_d2(double t) {
  const double th = std::tanh(t);
  return -th * (1.0 - th * th);
}

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

struct GmmOracle::State {
  Matrix u[2];     // rows u_i = P_j (a_i - x_j)
  Vector r[2];     // responsibilities
  Vector a, b;     // omega' Phi_1 / q and omega' Phi_2 / q
  Vector logq;
  double tanh_x0 = 0.0;
};

GmmOracle::GmmOracle(Matrix points, Matrix precision1, Matrix precision2)
    : points_(std::move(points)), p_(points_.cols()) {
  prec_[0] = std::move(precision1);
  prec_[1] = std::move(precision2);
  for (int j = 0; j < 2; ++j) {
    if (prec_[j].rows() != p_ || prec_[j].cols() != p_) throw std::invalid_argument("GmmOracle: precision size");
    if (!prec_[j].isApprox(prec_[j].transpose(), 1e-12)) throw std::invalid_argument("GmmOracle: precision not symmetric");
    prec_[j] = 0.5 * (prec_[j] + prec_[j].transpose()).eval();
    Eigen::LLT<Matrix> llt(prec_[j]);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("GmmOracle: precision not positive definite");
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    log_norm_[j] = 0.5 * logdet - 0.5 * static_cast<double>(p_) * std::log(2.0 * std::numbers::pi);
  }
}

GmmOracle::State GmmOracle::evaluate(const Vector& x, bool need_derivatives) const {
  if (x.size() != dim()) throw std::invalid_argument("GmmOracle: dimension mismatch");
  State s;
  const double t = x[0];
  s.tanh_x0 = std::tanh(t);
  // omega = sigmoid(2t), so log omega = -softplus(-2t).
  const double log_w[2] = {-softplus(-2.0 * t), -softplus(2.0 * t)};
  Vector logphi[2];
  for (int j = 0; j < 2; ++j) {
    const Matrix diff = points_.rowwise() - x.segment(1 + j * p_, p_).transpose();
    s.u[j] = diff * prec_[j];
    logphi[j] = (log_norm_[j] + log_w[j]) - 0.5 * diff.cwiseProduct(s.u[j]).rowwise().sum().array();
  }
  const Index n = points_.rows();
  s.logq.resize(n);
  s.r[0].resize(n);
  s.r[1].resize(n);
  for (Index i = 0; i < n; ++i) {
    const double m = std::max(logphi[0][i], logphi[1][i]);
    s.logq[i] = m + std::log(std::exp(logphi[0][i] - m) + std::exp(logphi[1][i] - m));
    s.r[0][i] = std::exp(logphi[0][i] - s.logq[i]);
    s.r[1][i] = std::exp(logphi[1][i] - s.logq[i]);
  }
  if (need_derivatives) {
    // omega' Phi_1 / q = 2 (1 - omega) r1 and omega' Phi_2 / q = 2 omega r2.
    const double w = gmm_omega(t);
    s.a = 2.0 * (1.0 - w) * s.r[0];
    s.b = 2.0 * w * s.r[1];
  }
  return s;
}

double GmmOracle::value(const Vector& x) const { return -evaluate(x, false).logq.sum(); }

Vector GmmOracle::gradient(const Vector& x) const {
  const State s = evaluate(x, true);
  Vector g(dim());
  g[0] = -(s.a - s.b).sum();
  g.segment(1, p_) = -s.u[0].transpose() * s.r[0];
  g.segment(1 + p_, p_) = -s.u[1].transpose() * s.r[1];
  return g;
}

Vector GmmOracle::hess_vec(const Vector& x, const Vector& v) const {
  if (v.size() != dim()) throw std::invalid_argument("GmmOracle: dimension mismatch");
  const State s = evaluate(x, true);
  const double v0 = v[0];
  const Vector s1 = s.u[0] * v.segment(1, p_);
  const Vector s2 = s.u[1] * v.segment(1 + p_, p_);
  const Vector g0 = s.a - s.b;
  const Vector dot = g0 * v0 + s.r[0].cwiseProduct(s1) + s.r[1].cwiseProduct(s2);

  // Hessian of log q_i is (Hessian of q_i) / q_i - grad l_i grad l_i^T.
  Vector hv(dim());
  hv[0] = (-2.0 * s.tanh_x0 * g0 * v0 + s.a.cwiseProduct(s1) - s.b.cwiseProduct(s2) - g0.cwiseProduct(dot)).sum();
  hv.segment(1, p_) = s.u[0].transpose() * (s.a * v0 + s.r[0].cwiseProduct(s1 - dot)) -
                      s.r[0].sum() * (prec_[0] * v.segment(1, p_));
  hv.segment(1 + p_, p_) = s.u[1].transpose() * (-s.b * v0 + s.r[1].cwiseProduct(s2 - dot)) -
                           s.r[1].sum() * (prec_[1] * v.segment(1 + p_, p_));
  return -hv;
}

Vector GmmOracle::gauss_newton_vec(const Vector& x, const Vector& v) const {
  if (v.size() != dim()) throw std::invalid_argument("GmmOracle: dimension mismatch");
  const State s = evaluate(x, true);
  const Vector g0 = s.a - s.b;
  const Vector dot =
      g0 * v[0] + s.r[0].cwiseProduct(s.u[0] * v.segment(1, p_)) + s.r[1].cwiseProduct(s.u[1] * v.segment(1 + p_, p_));
  Vector out(dim());
  out[0] = g0.dot(dot);
  out.segment(1, p_) = s.u[0].transpose() * s.r[0].cwiseProduct(dot);
  out.segment(1 + p_, p_) = s.u[1].transpose() * s.r[1].cwiseProduct(dot);
  return out;
}

Vector GroundTruth::stacked() const {
  Vector x(1 + x1.size() + x2.size());
  x << x0, x1, x2;
  return x;
}

GmmData generate_gmm_data(Index p, Index n, std::uint64_t seed) {
  if (p < 1 || n < 1) throw std::invalid_argument("generate_gmm_data: need p >= 1 and n >= 1");
  constexpr double kWeight = 0.3;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  GmmData out;
  out.truth.x0 = std::atanh(2.0 * kWeight - 1.0);
  out.truth.x1.resize(p);
  out.truth.x2.resize(p);
  for (Index j = 0; j < p; ++j) out.truth.x1[j] = unif(rng) - 1.0;
  for (Index j = 0; j < p; ++j) out.truth.x2[j] = unif(rng);

  Vector diag(p);
  for (Index j = 0; j < p; ++j) diag[j] = p == 1 ? 1.0 : 1.0 + 99.0 * static_cast<double>(j) / static_cast<double>(p - 1);

  Matrix sample_map[2];  // covariance square roots Q^T D^{-1/2}
  Matrix* prec[2] = {&out.precision1, &out.precision2};
  Matrix* sigma[2] = {&out.sigma1, &out.sigma2};
  for (int c = 0; c < 2; ++c) {
    Matrix w(p, p);
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < p; ++j) w(i, j) = normal(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(w).householderQ();
    *prec[c] = q.transpose() * diag.asDiagonal() * q;
    *sigma[c] = q.transpose() * diag.cwiseInverse().asDiagonal() * q;
    sample_map[c] = q.transpose() * diag.cwiseSqrt().cwiseInverse().asDiagonal();
  }

  out.points.resize(n, p);
  Vector z(p);
  for (Index i = 0; i < n; ++i) {
    const int c = unif(rng) < kWeight ? 0 : 1;
    out.n_component1 += c == 0;
    for (Index j = 0; j < p; ++j) z[j] = normal(rng);
    const Vector& mean = c == 0 ? out.truth.x1 : out.truth.x2;
    out.points.row(i) = (mean + sample_map[c] * z).transpose();
  }
  return out;
}

double estimation_error(const Vector& est, const GroundTruth& truth) {
  const Index p = truth.x1.size();
  if (est.size() != 1 + 2 * p) throw std::invalid_argument("estimation_error: dimension mismatch");
  if (truth.x0 == 0.0) throw std::invalid_argument("estimation_error: x0* must be nonzero");
  const Vector star = truth.stacked();
  const double e0 = std::abs(est[0] - truth.x0) / std::abs(truth.x0);
  const double e1 = (est.tail(2 * p) - star.tail(2 * p)).norm() / star.tail(2 * p).norm();
  return 0.5 * (e0 + e1);
}

}  // namespace newtonmr
