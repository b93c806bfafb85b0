#pragma once

#include <cstdint>
#include <memory>

#include "newtonmr/operators.hpp"

namespace newtonmr {

/// Mixing weight omega(t) = (1 + tanh t) / 2 and its first two derivatives.
double gmm_omega(double t);
double gmm_omega_d1(double t);
double gmm_omega_d2(double t);

/// Negative log-likelihood of a two-component Gaussian mixture with known
/// covariances, in x = (x0, x1, x2) with d = 2p + 1:
///   f(x) = -sum_i log(omega(x0) N(a_i; x1, S1) + (1 - omega(x0)) N(a_i; x2, S2)).
/// Gauss-Newton uses h(z) = -sum log z_i over the per-point mixture
/// densities, giving sum_i grad l_i grad l_i^T with l_i = log q_i.
class GmmOracle final : public ObjectiveOracle {
public:
  /// points is n x p; precision1/2 are the inverse covariances (SPD).
  GmmOracle(Matrix points, Matrix precision1, Matrix precision2);

  Index dim() const override { return 2 * p_ + 1; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;
  bool has_gauss_newton() const override { return true; }
  Vector gauss_newton_vec(const Vector& x, const Vector& v) const override;

  Index p() const { return p_; }
  Index n() const { return points_.rows(); }

private:
  struct State;
  State evaluate(const Vector& x, bool need_derivatives) const;

  Matrix points_;
  Matrix prec_[2];
  double log_norm_[2];  // log normalizing constants of the two densities
  Index p_;
};

struct GroundTruth {
  double x0 = 0.0;
  Vector x1;
  Vector x2;

  Vector stacked() const;  // (x0, x1, x2)
};

struct GmmData {
  Matrix points;  // n x p
  GroundTruth truth;
  Matrix sigma1, sigma2;
  Matrix precision1, precision2;
  /// Number of points drawn from the first component.
  Index n_component1 = 0;
};

/// Means x1* ~ U[-1,0]^p and x2* ~ U[0,1]^p; omega(x0*) = 0.3; precisions
/// Q^T D Q with Q from the QR of a standard normal matrix and D equidistant
/// on [1, 100]. Each point comes from component 1 with probability 0.3.
GmmData generate_gmm_data(Index p, Index n, std::uint64_t seed);

/// Mean of |x0 - x0*| / |x0*| and ||(x1, x2) - (x1*, x2*)|| / ||(x1*, x2*)||.
double estimation_error(const Vector& est, const GroundTruth& truth);

}  // namespace newtonmr
