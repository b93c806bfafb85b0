#pragma once

#include <cstdint>
#include <memory>

#include "newtonmr/operators.hpp"
#include "newtonmr/problems/dataset.hpp"

namespace newtonmr {

/// Unregularized softmax cross-entropy. Class C-1 is the reference class,
/// so x stacks C-1 weight blocks of length p and d = (C-1) p:
///   f(x) = sum_i log(1 + sum_c exp<a_i, x_c>) - sum_c 1[b_i = c] <a_i, x_c>.
/// The loss is a convex function of linear maps, so the Gauss-Newton matrix
/// coincides with the Hessian.
class SoftmaxOracle final : public ObjectiveOracle {
public:
  explicit SoftmaxOracle(std::shared_ptr<const Dataset> data);

  Index dim() const override { return dim_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;
  bool has_gauss_newton() const override { return true; }
  Vector gauss_newton_vec(const Vector& x, const Vector& v) const override { return hess_vec(x, v); }

  const Dataset& data() const { return *data_; }
  int num_classes() const { return data_->num_classes; }

  /// Class probabilities (n x C) at x.
  Matrix probabilities(const Vector& x) const;

private:
  Matrix logits(const Vector& x) const;  // n x (C-1)
  Matrix weights(const Vector& x) const;  // p x (C-1)

  std::shared_ptr<const Dataset> data_;
  Index dim_;
};

/// Predicted class per row: argmax of the logits (with 0 for the reference
/// class); ties go to the lowest class id.
std::vector<int> softmax_predict(const Dataset& data, const Vector& x);

/// Fraction of rows whose predicted class matches the label.
double softmax_accuracy(const Dataset& data, const Vector& x);

/// Gaussian features with labels drawn from a random softmax model, so the
/// classes overlap and the loss has a unique minimizer when n >> (C-1) p.
Dataset make_synthetic_softmax(Index n, Index p, int num_classes, std::uint64_t seed);

}  // namespace newtonmr
