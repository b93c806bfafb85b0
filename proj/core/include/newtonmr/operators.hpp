#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string_view>

#include "newtonmr/types.hpp"

namespace newtonmr {

/// Value, gradient and Hessian-vector oracle of a twice differentiable
/// objective. Implementations are pure: results depend only on the arguments,
/// so concurrent calls with distinct arguments are safe.
class ObjectiveOracle {
public:
  virtual ~ObjectiveOracle() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Vector hess_vec(const Vector& x, const Vector& v) const = 0;

  /// Problems with composite structure f = h(g(x)) may expose the
  /// Gauss-Newton matrix J (grad^2 h) J^T as a matrix-free product.
  virtual bool has_gauss_newton() const { return false; }
  virtual Vector gauss_newton_vec(const Vector& x, const Vector& v) const;
};

/// Snapshot of oracle call counts.
struct OracleCounts {
  std::uint64_t n_value = 0;
  std::uint64_t n_gradient = 0;
  std::uint64_t n_hessvec = 0;

  friend bool operator==(const OracleCounts&, const OracleCounts&) = default;
  friend OracleCounts operator-(const OracleCounts& a, const OracleCounts& b) {
    return {a.n_value - b.n_value, a.n_gradient - b.n_gradient, a.n_hessvec - b.n_hessvec};
  }
};

/// Race-free call counters. Counts are exact once all evaluations finished.
class OracleCounter {
public:
  void add_value() { n_value_.fetch_add(1, std::memory_order_relaxed); }
  void add_gradient() { n_gradient_.fetch_add(1, std::memory_order_relaxed); }
  void add_hessvec() { n_hessvec_.fetch_add(1, std::memory_order_relaxed); }

  OracleCounts snapshot() const {
    return {n_value_.load(std::memory_order_relaxed), n_gradient_.load(std::memory_order_relaxed),
            n_hessvec_.load(std::memory_order_relaxed)};
  }

  void reset() {
    n_value_.store(0);
    n_gradient_.store(0);
    n_hessvec_.store(0);
  }

private:
  std::atomic<std::uint64_t> n_value_{0};
  std::atomic<std::uint64_t> n_gradient_{0};
  std::atomic<std::uint64_t> n_hessvec_{0};
};

/// Forwards every call to `inner` and counts it. Gauss-Newton products are
/// counted as Hessian-vector products; both cost the same in the accounting.
/// The wrapped oracle must outlive this object.
class CountedOracle final : public ObjectiveOracle {
public:
  explicit CountedOracle(const ObjectiveOracle& inner) : inner_(inner) {}

  Index dim() const override { return inner_.dim(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;
  bool has_gauss_newton() const override { return inner_.has_gauss_newton(); }
  Vector gauss_newton_vec(const Vector& x, const Vector& v) const override;

  OracleCounts counts() const { return counter_.snapshot(); }
  void reset() { counter_.reset(); }
  const ObjectiveOracle& inner() const { return inner_; }

private:
  const ObjectiveOracle& inner_;
  mutable OracleCounter counter_;
};

/// Cost of each call in units of function evaluations. A gradient costs one
/// evaluation on top of f and a Hessian-vector product costs two.
struct OracleWeights {
  double value = 1.0;
  double gradient = 1.0;
  double hessvec = 2.0;
};

double oracle_cost(const OracleCounts& counts, const OracleWeights& weights = {});

enum class SolverKind { newton_mr, newton_cg, lbfgs, nlcg, gauss_newton };

std::string_view to_string(SolverKind kind);
SolverKind solver_kind_from_string(std::string_view name);

/// Per-outer-iteration cost of each solver, in function evaluations, given
/// the number of inner-solver operator products and line-search trials.
double iteration_cost(SolverKind kind, std::uint64_t inner_products, std::uint64_t linesearch_trials);

/// Matrix-free symmetric linear map.
struct SymmetricOperator {
  Index dim = 0;
  std::function<Vector(const Vector&)> apply;

  Vector operator()(const Vector& v) const { return apply(v); }
};

SymmetricOperator dense_operator(Matrix a);
SymmetricOperator hessian_operator(const ObjectiveOracle& oracle, Vector x);
SymmetricOperator gauss_newton_operator(const ObjectiveOracle& oracle, Vector x);

/// Materializes the Hessian with dim() Hessian-vector products against the
/// canonical basis and symmetrizes the result.
Matrix dense_hessian(const ObjectiveOracle& oracle, const Vector& x);

}  // namespace newtonmr
