#include "newtonmr/operators.hpp"

#include <stdexcept>
#include <string>

namespace newtonmr {

Vector ObjectiveOracle::gauss_newton_vec(const Vector&, const Vector&) const {
  throw std::logic_error("this objective does not expose a Gauss-Newton operator");
}

double CountedOracle::value(const Vector& x) const {
  counter_.add_value();
  return inner_.value(x);
}

Vector CountedOracle::gradient(const Vector& x) const {
  counter_.add_gradient();
  return inner_.gradient(x);
}

Vector CountedOracle::hess_vec(const Vector& x, const Vector& v) const {
  counter_.add_hessvec();
  return inner_.hess_vec(x, v);
}

Vector CountedOracle::gauss_newton_vec(const Vector& x, const Vector& v) const {
  counter_.add_hessvec();
  return inner_.gauss_newton_vec(x, v);
}

double oracle_cost(const OracleCounts& counts, const OracleWeights& weights) {
  return weights.value * static_cast<double>(counts.n_value) +
         weights.gradient * static_cast<double>(counts.n_gradient) +
         weights.hessvec * static_cast<double>(counts.n_hessvec);
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::newton_mr: return "newton-mr";
    case SolverKind::newton_cg: return "newton-cg";
    case SolverKind::lbfgs: return "lbfgs";
    case SolverKind::nlcg: return "nlcg";
    case SolverKind::gauss_newton: return "gauss-newton";
  }
  return "unknown";
}

SolverKind solver_kind_from_string(std::string_view name) {
  for (auto kind : {SolverKind::newton_mr, SolverKind::newton_cg, SolverKind::lbfgs, SolverKind::nlcg,
                    SolverKind::gauss_newton}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown solver: " + std::string(name));
}

double iteration_cost(SolverKind kind, std::uint64_t inner_products, std::uint64_t linesearch_trials) {
  const auto ns = static_cast<double>(inner_products);
  const auto nl = static_cast<double>(linesearch_trials);
  switch (kind) {
    case SolverKind::newton_mr: return 2.0 + 2.0 * ns + 2.0 * nl;
    case SolverKind::lbfgs:
    case SolverKind::nlcg: return 2.0 + 2.0 * nl;
    case SolverKind::newton_cg:
    case SolverKind::gauss_newton: return 2.0 + 2.0 * ns + nl;
  }
  return 0.0;
}

SymmetricOperator dense_operator(Matrix a) {
  const Index n = a.rows();
  return {n, [a = std::move(a)](const Vector& v) -> Vector { return a * v; }};
}

SymmetricOperator hessian_operator(const ObjectiveOracle& oracle, Vector x) {
  return {oracle.dim(), [&oracle, x = std::move(x)](const Vector& v) { return oracle.hess_vec(x, v); }};
}

SymmetricOperator gauss_newton_operator(const ObjectiveOracle& oracle, Vector x) {
  return {oracle.dim(), [&oracle, x = std::move(x)](const Vector& v) { return oracle.gauss_newton_vec(x, v); }};
}

Matrix dense_hessian(const ObjectiveOracle& oracle, const Vector& x) {
  const Index d = oracle.dim();
  Matrix h(d, d);
  Vector e = Vector::Zero(d);
  for (Index j = 0; j < d; ++j) {
    e[j] = 1.0;
    h.col(j) = oracle.hess_vec(x, e);
    e[j] = 0.0;
  }
  return 0.5 * (h + h.transpose());
}

}  // namespace newtonmr
