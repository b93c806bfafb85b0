#pragma once

#include <cstddef>

#include "newtonmr/operators.hpp"

namespace newtonmr {

struct LineSearchResult {
  double alpha = 0.0;
  std::size_t trials = 0;
  bool success = false;
};

/// Backtracking on the squared gradient norm: accepts the first
/// alpha in {alpha0, alpha0 c, alpha0 c^2, ...} with
///   ||grad f(x + alpha p)||^2 <= ||g||^2 + 2 rho alpha <p, hg>,
/// where g = grad f(x) and hg = H(x) g. Each trial evaluates f and grad f at
/// the trial point; non-finite values reject the trial.
LineSearchResult linesearch_grad_armijo(const ObjectiveOracle& oracle, const Vector& x, const Vector& g,
                                        const Vector& p, const Vector& hg, double rho, double alpha0,
                                        double backtrack_factor, std::size_t max_trials);

/// Backtracking Armijo on f. Each trial evaluates f only.
/// Requires <g, p> < 0.
LineSearchResult linesearch_armijo(const ObjectiveOracle& oracle, const Vector& x, double f0, const Vector& g,
                                   const Vector& p, double c1, double alpha0, double backtrack_factor,
                                   std::size_t max_trials);

/// Strong Wolfe line search (bracketing then zoom with safeguarded cubic
/// interpolation). Each trial evaluates f and grad f.
/// Throws std::invalid_argument unless <g, p> < 0.
LineSearchResult wolfe_linesearch(const ObjectiveOracle& oracle, const Vector& x, double f0, const Vector& g,
                                  const Vector& p, double c1, double c2, double alpha0, std::size_t max_trials);

}  // namespace newtonmr
