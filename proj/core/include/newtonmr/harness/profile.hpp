#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "newtonmr/problems/dataset.hpp"
#include "newtonmr/trace.hpp"

namespace newtonmr::harness {

/// runs x solvers performance matrix (smaller is better); +inf marks a run
/// the solver did not solve.
struct ProfileInput {
  std::vector<std::string> solvers;
  Matrix costs;

  /// Throws std::invalid_argument if empty, mis-sized or containing NaN or
  /// nonpositive entries.
  void validate() const;
};

struct ProfileCurves {
  std::vector<std::string> solvers;
  std::vector<double> lambdas;
  /// fraction(i, s): share of runs with cost(s) <= lambdas[i] * best cost.
  Matrix fraction;
};

/// Rows without any finite entry count as unsolved for every solver.
ProfileCurves performance_profile(const ProfileInput& input, const std::vector<double>& lambdas);

/// n log-spaced factors from 1 to just past the largest finite ratio.
std::vector<double> profile_lambdas(const ProfileInput& input, std::size_t n);

/// CSV with columns lambda, solver, fraction.
void write_profile_csv(std::ostream& os, const ProfileCurves& curves);

/// (cum_oracle_cost, test accuracy) at every stored iterate of a softmax
/// run. Requires the trace to keep iterates.
std::vector<std::pair<double, double>> accuracy_curve(const OptimizerTrace& trace, const Dataset& test);

void write_accuracy_csv(std::ostream& os, const std::vector<std::pair<double, double>>& curve);

}  // namespace newtonmr::harness
