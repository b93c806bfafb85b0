#include "newtonmr/harness/profile.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "newtonmr/problems/softmax.hpp"

namespace newtonmr::harness {

void ProfileInput::validate() const {
  if (solvers.empty() || costs.rows() == 0) throw std::invalid_argument("ProfileInput: empty input");
  if (costs.cols() != static_cast<Index>(solvers.size()))
    throw std::invalid_argument("ProfileInput: column count differs from solver count");
  for (Index i = 0; i < costs.rows(); ++i)
    for (Index s = 0; s < costs.cols(); ++s)
      if (std::isnan(costs(i, s)) || !(costs(i, s) > 0.0))
        throw std::invalid_argument("ProfileInput: entries must be positive or +inf");
}

ProfileCurves performance_profile(const ProfileInput& input, const std::vector<double>& lambdas) {
  input.validate();
  if (lambdas.empty()) throw std::invalid_argument("performance_profile: no lambdas");
  ProfileCurves out;
  out.solvers = input.solvers;
  out.lambdas = lambdas;
  std::sort(out.lambdas.begin(), out.lambdas.end());
  const Index runs = input.costs.rows();
  const Index ns = input.costs.cols();
  out.fraction = Matrix::Zero(static_cast<Index>(out.lambdas.size()), ns);

  for (Index r = 0; r < runs; ++r) {
    const double best = input.costs.row(r).minCoeff();
    if (!std::isfinite(best)) continue;
    for (Index s = 0; s < ns; ++s) {
      const double c = input.costs(r, s);
      if (!std::isfinite(c)) continue;
      const double ratio = c / best;
      for (std::size_t i = 0; i < out.lambdas.size(); ++i)
        if (ratio <= out.lambdas[i]) out.fraction(static_cast<Index>(i), s) += 1.0;
    }
  }
  out.fraction /= static_cast<double>(runs);
  return out;
}

std::vector<double> profile_lambdas(const ProfileInput& input, std::size_t n) {
  input.validate();
  if (n < 2) throw std::invalid_argument("profile_lambdas: need n >= 2");
  double worst = 1.0;
  for (Index r = 0; r < input.costs.rows(); ++r) {
    const double best = input.costs.row(r).minCoeff();
    if (!std::isfinite(best)) continue;
    for (Index s = 0; s < input.costs.cols(); ++s)
      if (std::isfinite(input.costs(r, s))) worst = std::max(worst, input.costs(r, s) / best);
  }
  const double top = std::max(2.0, 1.05 * worst);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::pow(top, static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = 1.0;
  return out;
}

void write_profile_csv(std::ostream& os, const ProfileCurves& curves) {
  os << "lambda,solver,fraction\n" << std::setprecision(17);
  for (std::size_t s = 0; s < curves.solvers.size(); ++s)
    for (std::size_t i = 0; i < curves.lambdas.size(); ++i)
      os << curves.lambdas[i] << ',' << curves.solvers[s] << ','
         << curves.fraction(static_cast<Index>(i), static_cast<Index>(s)) << '\n';
}

std::vector<std::pair<double, double>> accuracy_curve(const OptimizerTrace& trace, const Dataset& test) {
  if (trace.iterates.size() != trace.records.size())
    throw std::invalid_argument("accuracy_curve: trace does not hold every iterate");
  std::vector<std::pair<double, double>> out;
  out.reserve(trace.records.size());
  for (std::size_t k = 0; k < trace.records.size(); ++k)
    out.emplace_back(trace.records[k].cum_oracle_cost, softmax_accuracy(test, trace.iterates[k]));
  return out;
}

void write_accuracy_csv(std::ostream& os, const std::vector<std::pair<double, double>>& curve) {
  os << "cum_oracle_cost,test_accuracy\n" << std::setprecision(17);
  for (const auto& [cost, acc] : curve) os << cost << ',' << acc << '\n';
}

}  // namespace newtonmr::harness
