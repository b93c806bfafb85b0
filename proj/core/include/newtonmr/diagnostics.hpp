#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "newtonmr/dense.hpp"
#include "newtonmr/operators.hpp"

// Empirical checks of the structural assumptions behind Newton-MR. These are
// dense verification tools for small problems (d <= 500), not certificates.

namespace newtonmr {

inline constexpr Index kDiagnosticsMaxDim = 500;

/// ||(I - H H^+) g|| / ||g||, i.e. sqrt(1 - nu_x) at a point. Zero for g = 0.
double nullspace_residual(const Matrix& h, const Vector& g, double rank_tol = dense::kRankTolerance);

struct RegularityEstimate {
  /// Smallest nonzero |eigenvalue| over the admitted samples; NaN if none.
  double gamma = 0.0;
  std::size_t n_excluded = 0;
  std::vector<std::string> warnings;
};

/// Samples with no nonzero eigenvalue are excluded and reported.
RegularityEstimate pseudo_regularity_estimate(const std::vector<Matrix>& h_samples,
                                              double rank_tol = dense::kRankTolerance);

struct MoralSmoothnessOptions {
  std::size_t n_bases = 20;
  /// Pair distances per base point, log-spaced over
  /// [min_scale, max_scale] * (1 + ||x0||).
  std::size_t ladder_length = 12;
  double min_scale = 1e-4;
  double max_scale = 1.0;
  /// Base points are drawn uniformly from the ball of this radius about x0
  /// (default 1 + ||x0||) and kept if they lie in the gradient sublevel set.
  std::optional<double> sample_radius;
  std::size_t max_draws = 100000;
  std::uint64_t seed = 1;
};

struct MoralSmoothnessFit {
  /// Empty when every sampled r vanished (no exponent to fit).
  std::optional<double> beta;
  double L = 0.0;
  std::size_t n_pairs = 0;
  std::size_t n_zero_pairs = 0;
  /// Largest lower bound on L(x0) over the sampled points (for
  /// beta_fit); 0 when beta is undefined.
  double L_lower_bound = 0.0;
  bool L_consistent = true;
};

/// Samples pairs (x, y) of the sublevel set {||g|| <= ||g(x0)||}, computes
/// r = ||H(y)g(y) - H(x)g(x)||, fits log r = beta log||y - x|| + c_x by least
/// squares with one intercept per base point, then L = max r / ||y - x||^beta.
MoralSmoothnessFit moral_smoothness_fit(const ObjectiveOracle& oracle, const Vector& x0,
                                        const MoralSmoothnessOptions& opts = {});

/// Necessary lower bound: L(x0) >= (2 beta / (beta + 1))^beta ||H g||^(beta + 1) / ||g||^(2 beta).
double smoothness_lower_bound(double beta, const Vector& hg, const Vector& g);

struct GplResult {
  bool holds = true;
  /// max over samples of (f - f*) - (||g||^eta / mu)^(1 / (eta - 1)).
  double worst_gap = -std::numeric_limits<double>::infinity();
  std::size_t n_points = 0;
};

inline constexpr double kGplTolerance = 1e-10;

/// f(x) - f* <= (||g(x)||^eta / mu)^(1 / (eta - 1)) at every sample, up to
/// kGplTolerance absolute.
GplResult gpl_check(const ObjectiveOracle& oracle, double f_star, double eta, double mu,
                    const std::vector<Vector>& samples);

struct DerivativeCheckPoint {
  double gradient_rel_error = 0.0;
  double hessvec_rel_error = 0.0;
};

struct DerivativeReport {
  std::vector<DerivativeCheckPoint> points;
  double worst_gradient = 0.0;
  double worst_hessvec = 0.0;
  bool passed = true;
};

inline constexpr double kDerivativeTolerance = 1e-5;

/// Central differences with step 1e-6 (1 + ||x||): the full gradient, and
/// the gradient along one random unit direction per point for H v.
DerivativeReport derivative_check(const ObjectiveOracle& oracle, const std::vector<Vector>& points,
                                  std::uint64_t seed = 1);

struct AssumptionReport {
  std::string problem;
  Index dim = 0;
  /// min over samples of 1 - nullspace_residual^2.
  std::optional<double> nu_lower_bound;
  std::optional<double> gamma_estimate;
  std::size_t gamma_excluded = 0;
  std::optional<double> beta_fit;
  std::optional<double> L_fit;
  std::optional<double> L_lower_bound;
  std::optional<bool> gpl_holds;
  double eta = 0.0;
  double mu = 0.0;
  std::optional<bool> derivatives_passed;
  double worst_gradient_error = 0.0;
  double worst_hessvec_error = 0.0;
  std::vector<std::string> warnings;

  std::string to_json() const;
  /// One "key = value" line per field.
  std::string to_key_value() const;
};

struct DiagnoseOptions {
  std::size_t n_samples = 10;
  double sample_radius = 1.0;
  std::uint64_t seed = 1;
  MoralSmoothnessOptions smoothness;
  /// GPL is only checked when the optimal value is known.
  std::optional<double> f_star;
  double eta = 4.0;
  double mu = 256.0;
};

/// Runs every diagnostic at points sampled uniformly in the ball of radius
/// sample_radius about x0 (and at x0 itself).
AssumptionReport diagnose(const std::string& name, const ObjectiveOracle& oracle, const Vector& x0,
                          const DiagnoseOptions& opts = {});

}  // namespace newtonmr
