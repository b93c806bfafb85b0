#include "newtonmr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace newtonmr {

namespace {

void require_small(Index d, const char* who) {
  if (d > kDiagnosticsMaxDim) {
    throw std::invalid_argument(std::string(who) + ": dense diagnostics are limited to d <= " +
                                std::to_string(kDiagnosticsMaxDim));
  }
}

Vector random_unit(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector u(d);
  do {
    for (Index i = 0; i < d; ++i) u[i] = normal(rng);
  } while (u.norm() == 0.0);
  return u.normalized();
}

// Uniform in the ball of radius r about c.
Vector random_in_ball(const Vector& c, double r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vector u = random_unit(c.size(), rng);
  return c + (r * std::pow(unif(rng), 1.0 / static_cast<double>(c.size()))) * u;
}

double rel_error(const Vector& approx, const Vector& exact) {
  const double scale = std::max(approx.norm(), exact.norm());
  return scale == 0.0 ? 0.0 : (approx - exact).norm() / scale;
}

}  // namespace

double nullspace_residual(const Matrix& h, const Vector& g, double rank_tol) {
  dense::require_symmetric(h, "nullspace_residual");
  require_small(h.rows(), "nullspace_residual");
  if (g.size() != h.rows()) throw std::invalid_argument("nullspace_residual: dimension mismatch");
  const double gn = g.norm();
  if (gn == 0.0) return 0.0;
  return (g - dense::range_projection(h, g, rank_tol)).norm() / gn;
}

RegularityEstimate pseudo_regularity_estimate(const std::vector<Matrix>& h_samples, double rank_tol) {
  RegularityEstimate out;
  out.gamma = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < h_samples.size(); ++i) {
    const Matrix& h = h_samples[i];
    dense::require_symmetric(h, "pseudo_regularity_estimate");
    require_small(h.rows(), "pseudo_regularity_estimate");
    const dense::SymmetricRange range = dense::symmetric_range(h, rank_tol);
    if (range.eigenvalues.size() == 0) {
      ++out.n_excluded;
      out.warnings.push_back("sample " + std::to_string(i) + " has a zero Hessian; excluded");
      continue;
    }
    any = true;
    out.gamma = std::min(out.gamma, range.eigenvalues.cwiseAbs().minCoeff());
  }
  if (!any) out.gamma = std::numeric_limits<double>::quiet_NaN();
  return out;
}

double smoothness_lower_bound(double beta, const Vector& hg, const Vector& g) {
  const double gn = g.norm();
  if (gn == 0.0) return 0.0;
  return std::pow(2.0 * beta / (beta + 1.0), beta) * std::pow(hg.norm(), beta + 1.0) / std::pow(gn, 2.0 * beta);
}

MoralSmoothnessFit moral_smoothness_fit(const ObjectiveOracle& oracle, const Vector& x0,
                                        const MoralSmoothnessOptions& opts) {
  if (x0.size() != oracle.dim()) throw std::invalid_argument("moral_smoothness_fit: dimension mismatch");
  if (opts.n_bases == 0 || opts.ladder_length < 2) throw std::invalid_argument("moral_smoothness_fit: too few samples");
  if (!(opts.min_scale > 0.0) || !(opts.max_scale > opts.min_scale))
    throw std::invalid_argument("moral_smoothness_fit: need 0 < min_scale < max_scale");

  std::mt19937_64 rng(opts.seed);
  const double scale = 1.0 + x0.norm();
  const double radius = opts.sample_radius.value_or(scale);
  const double g0 = oracle.gradient(x0).norm();
  auto in_sublevel = [&](const Vector& g) { return g.norm() <= g0; };

  std::vector<double> dists(opts.ladder_length);
  for (std::size_t j = 0; j < opts.ladder_length; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(opts.ladder_length - 1);
    dists[j] = scale * opts.min_scale * std::pow(opts.max_scale / opts.min_scale, t);
  }

  struct Pair {
    std::size_t base;
    double dist;
    double r;
  };
  std::vector<Pair> pairs;
  std::vector<std::pair<Vector, Vector>> base_hg_g;
  MoralSmoothnessFit fit;

  std::size_t draws = 0;
  while (base_hg_g.size() < opts.n_bases && draws < opts.max_draws) {
    ++draws;
    const Vector x = base_hg_g.empty() && draws == 1 ? x0 : random_in_ball(x0, radius, rng);
    const Vector gx = oracle.gradient(x);
    if (!in_sublevel(gx)) continue;
    const Vector hgx = oracle.hess_vec(x, gx);
    const Vector u = random_unit(x.size(), rng);
    const std::size_t base = base_hg_g.size();
    base_hg_g.emplace_back(hgx, gx);
    for (double d : dists) {
      const Vector y = x + d * u;
      const Vector gy = oracle.gradient(y);
      if (!in_sublevel(gy)) continue;
      const double r = (oracle.hess_vec(y, gy) - hgx).norm();
      pairs.push_back({base, d, r});
    }
  }
  if (base_hg_g.size() < opts.n_bases)
    throw std::runtime_error("moral_smoothness_fit: could not sample the sublevel set");

  fit.n_pairs = pairs.size();
  // Within-ladder least squares on (log d, log r) over the positive pairs.
  std::vector<double> sum_ld(base_hg_g.size(), 0.0), sum_lr(base_hg_g.size(), 0.0);
  std::vector<std::size_t> count(base_hg_g.size(), 0);
  for (const Pair& p : pairs) {
    if (p.r > 0.0) {
      sum_ld[p.base] += std::log(p.dist);
      sum_lr[p.base] += std::log(p.r);
      ++count[p.base];
    } else {
      ++fit.n_zero_pairs;
    }
  }
  double sxx = 0.0, sxy = 0.0;
  for (const Pair& p : pairs) {
    if (p.r <= 0.0 || count[p.base] < 2) continue;
    const double n = static_cast<double>(count[p.base]);
    const double dx = std::log(p.dist) - sum_ld[p.base] / n;
    const double dy = std::log(p.r) - sum_lr[p.base] / n;
    sxx += dx * dx;
    sxy += dx * dy;
  }
  if (sxx == 0.0) return fit;  // no exponent identifiable; L stays 0

  const double beta = sxy / sxx;
  fit.beta = beta;
  for (const Pair& p : pairs) fit.L = std::max(fit.L, p.r / std::pow(p.dist, beta));
  if (beta > 0.0) {
    for (const auto& [hg, g] : base_hg_g) fit.L_lower_bound = std::max(fit.L_lower_bound, smoothness_lower_bound(beta, hg, g));
    fit.L_consistent = fit.L >= fit.L_lower_bound * (1.0 - 1e-8);
  }
  return fit;
}

GplResult gpl_check(const ObjectiveOracle& oracle, double f_star, double eta, double mu,
                    const std::vector<Vector>& samples) {
  if (!(eta > 1.0) || !(mu > 0.0)) throw std::invalid_argument("gpl_check: need eta > 1 and mu > 0");
  GplResult out;
  for (const Vector& x : samples) {
    const double lhs = oracle.value(x) - f_star;
    const double rhs = std::pow(std::pow(oracle.gradient(x).norm(), eta) / mu, 1.0 / (eta - 1.0));
    const double gap = lhs - rhs;
    out.worst_gap = std::max(out.worst_gap, gap);
    if (!(gap <= kGplTolerance)) out.holds = false;
    ++out.n_points;
  }
  return out;
}

DerivativeReport derivative_check(const ObjectiveOracle& oracle, const std::vector<Vector>& points,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DerivativeReport out;
  const Index d = oracle.dim();
  for (const Vector& x : points) {
    if (x.size() != d) throw std::invalid_argument("derivative_check: dimension mismatch");
    const double h = 1e-6 * (1.0 + x.norm());
    const Vector g = oracle.gradient(x);
    Vector g_fd(d);
    Vector xp = x, xm = x;
    for (Index i = 0; i < d; ++i) {
      xp[i] = x[i] + h;
      xm[i] = x[i] - h;
      g_fd[i] = (oracle.value(xp) - oracle.value(xm)) / (2.0 * h);
      xp[i] = xm[i] = x[i];
    }
    const Vector v = random_unit(d, rng);
    const Vector hv_fd = (oracle.gradient(x + h * v) - oracle.gradient(x - h * v)) / (2.0 * h);
    DerivativeCheckPoint pt{rel_error(g_fd, g), rel_error(hv_fd, oracle.hess_vec(x, v))};
    out.worst_gradient = std::max(out.worst_gradient, pt.gradient_rel_error);
    out.worst_hessvec = std::max(out.worst_hessvec, pt.hessvec_rel_error);
    if (!(pt.gradient_rel_error <= kDerivativeTolerance) || !(pt.hessvec_rel_error <= kDerivativeTolerance))
      out.passed = false;
    out.points.push_back(pt);
  }
  return out;
}

namespace {

template <class T>
nlohmann::json opt_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(*v)) return nullptr;
  }
  return *v;
}

template <class T>
std::string opt_text(const std::optional<T>& v) {
  if (!v) return "undefined";
  std::ostringstream os;
  if constexpr (std::is_same_v<T, bool>) {
    os << (*v ? "true" : "false");
  } else {
    os << std::setprecision(17) << *v;
  }
  return os.str();
}

}  // namespace

std::string AssumptionReport::to_json() const {
  nlohmann::json j;
  j["problem"] = problem;
  j["dim"] = dim;
  j["nu_lower_bound"] = opt_json(nu_lower_bound);
  j["gamma_estimate"] = opt_json(gamma_estimate);
  j["gamma_excluded"] = gamma_excluded;
  j["beta_fit"] = opt_json(beta_fit);
  j["L_fit"] = opt_json(L_fit);
  j["L_lower_bound"] = opt_json(L_lower_bound);
  j["gpl"] = {{"holds", opt_json(gpl_holds)}, {"eta", eta}, {"mu", mu}};
  j["derivatives"] = {{"passed", opt_json(derivatives_passed)},
                      {"worst_gradient_rel_error", worst_gradient_error},
                      {"worst_hessvec_rel_error", worst_hessvec_error}};
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

std::string AssumptionReport::to_key_value() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "problem = " << problem << "\n";
  os << "dim = " << dim << "\n";
  os << "nu_lower_bound = " << opt_text(nu_lower_bound) << "\n";
  os << "gamma_estimate = " << opt_text(gamma_estimate) << "\n";
  os << "gamma_excluded = " << gamma_excluded << "\n";
  os << "beta_fit = " << opt_text(beta_fit) << "\n";
  os << "L_fit = " << opt_text(L_fit) << "\n";
  os << "L_lower_bound = " << opt_text(L_lower_bound) << "\n";
  os << "gpl_holds = " << opt_text(gpl_holds) << "\n";
  os << "gpl_eta = " << eta << "\n";
  os << "gpl_mu = " << mu << "\n";
  os << "derivatives_passed = " << opt_text(derivatives_passed) << "\n";
  os << "worst_gradient_rel_error = " << worst_gradient_error << "\n";
  os << "worst_hessvec_rel_error = " << worst_hessvec_error << "\n";
  for (const std::string& w : warnings) os << "warning = " << w << "\n";
  return os.str();
}

AssumptionReport diagnose(const std::string& name, const ObjectiveOracle& oracle, const Vector& x0,
                          const DiagnoseOptions& opts) {
  if (x0.size() != oracle.dim()) throw std::invalid_argument("diagnose: dimension mismatch");
  require_small(oracle.dim(), "diagnose");
  AssumptionReport rep;
  rep.problem = name;
  rep.dim = oracle.dim();
  rep.eta = opts.eta;
  rep.mu = opts.mu;

  std::mt19937_64 rng(opts.seed);
  std::vector<Vector> points{x0};
  for (std::size_t i = 0; i < opts.n_samples; ++i) points.push_back(random_in_ball(x0, opts.sample_radius, rng));

  const DerivativeReport deriv = derivative_check(oracle, points, opts.seed);
  rep.derivatives_passed = deriv.passed;
  rep.worst_gradient_error = deriv.worst_gradient;
  rep.worst_hessvec_error = deriv.worst_hessvec;

  std::vector<Matrix> hs;
  double nu = 1.0;
  for (const Vector& x : points) {
    hs.push_back(dense_hessian(oracle, x));
    const double res = nullspace_residual(hs.back(), oracle.gradient(x));
    nu = std::min(nu, 1.0 - res * res);
  }
  rep.nu_lower_bound = nu;

  const RegularityEstimate reg = pseudo_regularity_estimate(hs);
  if (std::isfinite(reg.gamma)) rep.gamma_estimate = reg.gamma;
  rep.gamma_excluded = reg.n_excluded;
  rep.warnings = reg.warnings;

  MoralSmoothnessOptions ms = opts.smoothness;
  ms.seed = opts.seed;
  const MoralSmoothnessFit fit = moral_smoothness_fit(oracle, x0, ms);
  rep.beta_fit = fit.beta;
  rep.L_fit = fit.L;
  if (fit.beta) {
    rep.L_lower_bound = fit.L_lower_bound;
    if (!fit.L_consistent) rep.warnings.push_back("L_fit is below its lower bound at a sampled point");
  } else {
    rep.warnings.push_back("every sampled r vanished; beta is undefined");
  }

  if (opts.f_star) rep.gpl_holds = gpl_check(oracle, *opts.f_star, opts.eta, opts.mu, points).holds;
  return rep;
}

}  // namespace newtonmr
