// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Time limits are part of each criterion.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>

#include "newtonmr/baselines.hpp"
#include "newtonmr/diagnostics.hpp"
#include "newtonmr/harness/runner.hpp"
#include "newtonmr/krylov.hpp"
#include "newtonmr/newton_mr.hpp"
#include "newtonmr/problems/gmm.hpp"
#include "newtonmr/problems/softmax.hpp"
#include "newtonmr/problems/test_functions.hpp"
#include "oracles.hpp"

using namespace newtonmr;
using testsupport::KnownSpectrum;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

template <class... T>
std::string fmt(const char* f, T... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_s;
  const bool ok = v.pass && in_time;
  failures += !ok;
  std::printf("criterion %2d %s  %s | %s | %.2f s (limit %.0f s%s)\n", id, ok ? "PASS" : "FAIL", title,
              v.detail.c_str(), secs, limit_s, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

// Random symmetric systems with a known pseudo-inverse: d in [3, 50],
// ranks cycling through d, d - 1 and ceil(d / 2), eigenvalue magnitudes
// log-uniform in [1e-2, 10] with mixed signs.
struct System {
  KnownSpectrum k;
  Vector b;
  bool compatible;
};

System make_system(int trial, std::mt19937_64& rng) {
  const Index d = 3 + (trial * 17) % 48;
  const Index ranks[3] = {d, d - 1, (d + 1) / 2};
  System s{testsupport::random_symmetric(d, ranks[trial % 3], 1e-2, 10.0, rng), {}, trial % 2 == 0};
  s.b = testsupport::gaussian_vector(d, rng);
  if (s.compatible) s.b = s.k.h * s.b;
  return s;
}

Verdict min_length() {
  std::mt19937_64 rng(101);
  double worst_x = 0, worst_xn = 0, worst_r = 0;
  int compatible = 0, singular = 0;
  for (int t = 0; t < 100; ++t) {
    const System s = make_system(t, rng);
    const Index d = s.b.size();
    compatible += s.compatible;
    singular += s.k.lambda.cwiseAbs().minCoeff() == 0.0;
    KrylovConfig c;
    c.max_iters = static_cast<std::size_t>(10 * d);
    c.rel_residual_tol = 1e-14;
    c.reorthogonalize = true;
    const Vector x = minres_qlp(dense_operator(s.k.h), s.b, c).x;
    const Vector ref = s.k.h_pinv * s.b;
    worst_x = std::max(worst_x, (x - ref).norm() / ref.norm());
    worst_xn = std::max(worst_xn, std::abs(x.norm() - ref.norm()) / ref.norm());
    worst_r = std::max(worst_r, std::abs((s.k.h * x - s.b).norm() - (s.k.h * ref - s.b).norm()) / s.b.norm());
  }
  const bool pass = worst_x <= 1e-8 && worst_xn <= 1e-8 && worst_r <= 1e-8;
  return {pass, fmt("100 systems (%d compatible, %d singular): worst rel err solution %.2e, |x| %.2e, "
                    "residual norm %.2e (tol 1e-8)",
                    compatible, singular, worst_x, worst_xn, worst_r)};
}

Verdict residual_and_descent() {
  std::mt19937_64 rng(202);
  std::size_t iterates = 0, bad_mono = 0, bad_descent = 0, bad_history = 0;
  double worst_descent = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 50; ++t) {
    System s = make_system(t, rng);
    const Vector g = testsupport::gaussian_vector(s.b.size(), rng);
    const Matrix& h = s.k.h;
    const Vector hg = h * g;
    RangeRestrictedConfig c;
    c.theta = 0.5;
    c.rel_residual_tol = 1e-12;
    c.max_iters = static_cast<std::size_t>(g.size());
    double prev = g.norm();
    const RangeRestrictedSolution sol = minres_qlp_range_restricted(dense_operator(h), g, c, [&](const Vector& p, const Vector&) {
      ++iterates;
      const Vector hp = h * p;
      const double res = (hp + g).norm();
      bad_mono += res > prev + 1e-12 * g.norm();
      prev = res;
      const double gap = p.dot(hg) + 0.5 * hp.squaredNorm();
      worst_descent = std::max(worst_descent, gap);
      bad_descent += gap > 1e-12;
    });
    const auto& hist = sol.report.residual_history;
    for (std::size_t i = 1; i < hist.size(); ++i) bad_history += hist[i] > hist[i - 1] + 1e-12 * g.norm();
  }
  return {bad_mono + bad_descent + bad_history == 0,
          fmt("50 solves, %zu iterates: residual increases %zu (recorded %zu), descent violations %zu, "
              "max <p,Hg> + |Hp|^2/2 = %.2e",
              iterates, bad_mono, bad_history, bad_descent, worst_descent)};
}

struct SuiteProblem {
  std::string name;
  std::shared_ptr<const ObjectiveOracle> oracle;
  Vector x0;
};

std::vector<SuiteProblem> full_suite() {
  std::vector<SuiteProblem> out;
  for (NamedProblem& p : test_functions(1)) out.push_back({p.name, p.oracle, p.x0});
  auto sm = std::make_shared<SoftmaxOracle>(std::make_shared<const Dataset>(make_synthetic_softmax(100, 5, 3, 1)));
  out.push_back({"softmax", sm, Vector::Zero(sm->dim())});
  for (std::uint64_t seed : {1, 2, 3}) {
    const GmmData d = generate_gmm_data(10, 200, seed);
    auto gmm = std::make_shared<GmmOracle>(d.points, d.precision1, d.precision2);
    out.push_back({"gmm" + std::to_string(seed), gmm, Vector::Zero(gmm->dim())});
  }
  return out;
}

Verdict grad_monotonicity() {
  std::size_t steps = 0, violations = 0, runs = 0;
  for (const SuiteProblem& p : full_suite()) {
    for (int variant = 0; variant < 3; ++variant) {
      NewtonMRConfig c;
      if (variant == 1) c.inner_stop = InnerStop::feasibility;
      if (variant == 2) {
        if (p.x0.size() > 50) continue;
        c.mode = NewtonMRMode::exact;
      }
      const OptimizerTrace t = newton_mr_solve(*p.oracle, p.x0, c).trace;
      ++runs;
      for (std::size_t k = 1; k < t.records.size(); ++k) {
        ++steps;
        violations += t.records[k].grad_norm > t.records[k - 1].grad_norm;
      }
    }
  }
  return {violations == 0 && steps > 0,
          fmt("%zu runs (inexact residual/feasibility stops, exact mode), %zu accepted steps, %zu increases", runs,
              steps, violations)};
}

Verdict exact_mode_rate() {
  std::mt19937_64 rng(404);
  const double rho = 1e-4;
  std::size_t steps = 0, violations = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 20; ++t) {
    const Matrix a = testsupport::gaussian_matrix(20, 40, rng);
    LeastSquares f(a, testsupport::gaussian_vector(20, rng));
    const double kappa = testsupport::sigma_min(a) / testsupport::sigma_max(a);
    const double bound = 1.0 - 4.0 * rho * (1.0 - rho) * std::pow(kappa, 4) + 1e-10;
    NewtonMRConfig c;
    c.mode = NewtonMRMode::exact;
    c.rho = rho;
    const OptimizerTrace tr = newton_mr_solve(f, testsupport::gaussian_vector(40, rng), c).trace;
    for (std::size_t k = 1; k < tr.records.size(); ++k) {
      ++steps;
      const double ratio = std::pow(tr.records[k].grad_norm / tr.records[k - 1].grad_norm, 2);
      worst_margin = std::max(worst_margin, ratio - bound);
      violations += ratio > bound;
    }
  }
  return {violations == 0 && steps > 0,
          fmt("20 problems, %zu exact steps, %zu above the bound, max ratio - bound = %.2e", steps, violations,
              worst_margin)};
}

Verdict inexactness() {
  const double theta = 0.5;
  std::size_t dirs = 0, fallbacks = 0, bad = 0;
  double worst_a = -std::numeric_limits<double>::infinity(), worst_b = worst_a;
  for (const SuiteProblem& p : full_suite()) {
    for (InnerStop stop : {InnerStop::feasibility, InnerStop::residual}) {
      NewtonMRConfig c;
      c.theta = theta;
      c.inner_stop = stop;
      c.on_direction = [&](const Vector& x, const Vector& g, const Vector& d, bool fallback) {
        ++dirs;
        fallbacks += fallback;
        const Vector hp = p.oracle->hess_vec(x, d);  // fresh product
        const double a = hp.dot(g) + (1.0 - theta) * g.squaredNorm();
        const double b = hp.norm() - (1.0 + theta) * g.norm();
        worst_a = std::max(worst_a, a);
        worst_b = std::max(worst_b, b);
        bad += a > 1e-12 || b > 1e-12;
      };
      newton_mr_solve(*p.oracle, p.x0, c);
    }
  }
  return {bad == 0 && dirs > 0,
          fmt("%zu directions (%zu from the fallback), %zu violations; max slack used: (10a) %.2e, (10b) %.2e", dirs,
              fallbacks, bad, worst_a, worst_b)};
}

Verdict invex() {
  X2Y2 f;
  const Vector x0 = (Vector(2) << 1, 2).finished();
  NewtonMRConfig c;
  c.theta = 0.5;
  const OptimizerResult mr = newton_mr_solve(f, x0, c);
  const double gn = f.gradient(mr.x).norm(), fv = f.value(mr.x);

  BaselineConfig b;
  b.keep_iterates = true;
  const OptimizerResult ncg = newton_cg_solve(f, x0, b);
  // Confirm the failure is negative curvature at the last iterate.
  const Vector& xf = ncg.trace.iterates.back();
  const SolverStatus inner = cg(hessian_operator(f, xf), -f.gradient(xf), b.krylov).report.status;
  const bool pass = mr.trace.status == OptimizerStatus::grad_tol_reached && gn <= 1e-10 && fv <= 1e-12 &&
                    ncg.trace.status == OptimizerStatus::inner_solver_failed &&
                    inner == SolverStatus::negative_curvature;
  return {pass, fmt("Newton-MR %s after %zu iters, |g| = %.2e, f = %.2e; Newton-CG %s at iter %zu (CG: %s)",
                    std::string(to_string(mr.trace.status)).c_str(), mr.trace.records.size() - 1, gn, fv,
                    std::string(to_string(ncg.trace.status)).c_str(), ncg.trace.records.size() - 1,
                    std::string(to_string(inner)).c_str())};
}

Verdict softmax_nu() {
  std::mt19937_64 rng(707);
  double worst = 0.0, worst_ref = 0.0;
  int tall = 0;
  for (int t = 0; t < 30; ++t) {
    const Index p = 3 + t % 4;
    const int classes = 2 + t % 3;
    const Index d = (classes - 1) * p;
    const Index n = t % 2 == 0 ? 2 * d : std::max<Index>(2, d / 2);
    tall += n >= d;
    SoftmaxOracle f(std::make_shared<const Dataset>(make_synthetic_softmax(n, p, classes, 1000 + t)));
    const Vector x = 0.5 * testsupport::gaussian_vector(d, rng);
    const Matrix h = dense_hessian(f, x);
    const Vector g = f.gradient(x);
    worst = std::max(worst, nullspace_residual(h, g));
    // Independent projector from a Jacobi SVD.
    worst_ref = std::max(worst_ref, (g - h * (testsupport::svd_pinv(h) * g)).norm() / g.norm());
  }
  return {worst <= 1e-8 && worst_ref <= 1e-8,
          fmt("30 instances (%d with n >= d): max nullspace_residual %.2e, SVD reference %.2e (tol 1e-8)", tall,
              worst, worst_ref)};
}

Verdict smoothness() {
  std::string detail;
  bool pass = true;
  for (const NamedProblem& p : test_functions(1)) {
    if (const auto* ls = dynamic_cast<const LeastSquares*>(p.oracle.get())) {
      const double bound = std::pow(testsupport::sigma_max(ls->a()), 4);
      const MoralSmoothnessFit fit = moral_smoothness_fit(*ls, p.x0);
      const bool ok = fit.beta && *fit.beta >= 0.95 && *fit.beta <= 1.05 && fit.L <= 1.05 * bound;
      pass = pass && ok;
      detail += fmt("%s beta %.4f L %.1f <= 1.05*%.1f; ", p.name.c_str(), fit.beta.value_or(NAN), fit.L, bound);
    } else if (const auto* hinge = dynamic_cast<const SmoothedHinge*>(p.oracle.get())) {
      const double bound = std::pow(hinge->b(), 4) * std::pow(hinge->a().norm(), 4);
      const MoralSmoothnessFit fit = moral_smoothness_fit(*hinge, p.x0);
      const bool ok = fit.L <= 1.05 * bound;
      pass = pass && ok;
      detail += fmt("hinge beta %.4f L %.1f <= 1.05*%.1f", fit.beta.value_or(NAN), fit.L, bound);
    }
  }
  return {pass, detail};
}

Verdict gpl() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<Vector> samples;
  for (int i = 0; i < 10000; ++i) samples.push_back(Vector::Constant(1, u(rng)));
  Quartic1D f;
  const GplResult r = gpl_check(f, 0.0, 4.0, 256.0, samples);
  return {r.holds && r.n_points == 10000,
          fmt("x^4, eta 4, mu 256, %zu points in [-10, 10]: max gap %.2e", r.n_points, r.worst_gap)};
}

bool nondecreasing_and_bounded(const harness::ProfileCurves& c) {
  for (Index s = 0; s < c.fraction.cols(); ++s) {
    if (c.fraction.col(s).minCoeff() < 0.0 || c.fraction.col(s).maxCoeff() > 1.0) return false;
    for (Index i = 1; i < c.fraction.rows(); ++i)
      if (c.fraction(i, s) < c.fraction(i - 1, s)) return false;
  }
  return true;
}

Verdict gmm_study() {
  harness::RunConfig cfg;
  cfg.problem.name = "gmm";
  cfg.problem.p = 10;
  cfg.problem.n = 200;
  cfg.profile.runs = 20;
  const harness::BatchResult batch = harness::run_batch(cfg);
  const std::size_t expected = 20 * cfg.profile.solvers.size();

  bool profiles_ok = true;
  std::size_t rows = 0;
  for (const harness::ProfileInput& in : batch.inputs) {
    in.validate();
    const harness::ProfileCurves c = harness::performance_profile(in, harness::profile_lambdas(in, 200));
    std::ostringstream os;
    harness::write_profile_csv(os, c);
    const std::string text = os.str();
    rows += static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
    profiles_ok = profiles_ok && nondecreasing_and_bounded(c);
  }
  std::size_t mr_runs = 0, mr_ok = 0, exact = 0, failed = 0;
  for (const harness::CellSummary& c : batch.cells) {
    exact += c.accounting_exact;
    failed += is_failure(c.status);
    if (c.solver == SolverKind::newton_mr) {
      ++mr_runs;
      mr_ok += c.final_grad <= 1e-8;
    }
  }
  const double rate = static_cast<double>(mr_ok) / static_cast<double>(mr_runs);
  const bool pass = batch.cells.size() == expected && profiles_ok && rows == 3 * 200 * cfg.profile.solvers.size() &&
                    rate >= 0.9 && exact == batch.cells.size();
  return {pass, fmt("%zu/%zu cells (%zu failed runs), 3 profiles %s, Newton-MR |g| <= 1e-8 in %zu/%zu, "
                    "exact cost accounting %zu/%zu",
                    batch.cells.size(), expected, failed, profiles_ok ? "valid" : "INVALID", mr_ok, mr_runs, exact,
                    batch.cells.size())};
}

// Every solver runs with its defaults. The f-based line searches of the
// baselines stop at the rounding floor of f (about 250 here), well above
// epsilon_g = 1e-10, so a run counts as converged once its final |g| is at
// most 1e-6; f - f* <= |g|^2 / (2 lambda_min) then sits far below the 1e-6
// agreement tolerance.
Verdict cross_solver() {
  auto data = std::make_shared<const Dataset>(make_synthetic_softmax(300, 5, 3, 7));
  SoftmaxOracle f(data);
  const Vector x0 = Vector::Zero(f.dim());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  int converged = 0, at_tol = 0;
  std::string statuses;
  Vector x_mr;
  for (SolverKind k : {SolverKind::newton_mr, SolverKind::newton_cg, SolverKind::lbfgs, SolverKind::nlcg,
                       SolverKind::gauss_newton}) {
    const OptimizerResult r = harness::run_solver(k, f, x0, NewtonMRConfig{}, BaselineConfig{});
    const IterationRecord& last = r.trace.records.back();
    if (k == SolverKind::newton_mr) x_mr = r.x;
    statuses += fmt("%s%s %s |g| %.1e", statuses.empty() ? "" : ", ", std::string(to_string(k)).c_str(),
                    std::string(to_string(r.trace.status)).c_str(), last.grad_norm);
    at_tol += r.trace.status == OptimizerStatus::grad_tol_reached;
    if (!(last.grad_norm <= 1e-6)) continue;
    ++converged;
    lo = std::min(lo, last.f);
    hi = std::max(hi, last.f);
  }
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(dense_hessian(f, x_mr)).eigenvalues()(0);
  return {converged == 5 && hi - lo <= 1e-6 && min_eig > 0.0,
          fmt("%d/5 with final |g| <= 1e-6 (%d at epsilon_g): f spread %.2e (tol 1e-6), Hessian min eigenvalue "
              "%.2e; %s",
              converged, at_tol, hi - lo, min_eig, statuses.c_str())};
}

}  // namespace

int main() {
  criterion(1, "min-length MINRES-QLP vs pseudo-inverse", 10, min_length);
  criterion(2, "residual monotonicity and descent of range-restricted iterates", 5, residual_and_descent);
  criterion(3, "gradient-norm monotonicity of Newton-MR", 30, grad_monotonicity);
  criterion(4, "exact-mode rate on wide least squares", 10, exact_mode_rate);
  criterion(5, "inexactness conditions re-verified with fresh products", 10, inexactness);
  criterion(6, "x^2 y^2: Newton-MR converges, Newton-CG hits negative curvature", 1, invex);
  criterion(7, "softmax null-space property", 10, softmax_nu);
  criterion(8, "moral-smoothness fits", 10, smoothness);
  criterion(9, "GPL inequality for x^4", 1, gpl);
  criterion(10, "desk-scale GMM study", 300, gmm_study);
  criterion(11, "cross-solver agreement on softmax", 30, cross_solver);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
