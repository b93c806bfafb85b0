#include "newtonmr/harness/runner.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <cstdio>
#include <random>
#include <thread>

#include "newtonmr/problems/softmax.hpp"
#include "newtonmr/problems/test_functions.hpp"

namespace newtonmr::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<const Dataset> load_softmax_data(const ProblemSpec& spec, std::shared_ptr<const Dataset>& test) {
  if (spec.data_path.empty()) return std::make_shared<Dataset>(make_synthetic_softmax(spec.n, spec.p, spec.num_classes, spec.seed));
  auto train = std::make_shared<Dataset>(read_libsvm(spec.data_path));
  if (!spec.test_path.empty()) {
    LibsvmOptions opts;
    opts.num_features = train->p();
    opts.label_values = train->label_values;
    test = std::make_shared<Dataset>(read_libsvm(spec.test_path, opts));
  }
  return train;
}

}  // namespace

BoundProblem bind_problem(const ProblemSpec& spec) {
  BoundProblem out;
  out.name = spec.name;
  if (spec.name == "softmax") {
    out.train = load_softmax_data(spec, out.test);
    auto oracle = std::make_shared<SoftmaxOracle>(out.train);
    out.x0 = Vector::Zero(oracle->dim());
    out.oracle = std::move(oracle);
    return out;
  }
  if (spec.name == "gmm") {
    GmmData data = generate_gmm_data(spec.p, spec.n, spec.seed);
    out.oracle = std::make_shared<GmmOracle>(std::move(data.points), std::move(data.precision1),
                                             std::move(data.precision2));
    out.x0 = Vector::Zero(out.oracle->dim());
    out.truth = std::move(data.truth);
    return out;
  }
  if (spec.name == "quadratic") {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal;
    Matrix a(spec.n, spec.p);
    Vector b(spec.n);
    for (Index i = 0; i < spec.n; ++i)
      for (Index j = 0; j < spec.p; ++j) a(i, j) = normal(rng);
    for (Index i = 0; i < spec.n; ++i) b[i] = normal(rng);
    out.oracle = std::make_shared<LeastSquares>(std::move(a), std::move(b));
    out.x0 = Vector::Zero(spec.p);
    return out;
  }
  const std::string suite_name = spec.name == "hinge" ? "smoothed_hinge" : spec.name;
  for (NamedProblem& np : test_functions(spec.seed)) {
    if (np.name == suite_name) {
      out.oracle = std::move(np.oracle);
      out.x0 = std::move(np.x0);
      return out;
    }
  }
  throw ConfigError("unknown problem '" + spec.name + "'");
}

OptimizerResult run_solver(SolverKind kind, const ObjectiveOracle& oracle, const Vector& x0,
                           const NewtonMRConfig& nmr, const BaselineConfig& base) {
  switch (kind) {
    case SolverKind::newton_mr: return newton_mr_solve(oracle, x0, nmr);
    case SolverKind::newton_cg: return newton_cg_solve(oracle, x0, base);
    case SolverKind::lbfgs: return lbfgs_solve(oracle, x0, base);
    case SolverKind::nlcg: return nlcg_solve(oracle, x0, base);
    case SolverKind::gauss_newton: return gauss_newton_solve(oracle, x0, base);
  }
  throw std::invalid_argument("run_solver: unknown solver");
}

RunOutcome run_single(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  cfg.sync_termination();
  cfg.validate();
  RunOutcome out;
  try {
    out.problem = bind_problem(cfg.problem);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("cannot read data: ") + e.what());
  }
  if (cfg.solver == SolverKind::gauss_newton && !out.problem.oracle->has_gauss_newton())
    throw ConfigError("problem '" + cfg.problem.name + "' has no Gauss-Newton operator");
  if (out.problem.test) {
    cfg.newton_mr.keep_iterates = true;
    cfg.baseline.keep_iterates = true;
  }
  out.result = run_solver(cfg.solver, *out.problem.oracle, out.problem.x0, cfg.newton_mr, cfg.baseline);
  if (!cfg.trace_path.empty()) write_trace_csv(cfg.trace_path, out.result.trace);
  return out;
}

void write_trace_csv(std::ostream& os, const OptimizerTrace& trace) {
  os << "iter,f,grad_norm,alpha,inner_iters,linesearch_iters,cum_oracle_cost,wall_ms,status,failed\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const IterationRecord& r = trace.records[k];
    const bool last = k + 1 == trace.records.size();
    os << r.iter << ',' << r.f << ',' << r.grad_norm << ',' << r.alpha << ',' << r.inner_iters << ','
       << r.linesearch_iters << ',' << r.cum_oracle_cost << ',' << r.wall_ms << ',';
    if (last) os << to_string(trace.status) << ',' << (is_failure(trace.status) ? 1 : 0);
    else os << ",0";
    os << '\n';
  }
}

void write_trace_csv(const std::string& path, const OptimizerTrace& trace) {
  // Write to a temporary name and rename so readers never see partial files.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write trace file: " + path);
    write_trace_csv(out, trace);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot write trace file: " + path);
}

bool verify_cost_accounting(const OptimizerTrace& trace) {
  double cum = 0.0;
  for (const IterationRecord& r : trace.records) {
    cum += iteration_cost(trace.solver, r.inner_products, r.linesearch_iters);
    if (cum != r.cum_oracle_cost) return false;
  }
  const double total = oracle_cost(trace.counts);
  // A failed step costs oracle calls after the last record.
  const bool ended_on_record = trace.status == OptimizerStatus::grad_tol_reached ||
                               trace.status == OptimizerStatus::max_iters || trace.status == OptimizerStatus::stalled;
  return ended_on_record ? total == cum : total >= cum;
}

namespace {

struct CellTrack {
  std::vector<double> cost, f, grad, err;
  OptimizerResult result;
};

double first_cost(const CellTrack& t, const std::vector<double>& values, double target) {
  for (std::size_t k = 0; k < values.size(); ++k)
    if (values[k] <= target) return t.cost[k];
  return kInf;
}

}  // namespace

BatchResult run_batch(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  cfg.sync_termination();
  cfg.validate();
  const ProfileSettings& ps = cfg.profile;
  const std::size_t ns = ps.solvers.size();

  std::vector<BoundProblem> problems(ps.runs);
  for (std::size_t r = 0; r < ps.runs; ++r) {
    ProblemSpec spec = cfg.problem;
    spec.seed = ps.seed + r;
    problems[r] = bind_problem(spec);
  }
  for (SolverKind k : ps.solvers)
    if (k == SolverKind::gauss_newton && !problems.front().oracle->has_gauss_newton())
      throw ConfigError("problem '" + cfg.problem.name + "' has no Gauss-Newton operator");

  std::vector<CellTrack> tracks(ps.runs * ns);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tracks.size(); i = next++) {
      const BoundProblem& bp = problems[i / ns];
      CellTrack& t = tracks[i];
      const GroundTruth* truth = bp.truth ? &*bp.truth : nullptr;
      IterateHook hook = [&t, truth](std::size_t, const Vector& x, const IterationRecord& rec) {
        t.cost.push_back(rec.cum_oracle_cost);
        t.f.push_back(rec.f);
        t.grad.push_back(rec.grad_norm);
        t.err.push_back(truth ? estimation_error(x, *truth) : std::numeric_limits<double>::quiet_NaN());
      };
      NewtonMRConfig nmr = cfg.newton_mr;
      BaselineConfig base = cfg.baseline;
      nmr.on_iterate = hook;
      base.on_iterate = hook;
      t.result = run_solver(ps.solvers[i % ns], *bp.oracle, bp.x0, nmr, base);
    }
  };
  const std::size_t nthreads = std::min(ps.threads, tracks.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  BatchResult out;
  std::vector<std::string> names;
  for (SolverKind k : ps.solvers) names.emplace_back(to_string(k));
  for (ProfileInput& in : out.inputs) {
    in.solvers = names;
    in.costs = Matrix::Constant(static_cast<Index>(ps.runs), static_cast<Index>(ns), kInf);
  }

  for (std::size_t r = 0; r < ps.runs; ++r) {
    double f_best = kInf, err_best = kInf;
    for (std::size_t s = 0; s < ns; ++s) {
      const CellTrack& t = tracks[r * ns + s];
      for (double v : t.f)
        if (std::isfinite(v)) f_best = std::min(f_best, v);
      for (double v : t.err)
        if (std::isfinite(v)) err_best = std::min(err_best, v);
    }
    const double f_slack = ps.f_rel_tol * std::max(1.0, std::abs(f_best));
    for (std::size_t s = 0; s < ns; ++s) {
      const CellTrack& t = tracks[r * ns + s];
      const OptimizerTrace& tr = t.result.trace;
      CellSummary c;
      c.run = r;
      c.solver = ps.solvers[s];
      c.seed = ps.seed + r;
      c.status = tr.status;
      c.iterations = tr.records.empty() ? 0 : tr.records.size() - 1;
      c.final_f = t.f.empty() ? kInf : t.f.back();
      c.final_grad = t.grad.empty() ? kInf : t.grad.back();
      c.final_error = t.err.empty() ? std::numeric_limits<double>::quiet_NaN() : t.err.back();
      c.total_cost = oracle_cost(tr.counts);
      c.accounting_exact = verify_cost_accounting(tr);

      if (ps.performance == PerformanceMode::cost_to_target) {
        c.performance[0] = first_cost(t, t.grad, ps.grad_target);
        c.performance[1] = std::isfinite(f_best) ? first_cost(t, t.f, f_best + f_slack) : kInf;
        c.performance[2] = std::isfinite(err_best) ? first_cost(t, t.err, (1.0 + ps.error_rel_tol) * err_best) : kInf;
      } else {
        // Final values, kept strictly positive so ratios are defined.
        const double tiny = std::numeric_limits<double>::min();
        c.performance[0] = std::isfinite(c.final_grad) ? std::max(c.final_grad, tiny) : kInf;
        c.performance[1] = std::isfinite(c.final_f) && std::isfinite(f_best)
                               ? c.final_f - f_best + 1e-16 * std::max(1.0, std::abs(f_best))
                               : kInf;
        c.performance[2] = std::isfinite(c.final_error) ? std::max(c.final_error, tiny) : kInf;
      }
      for (std::size_t m = 0; m < 3; ++m)
        out.inputs[m].costs(static_cast<Index>(r), static_cast<Index>(s)) = c.performance[m];
      out.cells.push_back(c);
    }
  }
  return out;
}

void write_cells_csv(std::ostream& os, const BatchResult& batch) {
  os << "run,seed,solver,status,failed,iterations,final_f,final_grad,final_error,total_cost,accounting_exact,"
        "perf_grad_norm,perf_objective,perf_estimation_error\n";
  os << std::setprecision(17);
  for (const CellSummary& c : batch.cells) {
    os << c.run << ',' << c.seed << ',' << to_string(c.solver) << ',' << to_string(c.status) << ','
       << (is_failure(c.status) ? 1 : 0) << ',' << c.iterations << ',' << c.final_f << ',' << c.final_grad << ','
       << c.final_error << ',' << c.total_cost << ',' << (c.accounting_exact ? 1 : 0) << ',' << c.performance[0]
       << ',' << c.performance[1] << ',' << c.performance[2] << '\n';
  }
}

}  // namespace newtonmr::harness
