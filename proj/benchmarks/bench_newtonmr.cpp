#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "newtonmr/baselines.hpp"
#include "newtonmr/krylov.hpp"
#include "newtonmr/newton_mr.hpp"
#include "newtonmr/problems/gmm.hpp"
#include "newtonmr/problems/softmax.hpp"

using namespace newtonmr;

namespace {

Matrix random_symmetric(Index d, Index rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix b(d, rank);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < rank; ++j) b(i, j) = normal(rng);
  Vector signs(rank);
  for (Index j = 0; j < rank; ++j) signs[j] = j % 3 == 0 ? -1.0 : 1.0;
  return b * signs.asDiagonal() * b.transpose();
}

std::shared_ptr<const Dataset> softmax_data(Index n, Index p) {
  return std::make_shared<Dataset>(make_synthetic_softmax(n, p, 4, 3));
}

}  // namespace

static void BM_SoftmaxHessVec(benchmark::State& state) {
  SoftmaxOracle oracle(softmax_data(state.range(0), 50));
  const Vector x = Vector::Constant(oracle.dim(), 0.01);
  const Vector v = Vector::Ones(oracle.dim());
  for (auto _ : state) benchmark::DoNotOptimize(oracle.hess_vec(x, v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SoftmaxHessVec)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void BM_GmmHessVec(benchmark::State& state) {
  const GmmData data = generate_gmm_data(20, state.range(0), 5);
  GmmOracle oracle(data.points, data.precision1, data.precision2);
  const Vector x = Vector::Constant(oracle.dim(), 0.1);
  const Vector v = Vector::Ones(oracle.dim());
  for (auto _ : state) benchmark::DoNotOptimize(oracle.hess_vec(x, v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GmmHessVec)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void BM_MinresQlpSingular(benchmark::State& state) {
  const Index d = state.range(0);
  const SymmetricOperator op = dense_operator(random_symmetric(d, d / 2, 11));
  const Vector b = Vector::Ones(d);
  KrylovConfig cfg;
  cfg.max_iters = static_cast<std::size_t>(d);
  cfg.rel_residual_tol = 1e-10;
  cfg.reorthogonalize = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(minres_qlp(op, b, cfg));
}
BENCHMARK(BM_MinresQlpSingular)->ArgsProduct({{50, 200, 800}, {0, 1}});

static void BM_RangeRestricted(benchmark::State& state) {
  const Index d = state.range(0);
  const SymmetricOperator op = dense_operator(random_symmetric(d, d / 2, 13));
  const Vector g = Vector::LinSpaced(d, -1.0, 1.0);
  RangeRestrictedConfig cfg;
  cfg.rel_residual_tol = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(minres_qlp_range_restricted(op, g, cfg));
}
BENCHMARK(BM_RangeRestricted)->Arg(50)->Arg(200)->Arg(800);

template <class Solve>
static void solve_softmax(benchmark::State& state, Solve solve) {
  SoftmaxOracle oracle(softmax_data(2000, 20));
  const Vector x0 = Vector::Zero(oracle.dim());
  double cost = 0.0;
  for (auto _ : state) {
    const OptimizerResult r = solve(oracle, x0);
    cost = oracle_cost(r.trace.counts);
    benchmark::DoNotOptimize(r.x.data());
  }
  state.counters["oracle_cost"] = cost;
}

static void BM_SoftmaxNewtonMR(benchmark::State& state) {
  NewtonMRConfig cfg;
  cfg.epsilon_g = 1e-8;
  solve_softmax(state, [&](const ObjectiveOracle& o, const Vector& x0) { return newton_mr_solve(o, x0, cfg); });
}
BENCHMARK(BM_SoftmaxNewtonMR)->Unit(benchmark::kMillisecond);

static void BM_SoftmaxNewtonCG(benchmark::State& state) {
  BaselineConfig cfg;
  cfg.epsilon_g = 1e-8;
  solve_softmax(state, [&](const ObjectiveOracle& o, const Vector& x0) { return newton_cg_solve(o, x0, cfg); });
}
BENCHMARK(BM_SoftmaxNewtonCG)->Unit(benchmark::kMillisecond);

static void BM_SoftmaxLbfgs(benchmark::State& state) {
  BaselineConfig cfg;
  cfg.epsilon_g = 1e-8;
  solve_softmax(state, [&](const ObjectiveOracle& o, const Vector& x0) { return lbfgs_solve(o, x0, cfg); });
}
BENCHMARK(BM_SoftmaxLbfgs)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
