#include <benchmark/benchmark.h>

#include "ictmc/cones.hpp"
#include "ictmc/io.hpp"
#include "ictmc/solver.hpp"

#include <random>

using namespace ictmc;

namespace {

const Problem& example1() {
  static const Problem p = load_problem(std::string(ICTMC_BENCH_DATA_DIR) + "/example1.json");
  return p;
}

const Problem& example2() {
  static const Problem p = load_problem(std::string(ICTMC_BENCH_DATA_DIR) + "/example2.json");
  return p;
}

Vec example1_h() { return (Vec(3) << -0.7, 1.7, -1.0).finished(); }

void bm_minimize_row(benchmark::State& state) {
  const Problem& p = example1();
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  Vec h(3);
  for (auto _ : state) {
    for (int i = 0; i < 3; ++i) h(i) = u(rng);
    benchmark::DoNotOptimize(minimize_row(p, 0, h).value);
  }
}

void bm_lower_apply(benchmark::State& state) {
  const Problem& p = example2();
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  Vec h(4);
  for (auto _ : state) {
    for (int i = 0; i < 4; ++i) h(i) = u(rng);
    benchmark::DoNotOptimize(lower_operator_apply(p, h).values.sum());
  }
}

void bm_matrix_exponential(benchmark::State& state) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 2);
  const int m = static_cast<int>(state.range(0));
  Mat q = Mat::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    double s = 0;
    for (int l = 0; l < m; ++l)
      if (l != k) s += (q(k, l) = u(rng));
    q(k, k) = -s;
  }
  for (auto _ : state) benchmark::DoNotOptimize(matrix_exponential(q, 0.8).sum());
}

void bm_partial_sum_trace(benchmark::State& state) {
  const Problem& p = example1();
  const Vec g = -example1_h();
  const LowerApply la = lower_operator_apply(p, g);
  const LpSolution s = minimize_row(p, 0, g);
  const std::vector<int> act = active_indices(p, 0, s.vertex);
  Mat cand(3, act.size());
  for (size_t j = 0; j < act.size(); ++j) cand.col(j) = p.gambles.row(act[j]).transpose();
  const NonnegCombination c = nonneg_combination(cand, g);
  const ReducedCombination red = reduce_to_independent(p, act, c.coeffs, c.constant, g);
  const ConeBasis b = complete_to_basis(p, 0, red.indices, act, g);
  const Mat qj = change_of_basis(la.Q, b);
  for (auto _ : state)
    benchmark::DoNotOptimize(partial_sum_trace(b, qj, 0.7739413680781759).epsilon);
}

void bm_adaptive_three_state(benchmark::State& state) {
  const Problem& p = example1();
  const Vec h = example1_h();
  for (auto _ : state) benchmark::DoNotOptimize(solve_adaptive(p, h, 1.0, 1e-3).max_err);
}

void bm_adaptive_stiff_short(benchmark::State& state) {
  const Problem& p = example2();
  const Vec h = Vec::Unit(4, 0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_adaptive(p, h, 0.01, 1e-4).max_err);
}

void bm_uniform_exp_grid(benchmark::State& state) {
  const Problem& p = example1();
  const Vec h = example1_h();
  const long n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_uniform_exp(p, h, 1.0, n).h_T.sum());
}

}  // namespace

BENCHMARK(bm_minimize_row);
BENCHMARK(bm_lower_apply);
BENCHMARK(bm_matrix_exponential)->Arg(3)->Arg(8)->Arg(32);
BENCHMARK(bm_partial_sum_trace);
BENCHMARK(bm_adaptive_three_state)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_adaptive_stiff_short)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_uniform_exp_grid)->Arg(64)->Arg(1490)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
