#include <benchmark/benchmark.h>

#include <random>

#include "optcons/asymptotic.hpp"
#include "optcons/finite_time.hpp"
#include "optcons/gramian.hpp"
#include "optcons/oracle.hpp"
#include "optcons/sim.hpp"

namespace {

using optcons::Matrix;
using optcons::Vector;

Matrix random_matrix(std::mt19937& rng, int rows, int cols) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = d(rng);
  return M;
}

// Chain of integrators of length n, position output.
optcons::LtiSystem chain(int n) {
  Matrix A = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
  Matrix B = Matrix::Zero(n, 1);
  B(n - 1, 0) = 1.0;
  Matrix C = Matrix::Zero(1, n);
  C(0, 0) = 1.0;
  return optcons::LtiSystem(A, B, C);
}

optcons::FiniteTimeProblem rendezvous(int n, int agents) {
  std::mt19937 rng(7);
  Vector a = Vector::Ones(agents);
  const Vector x0 = random_matrix(rng, n * agents, 1);
  optcons::FiniteTimeProblem prob{optcons::AgentNetwork(chain(n), agents),
                                  optcons::WeightVector(a), x0};
  prob.T = 1.0;
  return prob;
}

void BM_MatExp(benchmark::State& state) {
  std::mt19937 rng(1);
  const int n = static_cast<int>(state.range(0));
  const Matrix A = random_matrix(rng, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(optcons::mat_exp(A, 1.5));
}
BENCHMARK(BM_MatExp)->RangeMultiplier(2)->Range(2, 32);

void BM_OutputGramian(benchmark::State& state) {
  const optcons::LtiSystem sys = chain(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(optcons::output_gramian(sys, 0.0, 1.0).value);
}
BENCHMARK(BM_OutputGramian)->DenseRange(1, 6);

void BM_SolveAre(benchmark::State& state) {
  std::mt19937 rng(2);
  const int n = static_cast<int>(state.range(0));
  const Matrix A = random_matrix(rng, n, n);
  const Matrix B = random_matrix(rng, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(optcons::solve_are(A, B).P0);
}
BENCHMARK(BM_SolveAre)->DenseRange(2, 8, 2);

void BM_SimulateStateFeedback(benchmark::State& state) {
  const auto prob = rendezvous(2, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    // Fresh law each time so cached gains do not carry over.
    const auto law = optcons::make_control_law(prob, optcons::LawKind::StateFeedbackFT);
    benchmark::DoNotOptimize(optcons::simulate(prob, law).states.back());
  }
}
BENCHMARK(BM_SimulateStateFeedback)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_OracleMinNorm(benchmark::State& state) {
  const auto prob = rendezvous(2, 3);
  const int K = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(optcons::solve_min_norm(optcons::discretize(prob, K)).cost);
}
BENCHMARK(BM_OracleMinNorm)->RangeMultiplier(4)->Range(16, 1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
