// Serial reference vs OpenMP path for the hot kernels.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cable/kernels.hpp"

using namespace cable;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_ModalSynthesis(benchmark::State& state) {
  const std::size_t rows = 64, m = 256, nx = 1401;
  const auto c = noise(rows * m, 1), b = noise(nx * m, 2);
  std::vector<double> out(rows * nx);
  for (auto _ : state) {
    modal_synthesis(c, b, rows, m, nx, out, mode(state));
    benchmark::DoNotOptimize(out.data());
  }
  label(state);
}

void BM_WaveStep(benchmark::State& state) {
  const std::size_t n = 4001;
  auto prev = noise(n, 3), cur = noise(n, 4);
  std::vector<double> next(n);
  const std::vector<std::size_t> nodes{1000};
  const std::vector<double> spring{1e-3};
  for (auto _ : state) {
    wave_step(prev, cur, next, 0.81, nodes, spring, mode(state));
    benchmark::DoNotOptimize(next.data());
  }
  label(state);
}

void BM_DenseMatvec(benchmark::State& state) {
  const std::size_t m = 1024;
  const auto S = noise(m * m, 5), x = noise(m, 6);
  std::vector<double> y(m);
  for (auto _ : state) {
    dense_matvec(S, m, x, y, mode(state));
    benchmark::DoNotOptimize(y.data());
  }
  label(state);
}

void BM_SineProjection(benchmark::State& state) {
  const std::size_t n = 32769, m = 1024;
  const auto w = noise(n, 7);
  std::vector<double> theta(n), coeff(m);
  for (std::size_t i = 0; i < n; ++i) theta[i] = std::numbers::pi * i / (n - 1);
  for (auto _ : state) {
    sine_projection(w, theta, 1.0, coeff, mode(state));
    benchmark::DoNotOptimize(coeff.data());
  }
  label(state);
}

void BM_DuhamelAccumulate(benchmark::State& state) {
  const std::size_t nt = 1001, K = 200;
  const auto f = noise(nt, 8);
  std::vector<double> omega(K), c(nt * K), s(nt * K);
  for (std::size_t k = 0; k < K; ++k) omega[k] = 0.5 * (k + 1);
  for (auto _ : state) {
    duhamel_accumulate(f, 0.01, omega, c, s, mode(state));
    benchmark::DoNotOptimize(c.data());
  }
  label(state);
}

}  // namespace

BENCHMARK(BM_ModalSynthesis)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WaveStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DenseMatvec)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SineProjection)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DuhamelAccumulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
