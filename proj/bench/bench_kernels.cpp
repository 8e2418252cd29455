// OpenMP kernels against their serial references on a 50,000 x 25 matrix.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "ngpt/kernels.hpp"

namespace {

using ngpt::kernels::MatrixView;
namespace reference = ngpt::kernels::reference;

struct Fixture {
  std::size_t rows;
  std::size_t cols;
  std::vector<double> values;
  std::vector<double> vec;   // unit vector of length cols
  std::vector<double> out;

  Fixture(std::size_t n, std::size_t d) : rows(n), cols(d), values(n * d), vec(d), out(n * d) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (double& v : values) v = normal(rng);
    double s = 0.0;
    for (double& v : vec) {
      v = normal(rng);
      s += v * v;
    }
    for (double& v : vec) v /= std::sqrt(s);
  }
  MatrixView view() const { return {values.data(), rows, cols}; }
};

Fixture& data(std::size_t d) {
  static Fixture f25(50000, 25);
  static Fixture f80(50000, 80);
  return d == 25 ? f25 : f80;
}

template <auto Kernel>
void covariance(benchmark::State& state) {
  const auto& f = data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.view()));
}

template <auto Kernel>
void project(benchmark::State& state) {
  auto& f = data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Kernel(f.view(), f.vec, std::span<double>(f.out.data(), f.rows));
    benchmark::ClobberMemory();
  }
}

template <auto Kernel>
void squared_distances(benchmark::State& state) {
  auto& f = data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Kernel(f.view(), f.vec, std::span<double>(f.out.data(), f.rows));
    benchmark::ClobberMemory();
  }
}

template <auto Kernel>
void reflect_rows(benchmark::State& state) {
  auto& f = data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Kernel(f.view(), f.vec, f.out);
    benchmark::ClobberMemory();
  }
}

template <auto Kernel>
void reflected_bounds(benchmark::State& state) {
  const auto& f = data(static_cast<std::size_t>(state.range(0)));
  std::vector<double> lo(f.cols), hi(f.cols);
  for (auto _ : state) {
    Kernel(f.view(), f.vec, lo, hi);
    benchmark::DoNotOptimize(lo.data());
  }
}

template <auto Kernel>
void fastica_moments(benchmark::State& state) {
  const auto& f = data(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(f.cols);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.view(), f.vec, 1.0, out));
}

#define NGPT_PAIR(name)                                                              \
  BENCHMARK_TEMPLATE(name, &ngpt::kernels::name)->Name("omp/" #name)->Arg(25)->Arg(80); \
  BENCHMARK_TEMPLATE(name, &reference::name)->Name("serial/" #name)->Arg(25)->Arg(80)

NGPT_PAIR(covariance);
NGPT_PAIR(project);
NGPT_PAIR(squared_distances);
NGPT_PAIR(reflect_rows);
NGPT_PAIR(reflected_bounds);
NGPT_PAIR(fastica_moments);

}  // namespace

BENCHMARK_MAIN();
