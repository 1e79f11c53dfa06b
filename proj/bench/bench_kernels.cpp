#include <benchmark/benchmark.h>

#include <random>

#include "softguide/fd_oracle.hpp"
#include "softguide/kernels.hpp"
#include "softguide/profiles.hpp"

using namespace softguide;

namespace {

const fd::DiscreteOperator& fixture() {
  static const fd::DiscreteOperator op = [] {
    const auto g = fd::Grid2D::make(1.0, 0.05, 20.0, 4.0, 4.2);
    return fd::build_h2d({4.0, 1.0}, profiles::triangle(1.0, 1.0), 0.1, g);
  }();
  return op;
}

Eigen::VectorXd random_vector(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = nd(rng);
  return v;
}

template <bool Omp>
void BM_apply(benchmark::State& st) {
  const auto& op = fixture();
  const auto x = random_vector(op.grid.size());
  Eigen::VectorXd y(x.size());
  for (auto _ : st) {
    if constexpr (Omp) kernels::apply_operator_omp(op, x.data(), y.data());
    else kernels::apply_operator_serial(op, x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Omp>
void BM_exterior(benchmark::State& st) {
  const int n2 = 200, steps = 400;
  Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(n2, 900.0, 1400.0);
  Eigen::VectorXd last(n2);
  for (auto _ : st) {
    long neg = Omp ? kernels::exterior_sweep_omp(a.data(), n2, steps, 160000.0, 1e-300, nullptr, last.data())
                   : kernels::exterior_sweep_serial(a.data(), n2, steps, 160000.0, 1e-300, nullptr, last.data());
    benchmark::DoNotOptimize(neg);
  }
}

template <bool Omp>
void BM_cells(benchmark::State& st) {
  const auto& op = fixture();
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < op.grid.n1; ++i)
    if (std::abs(op.grid.x1(i)) < 1.0)
      for (int j = op.grid.j_top - 3; j <= op.grid.j_top + 3; ++j) cells.emplace_back(i, j);
  std::vector<double> out;
  for (auto _ : st) {
    if constexpr (Omp) kernels::cell_fractions_omp(op.grid, op.profile, 0.1, cells, out);
    else kernels::cell_fractions_serial(op.grid, op.profile, 0.1, cells, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_apply<false>)->Name("apply_operator/serial");
BENCHMARK(BM_apply<true>)->Name("apply_operator/omp");
BENCHMARK(BM_exterior<false>)->Name("exterior_sweep/serial");
BENCHMARK(BM_exterior<true>)->Name("exterior_sweep/omp");
BENCHMARK(BM_cells<false>)->Name("cell_fractions/serial");
BENCHMARK(BM_cells<true>)->Name("cell_fractions/omp");

BENCHMARK_MAIN();
