#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "khess/envelope.hpp"
#include "khess/hermitian.hpp"
#include "khess/point_kernel.hpp"
#include "khess/solver.hpp"
#include "khess/torus.hpp"

using namespace khess;

namespace {

constexpr double kPi = std::numbers::pi;

GridFunction smooth(const TorusGrid& g, double amp) {
  return GridFunction::sample(g, [amp](std::span<const double> x) {
    return amp * (std::sin(2 * kPi * x[0]) + 0.5 * std::cos(2 * kPi * (x[1] + x[2])));
  });
}

void BM_SigmaPacked(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> packed(static_cast<std::size_t>(n * n) * 1024);
  for (auto& v : packed) v = u(rng);
  for (auto _ : state) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 1024; ++i) acc += kernel::sigma_packed(packed.data() + i * n * n, n, n)[n];
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_SigmaPacked)->Arg(2)->Arg(3)->Arg(4);

void BM_EigenSigma(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto g = HermitianMatrix::identity(n);
  const auto a = HermitianMatrix::diagonal(std::vector<double>(static_cast<std::size_t>(n), 1.5)) + g.scaled(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(hessian_density(a, g, n));
}
BENCHMARK(BM_EigenSigma)->Arg(2)->Arg(3)->Arg(4);

void BM_Ddc(benchmark::State& state) {
  const TorusGrid g(3, static_cast<int>(state.range(0)));
  const auto phi = smooth(g, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(ddc(phi));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_Ddc)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_HessianMeasure(benchmark::State& state) {
  const TorusGrid g(3, static_cast<int>(state.range(0)));
  const auto phi = smooth(g, 0.01);
  const auto id = FormField::identity(g);
  for (auto _ : state) benchmark::DoNotOptimize(hessian_measure(id, phi, 2));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_HessianMeasure)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_SolveConstant(benchmark::State& state) {
  const TorusGrid g(3, 8, {0, 1, 2});
  const auto f = DensityField::sample(g, [](std::span<const double> x) {
    return 1.0 + 0.5 * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[2]);
  });
  const HessianProblem prob{FormField::identity(g), static_cast<int>(state.range(0)), f, SolveMode::Constant};
  for (auto _ : state) benchmark::DoNotOptimize(solve_with_constant(prob));
}
BENCHMARK(BM_SolveConstant)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SolveFullGrid(benchmark::State& state) {
  const TorusGrid g(3, 6);
  const auto phi = smooth(g, 0.005);
  const auto id = FormField::identity(g);
  auto dens = hessian_measure(id, phi, 2).density;
  for (std::size_t i = 0; i < dens.size(); ++i) dens[i] *= std::exp(-phi[i]);
  const HessianProblem prob{id, 2, dens, SolveMode::Exponential};
  for (auto _ : state) benchmark::DoNotOptimize(solve_exponential(prob));
}
BENCHMARK(BM_SolveFullGrid)->Unit(benchmark::kMillisecond);

void BM_EnvelopeSweep(benchmark::State& state) {
  const TorusGrid g(3, static_cast<int>(state.range(0)), {0});
  const auto u = GridFunction::sample(g, [](std::span<const double> x) { return -0.1 * std::cos(2 * kPi * x[0]); });
  const auto prob = make_obstacle_problem(FormField::identity(g), 3, u);
  for (auto _ : state) benchmark::DoNotOptimize(envelope_sweep_oracle(prob));
}
BENCHMARK(BM_EnvelopeSweep)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
