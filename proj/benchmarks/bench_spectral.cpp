#include <benchmark/benchmark.h>

#include "semilat/operator.hpp"

namespace {

using namespace semilat;

LinOp random_positive(int n, std::uint64_t seed) {
  Rng rng(seed);
  auto space = GridSpace::vector_space(n, NormKind::Sup);
  return LinOp(space, space, rng.uniform_mat(n, n, 0.0, 1.0 / n));
}

void BM_SpectralRadiusEigen(benchmark::State& state) {
  LinOp t = random_positive(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_radius_eigen(t));
}
BENCHMARK(BM_SpectralRadiusEigen)->Arg(16)->Arg(64)->Arg(256);

void BM_SpectralRadiusGelfand(benchmark::State& state) {
  LinOp t = random_positive(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_radius_gelfand(t, 64).value);
}
BENCHMARK(BM_SpectralRadiusGelfand)->Arg(16)->Arg(64)->Arg(256);

void BM_NeumannInverse(benchmark::State& state) {
  LinOp t0 = random_positive(static_cast<int>(state.range(0)), 11);
  const double r = spectral_radius_eigen(t0);
  LinOp t = (0.7 / r) * t0;
  for (auto _ : state) benchmark::DoNotOptimize(neumann_inverse(t, 1e-10));
}
BENCHMARK(BM_NeumannInverse)->Arg(16)->Arg(64);

void BM_OpNormProbing(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(3);
  auto space = GridSpace::uniform_trapezoid(n, 0.0, 1.0, NormKind::Lp, 3.0);
  LinOp t(space, space, rng.uniform_mat(n, n, -1.0, 1.0));
  for (auto _ : state) {
    Rng probe_rng(5);
    benchmark::DoNotOptimize(op_norm(t, &probe_rng, 200));
  }
}
BENCHMARK(BM_OpNormProbing)->Arg(32)->Arg(128);

}  // namespace
