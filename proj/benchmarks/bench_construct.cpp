#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "semilat/catalog.hpp"
#include "semilat/perturbation.hpp"

namespace {

using namespace semilat;

TripleSpec random_triple(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd a = rng.uniform_mat(n, n, 0.0, 0.3 / n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) row += a(i, j);
    a(i, i) = -(row + 0.8);
  }
  Eigen::MatrixXd b = rng.uniform_mat(n, n, 0.0, 1.0 / n);
  Eigen::MatrixXd c0 = rng.uniform_mat(n, n, 0.0, 1.0 / n);
  auto space = GridSpace::vector_space(n, NormKind::Sup);
  ModelPtr model = SemigroupModel::matrix_exp(LinOp(space, space, a));
  Eigen::MatrixXd k = c0 * (-a).partialPivLu().solve(b);
  Eigen::EigenSolver<Eigen::MatrixXd> es(k, false);
  Eigen::MatrixXd c = c0 * (0.5 / es.eigenvalues().cwiseAbs().maxCoeff());

  TripleSpec triple;
  triple.model = model;
  triple.control = RegularizedControl::from_raw(*model, LinOp(space, space, b),
                                                model->growth_bound() + 1.0);
  triple.observation = LinOp(space, space, c);
  triple.u_space = space;
  triple.u_tag = UTag::AM;
  return triple;
}

void BM_ConstructPerturbed(benchmark::State& state) {
  TripleSpec triple = random_triple(static_cast<int>(state.range(0)), 21);
  TimeGridSpec grid{1.0, 1000};
  for (auto _ : state)
    benchmark::DoNotOptimize(construct_perturbed(triple, TheoremKind::AM, grid, 1e-10, {1.0}));
}
BENCHMARK(BM_ConstructPerturbed)->Arg(4)->Arg(8)->Arg(12);

void BM_ControllabilityMap(benchmark::State& state) {
  TripleSpec triple = random_triple(6, 33);
  const int steps = static_cast<int>(state.range(0));
  Eigen::VectorXd bp = Eigen::VectorXd::LinSpaced(steps + 1, 0.0, 1.0);
  Eigen::MatrixXd vals = Eigen::MatrixXd::Ones(6, steps);
  StepFunction u(bp, vals, triple.u_space);
  for (auto _ : state) benchmark::DoNotOptimize(controllability_map(triple, u, 1.0));
}
BENCHMARK(BM_ControllabilityMap)->Arg(16)->Arg(128);

void BM_RankOneFeedbackSweep(benchmark::State& state) {
  RankOneConfig config;
  config.grid_n = static_cast<int>(state.range(0));
  config.b = [](double) { return 1.0; };
  config.phi_density = [](double) { return 1.0; };
  for (auto _ : state) {
    RankOneBuild build = build_rank_one_lp(config);
    benchmark::DoNotOptimize(build.feedback_map(1.0));
  }
}
BENCHMARK(BM_RankOneFeedbackSweep)->Arg(100)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
