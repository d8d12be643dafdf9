#include <benchmark/benchmark.h>

#include "adeuq/config.hpp"
#include "adeuq/gp_field.hpp"
#include "adeuq/pde_solver.hpp"
#include "adeuq/pipeline.hpp"
#include "adeuq/rng.hpp"
#include "adeuq/surrogate.hpp"

namespace {

using namespace adeuq;

// One PDE solve at n_z = n_t = range(0) on a lognormal diffusivity.
void BM_Solve(benchmark::State& state) {
  PipelineConfig config = PipelineConfig::paper();
  config.grid.n_z = static_cast<std::size_t>(state.range(0));
  config.grid.n_t = static_cast<std::size_t>(state.range(0));
  const KLBasis basis = build_kl_basis(config);
  Rng rng(1);
  const DiffusivityField kappa =
      realize_diffusivity(basis, sample_xi(rng, 2), config.gp, config.spatial_grid());
  const SpatialGrid grid = config.spatial_grid();
  const SolverConfig cfg = config.solver_config();
  for (auto _ : state) benchmark::DoNotOptimize(solve(kappa, grid, cfg));
}
BENCHMARK(BM_Solve)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Jacobi(benchmark::State& state) {
  GPConfig gp;
  const CovarianceMatrix cov =
      build_covariance(SpatialGrid(static_cast<std::size_t>(state.range(0))), gp);
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigen(cov));
}
BENCHMARK(BM_Jacobi)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

// One optimizer step on a paper-sized batch: backward plus ADAM update.
void BM_TrainStep(benchmark::State& state) {
  const PipelineConfig config = PipelineConfig::paper();
  const MultiIndexSet set = config.multi_index_set();
  MLPModel model = mlp_init(config.architecture(), 3);
  const GridInputs inputs = grid_inputs(config.time_grid(), config.spatial_grid());
  Rng rng(4);
  std::vector<double> targets(inputs.t.size());
  for (double& v : targets) v = rng.normal();
  const std::vector<double> xi{rng.normal(), rng.normal()};
  const TrainingBatch batch = make_batch(0, inputs.t, inputs.z, targets, xi, set);
  AdamState adam = AdamState::zeros(model);
  const TrainConfig cfg = config.train_config();
  std::size_t step = 0;
  for (auto _ : state) {
    const LossGradient lg = backward(model, batch);
    adam_step(model, lg.gradient, adam, cfg, ++step);
    benchmark::DoNotOptimize(lg.loss);
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
