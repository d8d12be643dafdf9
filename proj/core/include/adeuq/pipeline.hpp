#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adeuq/config.hpp"
#include "adeuq/dataset.hpp"
#include "adeuq/gp_field.hpp"
#include "adeuq/surrogate.hpp"

namespace adeuq {

/// KL basis of the configured GP, truncated to pce.n_dim modes.
KLBasis build_kl_basis(const PipelineConfig& config);

/// Solution for one germ xi under the configured GP, solver and grid.
SolutionField solve_for_xi(const PipelineConfig& config, const KLBasis& basis,
                           std::span<const double> xi);

/// Samples s = 0..n_samples-1: xi_s from stream_seed(seed_base, s), kappa_s
/// via the KL expansion, T_s via the PDE solver. Records are bit-identical
/// for any thread count.
Dataset generate_dataset(const PipelineConfig& config, std::uint64_t seed_base,
                         std::size_t n_samples, std::size_t threads);

/// run.n_s samples from run.seed.
Dataset generate_training_set(const PipelineConfig& config, std::size_t threads);
/// run.n_eval samples from heldout_seed_base(run.seed).
Dataset generate_heldout_set(const PipelineConfig& config, std::size_t threads);

/// Pointwise mean and standard deviation over the (t, z) grid, t-major.
struct FieldStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Sample mean and (n-1)-denominator standard deviation over n_mc solves
/// drawn from `seed_base`. Reduction order is fixed, so results do not
/// depend on the thread count.
FieldStats mc_oracle(const PipelineConfig& config, std::size_t n_mc, std::uint64_t seed_base,
                     std::size_t threads);
/// Same with seed base oracle_seed_base(run.seed).
FieldStats mc_oracle(const PipelineConfig& config, std::size_t n_mc, std::size_t threads);

/// Mean and std of the surrogate from its PCE coefficients alone.
FieldStats surrogate_stats(const MLPModel& model, const MultiIndexSet& set,
                           const TimeGrid& time, const SpatialGrid& space);

/// Mean of the per-sample loss over a dataset.
double dataset_mse(const MLPModel& model, const MultiIndexSet& set, const Dataset& dataset);

struct EvalReport {
  double mse = 0.0;            // held-out
  double train_mse = 0.0;      // NaN when no training set was given
  double relative_mse = 0.0;   // mse / variance of held-out targets
  double target_variance = 0.0;
  double zero_model_mse = 0.0;
  double mean_field_rmse = 0.0;
  double std_field_rmse = 0.0;
  double mc_mean_range = 0.0;  // max - min of the oracle mean field
  double mc_std_range = 0.0;
  std::size_t n_heldout = 0;
  std::size_t n_mc = 0;
  std::size_t weight_count = 0;
  std::size_t parameter_count = 0;
  std::vector<double> loss_history;
};

/// Held-out MSE, relative MSE and field RMSE against the oracle.
/// Throws ErrorKind::manifest when the held-out grid or n_dim differ from
/// the training manifest, or when the two seed ranges overlap.
EvalReport evaluate(const MLPModel& model, const MultiIndexSet& set,
                    const DatasetManifest& training, const Dataset& heldout,
                    const FieldStats& oracle, std::size_t n_mc,
                    const Dataset* training_data = nullptr);

/// Root mean square of a - b.
double rms_difference(std::span<const double> a, std::span<const double> b);

}  // namespace adeuq
