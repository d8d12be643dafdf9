#include "adeuq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adeuq/error.hpp"
#include "adeuq/parallel.hpp"
#include "adeuq/pde_solver.hpp"
#include "adeuq/rng.hpp"

namespace adeuq {

KLBasis build_kl_basis(const PipelineConfig& config) {
  const CovarianceMatrix cov = build_covariance(config.spatial_grid(), config.gp);
  return kl_decompose(cov, config.pce.n_dim);
}

SolutionField solve_for_xi(const PipelineConfig& config, const KLBasis& basis,
                           std::span<const double> xi) {
  const SpatialGrid space = config.spatial_grid();
  const DiffusivityField kappa = realize_diffusivity(basis, xi, config.gp, space);
  return solve(kappa, space, config.solver_config());
}

namespace {

template <typename Fn>
auto with_sample_context(std::size_t s, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), "sample " + std::to_string(s) + ": " + e.what());
  }
}

}  // namespace

Dataset generate_dataset(const PipelineConfig& config, std::uint64_t seed_base,
                         std::size_t n_samples, std::size_t threads) {
  config.validate();
  const KLBasis basis = build_kl_basis(config);
  const TimeGrid time = config.time_grid();
  const SpatialGrid space = config.spatial_grid();

  Dataset dataset;
  dataset.manifest.config = config;
  dataset.manifest.seed_base = seed_base;
  dataset.manifest.n_samples = n_samples;
  dataset.records.assign(n_samples, Record{RandomVector{}, SolutionField(time, space)});

  parallel_for(n_samples, threads, [&](std::size_t s) {
    with_sample_context(s, [&] {
      Rng rng(stream_seed(seed_base, s));
      Record& record = dataset.records[s];
      record.xi = sample_xi(rng, config.pce.n_dim);
      record.solution = solve_for_xi(config, basis, record.xi);
      return 0;
    });
  });
  return dataset;
}

Dataset generate_training_set(const PipelineConfig& config, std::size_t threads) {
  return generate_dataset(config, config.run.seed, config.run.n_s, threads);
}

Dataset generate_heldout_set(const PipelineConfig& config, std::size_t threads) {
  return generate_dataset(config, heldout_seed_base(config.run.seed), config.run.n_eval, threads);
}

namespace {

// Running mean and sum of squared deviations (Welford), mergeable.
struct Moments {
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;

  explicit Moments(std::size_t n) : mean(n, 0.0), m2(n, 0.0) {}

  void add(std::span<const double> x) {
    ++count;
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double delta = x[i] - mean[i];
      mean[i] += delta * inv;
      m2[i] += delta * (x[i] - mean[i]);
    }
  }

  void merge(const Moments& other) {
    if (other.count == 0) return;
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double n = na + nb;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double delta = other.mean[i] - mean[i];
      mean[i] += delta * (nb / n);
      m2[i] += other.m2[i] + delta * delta * (na * nb / n);
    }
    count += other.count;
  }
};

constexpr std::size_t oracle_block = 64;

}  // namespace

FieldStats mc_oracle(const PipelineConfig& config, std::size_t n_mc, std::uint64_t seed_base,
                     std::size_t threads) {
  config.validate();
  require(n_mc >= 2, "mc_oracle needs n_mc >= 2, got " + std::to_string(n_mc));
  const KLBasis basis = build_kl_basis(config);
  const std::size_t n_points = config.grid.n_t * config.grid.n_z;

  // Fixed blocks reduced in block order: the result does not depend on threads.
  const std::size_t n_blocks = (n_mc + oracle_block - 1) / oracle_block;
  std::vector<Moments> blocks(n_blocks, Moments(n_points));
  parallel_for(n_blocks, threads, [&](std::size_t b) {
    const std::size_t end = std::min(n_mc, (b + 1) * oracle_block);
    for (std::size_t s = b * oracle_block; s < end; ++s) {
      with_sample_context(s, [&] {
        Rng rng(stream_seed(seed_base, s));
        const RandomVector xi = sample_xi(rng, config.pce.n_dim);
        blocks[b].add(solve_for_xi(config, basis, xi).values());
        return 0;
      });
    }
  });

  Moments total(n_points);
  for (const auto& block : blocks) total.merge(block);

  FieldStats stats;
  stats.mean = std::move(total.mean);
  stats.stddev.resize(n_points);
  const double denom = static_cast<double>(total.count - 1);
  for (std::size_t i = 0; i < n_points; ++i)
    stats.stddev[i] = std::sqrt(std::max(total.m2[i], 0.0) / denom);
  return stats;
}

FieldStats mc_oracle(const PipelineConfig& config, std::size_t n_mc, std::size_t threads) {
  return mc_oracle(config, n_mc, oracle_seed_base(config.run.seed), threads);
}

FieldStats surrogate_stats(const MLPModel& model, const MultiIndexSet& set,
                           const TimeGrid& time, const SpatialGrid& space) {
  require(model.arch.out_dim == set.size(), "surrogate outputs do not match the PCE set");
  const GridInputs inputs = grid_inputs(time, space);
  const PCECoefficients coeffs(inputs.t.size(), set.size(),
                               forward_batch(model, inputs.t, inputs.z));
  FieldStats stats;
  stats.mean = pce_mean(coeffs, set);
  stats.stddev = pce_variance(coeffs, set);
  for (double& v : stats.stddev) v = std::sqrt(std::max(v, 0.0));
  return stats;
}

double dataset_mse(const MLPModel& model, const MultiIndexSet& set, const Dataset& dataset) {
  require(!dataset.records.empty(), "dataset_mse: empty dataset");
  const GridInputs inputs = grid_inputs(dataset.manifest.config.time_grid(),
                                        dataset.manifest.config.spatial_grid());
  double sum = 0.0;
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    const Record& r = dataset.records[s];
    sum += loss(model, make_batch(s, inputs.t, inputs.z, r.solution.values(), r.xi, set));
  }
  return sum / static_cast<double>(dataset.size());
}

double rms_difference(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && !a.empty(), "rms_difference: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum / static_cast<double>(a.size()));
}

namespace {

double range_of(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

bool same_grid(const PipelineConfig& a, const PipelineConfig& b) {
  return a.grid.n_t == b.grid.n_t && a.grid.n_z == b.grid.n_z && a.grid.t_max == b.grid.t_max &&
         a.grid.z_min == b.grid.z_min && a.grid.z_max == b.grid.z_max;
}

}  // namespace

EvalReport evaluate(const MLPModel& model, const MultiIndexSet& set,
                    const DatasetManifest& training, const Dataset& heldout,
                    const FieldStats& oracle, std::size_t n_mc, const Dataset* training_data) {
  const PipelineConfig& train_cfg = training.config;
  const PipelineConfig& eval_cfg = heldout.manifest.config;
  if (!same_grid(train_cfg, eval_cfg))
    fail(ErrorKind::manifest, "held-out grid differs from the training grid");
  if (train_cfg.pce.n_dim != eval_cfg.pce.n_dim || set.n_dim() != train_cfg.pce.n_dim)
    fail(ErrorKind::manifest, "held-out n_dim differs from the training n_dim");
  if (model.arch.out_dim != set.size())
    fail(ErrorKind::manifest, "model outputs do not match the PCE set");
  if (!streams_disjoint(training, heldout.manifest))
    fail(ErrorKind::manifest, "held-out seed streams overlap the training seed streams");
  const std::size_t n_points = train_cfg.grid.n_t * train_cfg.grid.n_z;
  if (oracle.mean.size() != n_points || oracle.stddev.size() != n_points)
    fail(ErrorKind::manifest, "oracle fields do not match the training grid");

  EvalReport report;
  report.n_heldout = heldout.size();
  report.n_mc = n_mc;
  report.weight_count = model.arch.weight_count();
  report.parameter_count = model.arch.parameter_count();
  report.mse = dataset_mse(model, set, heldout);
  report.train_mse = training_data ? dataset_mse(model, set, *training_data)
                                   : std::numeric_limits<double>::quiet_NaN();

  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (const Record& r : heldout.records) {
    for (const double v : r.solution.values()) {
      sum += v;
      sum_sq += v * v;
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  report.zero_model_mse = sum_sq / static_cast<double>(count);
  double var = 0.0;
  for (const Record& r : heldout.records)
    for (const double v : r.solution.values()) var += (v - mean) * (v - mean);
  report.target_variance = var / static_cast<double>(count);
  report.relative_mse = report.target_variance > 0.0 ? report.mse / report.target_variance
                                                     : std::numeric_limits<double>::infinity();

  const FieldStats surrogate =
      surrogate_stats(model, set, train_cfg.time_grid(), train_cfg.spatial_grid());
  report.mean_field_rmse = rms_difference(surrogate.mean, oracle.mean);
  report.std_field_rmse = rms_difference(surrogate.stddev, oracle.stddev);
  report.mc_mean_range = range_of(oracle.mean);
  report.mc_std_range = range_of(oracle.stddev);
  return report;
}

}  // namespace adeuq
