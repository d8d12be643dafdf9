#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "adeuq/gp_field.hpp"
#include "adeuq/grid.hpp"
#include "adeuq/pce.hpp"
#include "adeuq/pde_solver.hpp"
#include "adeuq/surrogate.hpp"

namespace adeuq {

struct GridSection {
  std::size_t n_t = 128;
  std::size_t n_z = 64;
  double t_max = 1.0;
  double z_min = 0.0;
  double z_max = 1.0;
};

struct SolverSection {
  double w = 10.0;
  BoundaryKind bc = BoundaryKind::dirichlet_zero;
  InitialKind ic = InitialKind::sine;
  double ic_center = 0.25;
  double ic_width = 0.1;
};

struct PCESection {
  std::size_t n_dim = 2;
  std::size_t max_degree = 2;
};

struct TrainSection {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t epochs = 15;
  std::size_t hidden_layers = 3;
  std::size_t hidden_units = 128;
};

struct RunSection {
  std::uint64_t seed = 0;
  std::size_t n_s = 100;
  std::size_t n_eval = 50;
  std::size_t n_mc = 2000;
  std::size_t threads = 1;
};

/// Full experiment configuration. Serialized as one strict JSON document
/// with sections grid, gp, solver, pce, train, run and an optional
/// top-level "preset".
struct PipelineConfig {
  std::string preset = "default";
  GridSection grid;
  GPConfig gp;
  SolverSection solver;
  PCESection pce;
  TrainSection train;
  RunSection run;

  /// Default preset: |A| = 6 (n_dim = 2, max_degree = 2).
  static PipelineConfig defaults();
  /// Repro preset: n_t=128, n_z=64, n_s=100, 15 epochs, lr=1e-3,
  /// 128-unit ReLU net, |A| = 3 (n_dim = 2, max_degree = 1).
  static PipelineConfig paper();
  /// Throws ErrorKind::config for an unknown preset name.
  static PipelineConfig from_preset(std::string_view name);

  /// Strict parse: unknown sections or keys are ErrorKind::config. A
  /// "preset" key expands before the remaining keys are applied.
  static PipelineConfig from_json_text(std::string_view text);
  static PipelineConfig from_file(const std::string& path);
  std::string to_json_text(int indent = 2) const;

  /// Applies "section.key=value"; value parsed as JSON, falling back to a
  /// bare string.
  void apply_override(std::string_view assignment);
  void set(std::string_view section, std::string_view key, std::string_view value);

  /// Checks every section's invariants; ErrorKind::invalid_argument.
  void validate() const;

  SpatialGrid spatial_grid() const { return SpatialGrid(grid.n_z, grid.z_min, grid.z_max); }
  TimeGrid time_grid() const { return TimeGrid(grid.n_t, grid.t_max); }
  SolverConfig solver_config() const;
  MultiIndexSet multi_index_set() const { return MultiIndexSet(pce.n_dim, pce.max_degree); }
  MLPArchitecture architecture() const;
  TrainConfig train_config() const;
};

std::string_view to_string(BoundaryKind bc);
std::string_view to_string(InitialKind ic);

}  // namespace adeuq
