#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "adeuq/config.hpp"
#include "adeuq/pde_solver.hpp"

namespace adeuq {

inline constexpr int dataset_format_version = 1;

/// Everything needed to regenerate a dataset bit-for-bit.
struct DatasetManifest {
  PipelineConfig config;
  std::uint64_t seed_base = 0;  // sample s uses stream_seed(seed_base, s)
  std::size_t n_samples = 0;
  int format_version = dataset_format_version;

  std::size_t n_dim() const { return config.pce.n_dim; }
  std::size_t record_size() const { return config.pce.n_dim + config.grid.n_t * config.grid.n_z; }
};

struct Record {
  RandomVector xi;
  SolutionField solution;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
  /// Throws ErrorKind::invalid_argument when a record has the wrong shape.
  void validate() const;
};

/// Seed base of the held-out set: training base offset by 2^32.
constexpr std::uint64_t heldout_seed_base(std::uint64_t seed) { return seed + (1ULL << 32); }
/// Seed base of the Monte Carlo oracle ensemble: offset by 2 * 2^32.
constexpr std::uint64_t oracle_seed_base(std::uint64_t seed) { return seed + (2ULL << 32); }

/// True when the two manifests share no per-sample stream seed.
bool streams_disjoint(const DatasetManifest& a, const DatasetManifest& b);

}  // namespace adeuq
