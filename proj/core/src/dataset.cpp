#include "adeuq/dataset.hpp"

#include "adeuq/error.hpp"
#include "adeuq/rng.hpp"

namespace adeuq {

void Dataset::validate() const {
  const std::size_t n_dim = manifest.n_dim();
  const TimeGrid time = manifest.config.time_grid();
  const SpatialGrid space = manifest.config.spatial_grid();
  require(records.size() == manifest.n_samples,
          "dataset holds " + std::to_string(records.size()) + " records, manifest says " +
              std::to_string(manifest.n_samples));
  for (std::size_t s = 0; s < records.size(); ++s) {
    const Record& r = records[s];
    require(r.xi.size() == n_dim, "record " + std::to_string(s) + ": xi has the wrong length");
    require(r.solution.time_grid() == time && r.solution.spatial_grid() == space,
            "record " + std::to_string(s) + ": solution grid differs from the manifest");
  }
}

bool streams_disjoint(const DatasetManifest& a, const DatasetManifest& b) {
  // stream_seed(a.base, s) == stream_seed(b.base, s') <=> s' = a.base ^ b.base ^ s.
  const std::uint64_t mix = a.seed_base ^ b.seed_base;
  for (std::size_t s = 0; s < a.n_samples; ++s)
    if (stream_seed(mix, s) < b.n_samples) return false;
  return true;
}

}  // namespace adeuq
