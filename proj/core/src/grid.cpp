#include "adeuq/grid.hpp"

#include <cmath>
#include <string>

#include "adeuq/error.hpp"

namespace adeuq {

SpatialGrid::SpatialGrid(std::size_t n_z, double z_min, double z_max)
    : n_z_(n_z), z_min_(z_min), z_max_(z_max) {
  require(n_z >= 2, "spatial grid needs n_z >= 2, got " + std::to_string(n_z));
  require(std::isfinite(z_min) && std::isfinite(z_max) && z_max > z_min,
          "spatial grid needs finite z_min < z_max");
}

double SpatialGrid::point(std::size_t k) const {
  if (k + 1 == n_z_) return z_max_;
  return z_min_ + static_cast<double>(k) * spacing();
}

std::vector<double> SpatialGrid::points() const {
  std::vector<double> z(n_z_);
  for (std::size_t k = 0; k < n_z_; ++k) z[k] = point(k);
  return z;
}

TimeGrid::TimeGrid(std::size_t n_t, double t_max) : n_t_(n_t), t_max_(t_max) {
  require(n_t >= 2, "time grid needs n_t >= 2, got " + std::to_string(n_t));
  require(std::isfinite(t_max) && t_max > 0.0, "time grid needs t_max > 0");
}

double TimeGrid::point(std::size_t k) const {
  if (k + 1 == n_t_) return t_max_;
  return static_cast<double>(k) * step();
}

}  // namespace adeuq
