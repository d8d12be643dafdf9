#pragma once

#include <cstddef>
#include <vector>

namespace adeuq {

/// Uniform grid over [z_min, z_max] including both endpoints.
class SpatialGrid {
 public:
  SpatialGrid(std::size_t n_z, double z_min = 0.0, double z_max = 1.0);

  std::size_t size() const { return n_z_; }
  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  double spacing() const { return (z_max_ - z_min_) / static_cast<double>(n_z_ - 1); }
  double length() const { return z_max_ - z_min_; }
  double point(std::size_t k) const;
  std::vector<double> points() const;

  bool operator==(const SpatialGrid&) const = default;

 private:
  std::size_t n_z_;
  double z_min_;
  double z_max_;
};

/// Time levels t_k = k * t_max / (n_t - 1), k = 0..n_t-1.
class TimeGrid {
 public:
  TimeGrid(std::size_t n_t, double t_max = 1.0);

  std::size_t size() const { return n_t_; }
  double t_max() const { return t_max_; }
  double step() const { return t_max_ / static_cast<double>(n_t_ - 1); }
  double point(std::size_t k) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  std::size_t n_t_;
  double t_max_;
};

}  // namespace adeuq
