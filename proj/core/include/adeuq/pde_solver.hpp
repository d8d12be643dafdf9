#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adeuq/gp_field.hpp"
#include "adeuq/grid.hpp"

namespace adeuq {

enum class BoundaryKind { dirichlet_zero, periodic };
enum class InitialKind { sine, gaussian_bump };

struct InitialCondition {
  InitialKind kind = InitialKind::sine;
  double center = 0.25;  // gaussian_bump only
  double width = 0.1;    // gaussian_bump only
};

struct SolverConfig {
  double w = 10.0;
  std::size_t n_t = 128;
  double t_max = 1.0;
  BoundaryKind bc = BoundaryKind::dirichlet_zero;
  InitialCondition ic;

  TimeGrid time_grid() const { return TimeGrid(n_t, t_max); }
  void validate(const SpatialGrid& grid) const;
};

/// T(t_k, z_m) stored t-major: values[k * n_z + m].
class SolutionField {
 public:
  SolutionField(TimeGrid time, SpatialGrid space);
  SolutionField(TimeGrid time, SpatialGrid space, std::vector<double> values);

  const TimeGrid& time_grid() const { return time_; }
  const SpatialGrid& spatial_grid() const { return space_; }
  std::size_t n_t() const { return time_.size(); }
  std::size_t n_z() const { return space_.size(); }

  double& at(std::size_t k, std::size_t m) { return values_[k * n_z() + m]; }
  double at(std::size_t k, std::size_t m) const { return values_[k * n_z() + m]; }
  std::span<double> row(std::size_t k) { return {values_.data() + k * n_z(), n_z()}; }
  std::span<const double> row(std::size_t k) const { return {values_.data() + k * n_z(), n_z()}; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  TimeGrid time_;
  SpatialGrid space_;
  std::vector<double> values_;
};

std::vector<double> initial_condition(const SpatialGrid& grid, const SolverConfig& cfg);

/// Crank-Nicolson on the conservative diffusion term plus implicit upwind
/// advection; one (cyclic) tridiagonal solve per step.
SolutionField solve(const DiffusivityField& kappa, const SpatialGrid& grid,
                    const SolverConfig& cfg);

/// Same scheme from an explicit initial profile. Boundary values of the
/// profile are overridden by the boundary condition.
SolutionField solve(const DiffusivityField& kappa, const SpatialGrid& grid,
                    const SolverConfig& cfg, std::span<const double> initial);

/// Root mean square of the entrywise difference.
double l2_error(const SolutionField& a, const SolutionField& b);

/// Solves a x = d for tridiagonal a (sub-, main, super-diagonal); lower[0]
/// and upper[n-1] are ignored. Throws ErrorKind::numerical on a zero pivot.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Periodic variant: lower[0] couples row 0 to x[n-1] and upper[n-1] couples
/// row n-1 to x[0]. Requires n >= 3.
std::vector<double> solve_cyclic_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs);

}  // namespace adeuq
