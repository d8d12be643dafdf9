#include "adeuq/pde_solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "adeuq/error.hpp"

namespace adeuq {

void SolverConfig::validate(const SpatialGrid& grid) const {
  require(n_t >= 2, "solver needs n_t >= 2");
  require(std::isfinite(t_max) && t_max > 0.0, "solver needs t_max > 0");
  require(std::isfinite(w), "solver velocity w must be finite");
  if (ic.kind == InitialKind::gaussian_bump) {
    require(std::isfinite(ic.width) && ic.width > 0.0, "gaussian-bump width must be > 0");
    require(ic.center >= grid.z_min() && ic.center <= grid.z_max(),
            "gaussian-bump center must lie inside the domain");
  }
  if (bc == BoundaryKind::periodic) require(grid.size() >= 4, "periodic bc needs n_z >= 4");
}

SolutionField::SolutionField(TimeGrid time, SpatialGrid space)
    : time_(time), space_(space), values_(time.size() * space.size(), 0.0) {}

SolutionField::SolutionField(TimeGrid time, SpatialGrid space, std::vector<double> values)
    : time_(time), space_(space), values_(std::move(values)) {
  require(values_.size() == time_.size() * space_.size(),
          "solution field has " + std::to_string(values_.size()) + " values, expected " +
              std::to_string(time_.size() * space_.size()));
}

std::vector<double> initial_condition(const SpatialGrid& grid, const SolverConfig& cfg) {
  const std::size_t n = grid.size();
  std::vector<double> profile(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = grid.point(k);
    switch (cfg.ic.kind) {
      case InitialKind::sine:
        profile[k] = std::sin(std::numbers::pi * (z - grid.z_min()) / grid.length());
        break;
      case InitialKind::gaussian_bump: {
        const double d = z - cfg.ic.center;
        profile[k] = std::exp(-d * d / (2.0 * cfg.ic.width * cfg.ic.width));
        break;
      }
    }
  }
  if (cfg.bc == BoundaryKind::dirichlet_zero) {
    profile.front() = 0.0;
    profile.back() = 0.0;
  } else {
    profile.back() = profile.front();
  }
  return profile;
}

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs) {
  const std::size_t n = diag.size();
  require(lower.size() == n && upper.size() == n && rhs.size() == n,
          "tridiagonal system: band lengths differ");
  std::vector<double> c(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pivot = i == 0 ? diag[0] : diag[i] - lower[i] * c[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      std::ostringstream msg;
      msg << "singular tridiagonal system: pivot " << pivot << " at row " << i;
      fail(ErrorKind::numerical, msg.str());
    }
    c[i] = upper[i] / pivot;
    x[i] = (rhs[i] - (i == 0 ? 0.0 : lower[i] * x[i - 1])) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

std::vector<double> solve_cyclic_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs) {
  const std::size_t n = diag.size();
  require(n >= 3, "cyclic tridiagonal system needs n >= 3");
  // Sherman-Morrison on the corner entries.
  const double top_right = lower[0];
  const double bottom_left = upper[n - 1];
  const double gamma = -diag[0];

  std::vector<double> modified(diag.begin(), diag.end());
  modified[0] -= gamma;
  modified[n - 1] -= bottom_left * top_right / gamma;

  std::vector<double> x = solve_tridiagonal(lower, modified, upper, rhs);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = bottom_left;
  const std::vector<double> y = solve_tridiagonal(lower, modified, upper, u);

  const double denom = 1.0 + y[0] + top_right * y[n - 1] / gamma;
  if (denom == 0.0 || !std::isfinite(denom))
    fail(ErrorKind::numerical, "singular cyclic tridiagonal system");
  const double factor = (x[0] + top_right * x[n - 1] / gamma) / denom;
  for (std::size_t i = 0; i < n; ++i) x[i] -= factor * y[i];
  return x;
}

SolutionField solve(const DiffusivityField& kappa, const SpatialGrid& grid,
                    const SolverConfig& cfg) {
  const std::vector<double> ic = initial_condition(grid, cfg);
  return solve(kappa, grid, cfg, ic);
}

SolutionField solve(const DiffusivityField& kappa, const SpatialGrid& grid,
                    const SolverConfig& cfg, std::span<const double> initial) {
  cfg.validate(grid);
  kappa.validate();
  const std::size_t n_z = grid.size();
  require(kappa.size() == n_z, "diffusivity has " + std::to_string(kappa.size()) +
                                   " points but the grid has " + std::to_string(n_z));
  require(initial.size() == n_z, "initial profile length differs from the grid");

  const TimeGrid time = cfg.time_grid();
  SolutionField field(time, grid);
  auto row0 = field.row(0);
  std::copy(initial.begin(), initial.end(), row0.begin());

  const bool periodic = cfg.bc == BoundaryKind::periodic;
  if (periodic) {
    row0[n_z - 1] = row0[0];
  } else {
    row0[0] = 0.0;
    row0[n_z - 1] = 0.0;
  }

  // Unknowns: nodes 1..n_z-2 (dirichlet) or 0..n_z-2 with wrap (periodic).
  const std::size_t first = periodic ? 0 : 1;
  const std::size_t m = periodic ? n_z - 1 : n_z - 2;
  if (m == 0) return field;  // two-point dirichlet grid: nothing evolves

  const double dt = time.step();
  const double dz = grid.spacing();
  const double inv_dz2 = 1.0 / (dz * dz);
  const double courant = dt * std::abs(cfg.w) / dz;

  // Neighbour indices and face coefficients kappa_{k -/+ 1/2} / dz^2 per unknown.
  auto node = [&](std::size_t i) { return first + i; };
  auto left = [&](std::size_t i) { return periodic ? (i + m - 1) % m : node(i) - 1; };
  auto right = [&](std::size_t i) { return periodic ? (i + 1) % m : node(i) + 1; };

  std::vector<double> a_minus(m), a_plus(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = node(i);
    a_minus[i] = 0.5 * (kappa.kappa[k] + kappa.kappa[left(i)]) * inv_dz2;
    a_plus[i] = 0.5 * (kappa.kappa[k] + kappa.kappa[right(i)]) * inv_dz2;
  }

  std::vector<double> lower(m), diag(m), upper(m);
  for (std::size_t i = 0; i < m; ++i) {
    diag[i] = 1.0 + 0.5 * dt * (a_minus[i] + a_plus[i]) + courant;
    lower[i] = -0.5 * dt * a_minus[i] - (cfg.w > 0.0 ? courant : 0.0);
    upper[i] = -0.5 * dt * a_plus[i] - (cfg.w < 0.0 ? courant : 0.0);
  }
  if (!periodic) {
    lower[0] = 0.0;
    upper[m - 1] = 0.0;
  }

  std::vector<double> rhs(m);
  for (std::size_t step = 1; step < time.size(); ++step) {
    const auto prev = field.row(step - 1);
    for (std::size_t i = 0; i < m; ++i) {
      const double centre = prev[node(i)];
      const double west = prev[left(i)];
      const double east = prev[right(i)];
      rhs[i] = centre + 0.5 * dt * (a_plus[i] * (east - centre) - a_minus[i] * (centre - west));
    }
    const std::vector<double> next = periodic ? solve_cyclic_tridiagonal(lower, diag, upper, rhs)
                                              : solve_tridiagonal(lower, diag, upper, rhs);
    auto row = field.row(step);
    for (std::size_t i = 0; i < m; ++i) row[node(i)] = next[i];
    if (periodic) row[n_z - 1] = row[0];
  }

  for (const double value : field.values())
    if (!std::isfinite(value)) fail(ErrorKind::numerical, "PDE solution became non-finite");
  return field;
}

double l2_error(const SolutionField& a, const SolutionField& b) {
  if (!(a.time_grid() == b.time_grid()) || !(a.spatial_grid() == b.spatial_grid()))
    fail(ErrorKind::invalid_argument, "l2_error: solution fields live on different grids");
  double sum = 0.0;
  const auto& va = a.values();
  const auto& vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(va.size()));
}

}  // namespace adeuq
