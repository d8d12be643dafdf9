#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "adeuq/config.hpp"
#include "adeuq/pde_solver.hpp"
#include "adeuq/pipeline.hpp"
#include "adeuq/rng.hpp"

namespace adeuq::test {

inline DiffusivityField constant_kappa(std::size_t n_z, double value) {
  return DiffusivityField{std::vector<double>(n_z, value)};
}

/// RMS error against an exact solution exact(t, z) over the whole grid.
template <typename Exact>
double rms_against(const SolutionField& field, Exact&& exact) {
  double sum = 0.0;
  for (std::size_t k = 0; k < field.n_t(); ++k)
    for (std::size_t m = 0; m < field.n_z(); ++m) {
      const double d = field.at(k, m) - exact(field.time_grid().point(k), field.spatial_grid().point(m));
      sum += d * d;
    }
  return std::sqrt(sum / static_cast<double>(field.n_t() * field.n_z()));
}

struct Refinement {
  std::vector<double> errors;
  std::vector<double> orders;  // log2(e_k / e_{k+1})
  double min_order() const { return *std::min_element(orders.begin(), orders.end()); }
};

inline Refinement orders_of(std::vector<double> errors) {
  Refinement r;
  r.errors = std::move(errors);
  for (std::size_t i = 0; i + 1 < r.errors.size(); ++i)
    r.orders.push_back(std::log2(r.errors[i] / r.errors[i + 1]));
  return r;
}

/// Pure diffusion, constant kappa, sine profile, zero Dirichlet ends.
/// Exact solution exp(-kappa pi^2 t) sin(pi z); dt shrinks with dz^2.
inline Refinement diffusion_refinement(double kappa = 0.05) {
  std::vector<double> errors;
  for (std::size_t cells : {16u, 32u, 64u, 128u}) {
    const SpatialGrid grid(cells + 1);
    SolverConfig cfg;
    cfg.w = 0.0;
    cfg.n_t = cells * cells / 4 + 1;
    cfg.t_max = 1.0;
    cfg.bc = BoundaryKind::dirichlet_zero;
    cfg.ic.kind = InitialKind::sine;
    const SolutionField field = solve(constant_kappa(grid.size(), kappa), grid, cfg);
    errors.push_back(rms_against(field, [&](double t, double z) {
      return std::exp(-kappa * std::numbers::pi * std::numbers::pi * t) * std::sin(std::numbers::pi * z);
    }));
  }
  return orders_of(std::move(errors));
}

/// Advection-diffusion on a periodic unit domain with a sin(2 pi z)
/// profile. Exact solution exp(-kappa k^2 t) sin(k (z - w t)), k = 2 pi;
/// dt shrinks with dz.
inline Refinement advection_refinement(double kappa = 0.05, double w = 1.0) {
  const double wave = 2.0 * std::numbers::pi;
  std::vector<double> errors;
  for (std::size_t cells : {128u, 256u, 512u, 1024u}) {
    const SpatialGrid grid(cells + 1);
    SolverConfig cfg;
    cfg.w = w;
    cfg.n_t = cells + 1;
    cfg.t_max = 1.0;
    cfg.bc = BoundaryKind::periodic;
    std::vector<double> initial(grid.size());
    for (std::size_t m = 0; m < grid.size(); ++m) initial[m] = std::sin(wave * grid.point(m));
    const SolutionField field = solve(constant_kappa(grid.size(), kappa), grid, cfg, initial);
    errors.push_back(rms_against(field, [&](double t, double z) {
      return std::exp(-kappa * wave * wave * t) * std::sin(wave * (z - w * t));
    }));
  }
  return orders_of(std::move(errors));
}

/// Amount by which a Dirichlet solution leaves [min(0, min T0), max T0];
/// zero when the discrete maximum principle holds exactly.
inline double max_principle_excess(const SolutionField& field) {
  const auto row0 = field.row(0);
  const double hi = *std::max_element(row0.begin(), row0.end());
  const double lo = std::min(0.0, *std::min_element(row0.begin(), row0.end()));
  double excess = 0.0;
  for (const double v : field.values()) excess = std::max({excess, v - hi, lo - v});
  return excess;
}

/// Largest relative change of sum_z T dz over the unique periodic nodes.
inline double periodic_mass_drift(const SolutionField& field) {
  const double dz = field.spatial_grid().spacing();
  auto mass = [&](std::size_t k) {
    double sum = 0.0;
    for (std::size_t m = 0; m + 1 < field.n_z(); ++m) sum += field.at(k, m) * dz;
    return sum;
  };
  const double reference = mass(0);
  double drift = 0.0;
  for (std::size_t k = 1; k < field.n_t(); ++k)
    drift = std::max(drift, std::abs(mass(k) - reference) / std::abs(reference));
  return drift;
}

/// Lognormal diffusivity samples under the given configuration.
inline std::vector<DiffusivityField> sampled_kappas(const PipelineConfig& config, std::uint64_t seed,
                                                    std::size_t count) {
  const KLBasis basis = build_kl_basis(config);
  std::vector<DiffusivityField> out;
  for (std::size_t s = 0; s < count; ++s) {
    Rng rng(stream_seed(seed, s));
    out.push_back(realize_diffusivity(basis, sample_xi(rng, config.pce.n_dim), config.gp,
                                      config.spatial_grid()));
  }
  return out;
}

}  // namespace adeuq::test
