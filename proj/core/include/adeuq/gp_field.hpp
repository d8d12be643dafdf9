#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adeuq/grid.hpp"
#include "adeuq/rng.hpp"

namespace adeuq {

/// Log-diffusivity Gaussian process Y(z) and the scale of kappa = scale * exp(Y).
struct GPConfig {
  double mu_y = 0.0;
  double sigma_y = 1.0;
  double corr_len = 0.3;
  double p_exp = 1.0;
  double kappa_scale = 0.05;

  void validate() const;
};

/// Dense symmetric n x n matrix, row-major.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double trace() const;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
/// eigenvectors[i] is the unit-norm vector belonging to eigenvalues[i].
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> eigenvectors;
  std::size_t sweeps = 0;
};

/// Truncated Karhunen-Loeve basis of the covariance on the z-grid.
struct KLBasis {
  std::vector<double> eigenvalues;                 // descending, clamped >= 0
  std::vector<std::vector<double>> eigenvectors;  // n_dim vectors of length n_z
  double trace = 0.0;                              // of the full covariance

  std::size_t n_dim() const { return eigenvalues.size(); }
  std::size_t n_z() const { return eigenvectors.empty() ? 0 : eigenvectors.front().size(); }
  /// Fraction of the total variance carried by the retained modes.
  double captured_energy() const;
};

/// Standard-normal germ xi driving both the KL field and the PCE basis.
using RandomVector = std::vector<double>;

struct DiffusivityField {
  std::vector<double> kappa;

  std::size_t size() const { return kappa.size(); }
  void validate() const;
};

/// Cov(z_i, z_j) = sigma^2 exp(-(1/p) (|z_i - z_j| / L)^p).
double kernel(double distance, const GPConfig& cfg);

CovarianceMatrix build_covariance(const SpatialGrid& grid, const GPConfig& cfg);

/// Cyclic Jacobi eigensolver. Converged when the off-diagonal Frobenius
/// norm drops below tol * |trace|; throws ErrorKind::numerical after
/// max_sweeps with the sweep count in the message.
EigenDecomposition jacobi_eigen(const CovarianceMatrix& matrix, double tol = 1e-12,
                                std::size_t max_sweeps = 100);

KLBasis kl_decompose(const CovarianceMatrix& cov, std::size_t n_dim);

RandomVector sample_xi(Rng& rng, std::size_t n_dim);

/// Y(z_k) = mu_Y + sum_i sqrt(lambda_i) phi_i(z_k) xi_i, without exponentiation.
std::vector<double> log_diffusivity(const KLBasis& basis, std::span<const double> xi,
                                    const GPConfig& cfg);

/// kappa(z_k) = kappa_scale * exp(Y(z_k)).
DiffusivityField realize_diffusivity(const KLBasis& basis, std::span<const double> xi,
                                     const GPConfig& cfg, const SpatialGrid& grid);

}  // namespace adeuq
