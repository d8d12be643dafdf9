#include "adeuq/gp_field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "adeuq/error.hpp"

namespace adeuq {

void GPConfig::validate() const {
  require(std::isfinite(sigma_y) && sigma_y >= 0.0, "gp.sigma_Y must be >= 0");
  require(std::isfinite(corr_len) && corr_len > 0.0, "gp.corr_len must be > 0");
  require(std::isfinite(p_exp) && p_exp > 0.0, "gp.p_exp must be > 0");
  require(std::isfinite(mu_y) && mu_y <= 20.0,
          "gp.mu_Y must be finite and <= 20 (kappa = exp(Y) would overflow)");
  require(std::isfinite(kappa_scale) && kappa_scale > 0.0, "gp.kappa_scale must be > 0");
}

double CovarianceMatrix::trace() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < n_; ++i) sum += (*this)(i, i);
  return sum;
}

double KLBasis::captured_energy() const {
  if (trace <= 0.0) return 1.0;
  return std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0) / trace;
}

void DiffusivityField::validate() const {
  require(!kappa.empty(), "diffusivity field is empty");
  for (std::size_t k = 0; k < kappa.size(); ++k) {
    if (!(std::isfinite(kappa[k]) && kappa[k] > 0.0)) {
      std::ostringstream msg;
      msg << "diffusivity must be finite and positive; kappa[" << k << "] = " << kappa[k];
      fail(ErrorKind::invalid_argument, msg.str());
    }
  }
}

double kernel(double distance, const GPConfig& cfg) {
  const double scaled = std::abs(distance) / cfg.corr_len;
  return cfg.sigma_y * cfg.sigma_y * std::exp(-std::pow(scaled, cfg.p_exp) / cfg.p_exp);
}

CovarianceMatrix build_covariance(const SpatialGrid& grid, const GPConfig& cfg) {
  cfg.validate();
  const std::size_t n = grid.size();
  CovarianceMatrix cov(n);
  const double variance = cfg.sigma_y * cfg.sigma_y;
  for (std::size_t i = 0; i < n; ++i) {
    cov(i, i) = variance;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double value = kernel(grid.point(j) - grid.point(i), cfg);
      cov(i, j) = value;
      cov(j, i) = value;
    }
  }
  return cov;
}

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) sum += a[i * n + j] * a[i * n + j];
  return std::sqrt(sum);
}

}  // namespace

EigenDecomposition jacobi_eigen(const CovarianceMatrix& matrix, double tol,
                                std::size_t max_sweeps) {
  const std::size_t n = matrix.size();
  require(n >= 1, "jacobi_eigen: empty matrix");

  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = matrix(i, j);
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double scale = std::abs(matrix.trace());
  const double threshold = tol * (scale > 0.0 ? scale : 1.0);

  std::size_t sweep = 0;
  for (; off_diagonal_norm(a, n) >= threshold; ++sweep) {
    if (sweep == max_sweeps) {
      std::ostringstream msg;
      msg << "Jacobi eigensolver did not converge after " << sweep
          << " sweeps (off-diagonal norm " << off_diagonal_norm(a, n) << ", threshold "
          << threshold << ")";
      fail(ErrorKind::numerical, msg.str());
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });

  EigenDecomposition result;
  result.sweeps = sweep;
  result.eigenvalues.reserve(n);
  result.eigenvectors.reserve(n);
  for (const std::size_t col : order) {
    result.eigenvalues.push_back(a[col * n + col]);
    std::vector<double> vec(n);
    std::size_t largest = 0;
    for (std::size_t k = 0; k < n; ++k) {
      vec[k] = v[k * n + col];
      if (std::abs(vec[k]) > std::abs(vec[largest])) largest = k;
    }
    // Fix the sign so the decomposition is canonical.
    if (vec[largest] < 0.0)
      for (double& x : vec) x = -x;
    result.eigenvectors.push_back(std::move(vec));
  }
  return result;
}

KLBasis kl_decompose(const CovarianceMatrix& cov, std::size_t n_dim) {
  require(n_dim >= 1 && n_dim <= cov.size(),
          "kl_decompose: need 1 <= n_dim <= n_z, got n_dim = " + std::to_string(n_dim));
  EigenDecomposition eig = jacobi_eigen(cov);

  KLBasis basis;
  basis.trace = cov.trace();
  basis.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + n_dim);
  for (double& lambda : basis.eigenvalues) lambda = std::max(lambda, 0.0);
  basis.eigenvectors.assign(std::make_move_iterator(eig.eigenvectors.begin()),
                            std::make_move_iterator(eig.eigenvectors.begin() + n_dim));
  return basis;
}

RandomVector sample_xi(Rng& rng, std::size_t n_dim) {
  RandomVector xi(n_dim);
  for (double& x : xi) x = rng.normal();
  return xi;
}

std::vector<double> log_diffusivity(const KLBasis& basis, std::span<const double> xi,
                                    const GPConfig& cfg) {
  require(xi.size() == basis.n_dim(), "xi has length " + std::to_string(xi.size()) +
                                          " but the KL basis has n_dim = " +
                                          std::to_string(basis.n_dim()));
  const std::size_t n_z = basis.n_z();
  std::vector<double> y(n_z, cfg.mu_y);
  for (std::size_t i = 0; i < basis.n_dim(); ++i) {
    const double amplitude = std::sqrt(basis.eigenvalues[i]) * xi[i];
    const auto& phi = basis.eigenvectors[i];
    for (std::size_t k = 0; k < n_z; ++k) y[k] += amplitude * phi[k];
  }
  return y;
}

DiffusivityField realize_diffusivity(const KLBasis& basis, std::span<const double> xi,
                                     const GPConfig& cfg, const SpatialGrid& grid) {
  require(grid.size() == basis.n_z(), "KL basis was built for a different grid");
  const std::vector<double> y = log_diffusivity(basis, xi, cfg);
  DiffusivityField field;
  field.kappa.resize(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!(y[k] <= 700.0)) {
      std::ostringstream msg;
      msg << "log-diffusivity Y(z_" << k << ") = " << y[k]
          << " overflows exp(); reduce gp.mu_Y (" << cfg.mu_y << ") or gp.sigma_Y ("
          << cfg.sigma_y << ")";
      fail(ErrorKind::numerical, msg.str());
    }
    field.kappa[k] = cfg.kappa_scale * std::exp(y[k]);
  }
  field.validate();
  return field;
}

}  // namespace adeuq
