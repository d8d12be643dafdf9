#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace adeuq {

using MultiIndex = std::vector<unsigned>;

/// Total-degree multi-index set { alpha : |alpha|_1 <= max_degree }.
///
/// Ordering is ascending total degree, then ascending lexicographic order
/// within a degree, e.g. for n_dim = 2, max_degree = 2:
///   [0,0] [0,1] [1,0] [0,2] [1,1] [2,0]
/// Element 0 is always the all-zeros index (the mean term).
class MultiIndexSet {
 public:
  MultiIndexSet(std::size_t n_dim, std::size_t max_degree);

  std::size_t n_dim() const { return n_dim_; }
  std::size_t max_degree() const { return max_degree_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t j) const { return indices_[j]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  /// Canonical text form, e.g. "0,0;0,1;1,0". Used for checkpoint hashing.
  std::string canonical_string() const;

 private:
  std::size_t n_dim_;
  std::size_t max_degree_;
  std::vector<MultiIndex> indices_;
};

MultiIndexSet multi_index_set(std::size_t n_dim, std::size_t max_degree);

/// C(n + k, n) without overflow for the sizes used here.
std::size_t binomial(std::size_t n, std::size_t k);

/// Probabilists' Hermite He_k(x): He_{k+1} = x He_k - k He_{k-1}.
double hermite_eval(unsigned k, double x);

/// Psi_alpha(xi) = prod_i He_{alpha_i}(xi_i).
double psi_eval(const MultiIndex& alpha, std::span<const double> xi);

/// E[Psi_alpha^2] = prod_i alpha_i!.
double psi_norm_sq(const MultiIndex& alpha);

/// Psi_alpha(xi) for every alpha in the set, in set order.
std::vector<double> basis_values(const MultiIndexSet& set, std::span<const double> xi);

double pce_eval(std::span<const double> coeffs, const MultiIndexSet& set,
                std::span<const double> xi);

/// Coefficient vectors C_alpha at a list of grid points, point-major:
/// data[p * n_terms + j] is the coefficient of set[j] at point p.
class PCECoefficients {
 public:
  PCECoefficients(std::size_t n_points, std::size_t n_terms);
  PCECoefficients(std::size_t n_points, std::size_t n_terms, std::vector<double> data);

  std::size_t n_points() const { return n_points_; }
  std::size_t n_terms() const { return n_terms_; }
  std::span<const double> at(std::size_t p) const { return {data_.data() + p * n_terms_, n_terms_}; }
  std::span<double> at(std::size_t p) { return {data_.data() + p * n_terms_, n_terms_}; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t n_points_;
  std::size_t n_terms_;
  std::vector<double> data_;
};

/// Mean at every point: the coefficient of the all-zeros index.
std::vector<double> pce_mean(const PCECoefficients& coeffs, const MultiIndexSet& set);

/// Var at every point: sum over alpha != 0 of C_alpha^2 E[Psi_alpha^2].
std::vector<double> pce_variance(const PCECoefficients& coeffs, const MultiIndexSet& set);

}  // namespace adeuq
