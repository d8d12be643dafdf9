#include "adeuq/pce.hpp"

#include <algorithm>
#include <string>

#include "adeuq/error.hpp"

namespace adeuq {

namespace {

// Appends, in lexicographic order, every index whose entries from `pos` on
// sum to exactly `remaining`.
void enumerate_degree(std::size_t pos, unsigned remaining, MultiIndex& current,
                      std::vector<MultiIndex>& out) {
  if (pos + 1 == current.size()) {
    current[pos] = remaining;
    out.push_back(current);
    return;
  }
  for (unsigned head = 0; head <= remaining; ++head) {
    current[pos] = head;
    enumerate_degree(pos + 1, remaining - head, current, out);
  }
}

}  // namespace

MultiIndexSet::MultiIndexSet(std::size_t n_dim, std::size_t max_degree)
    : n_dim_(n_dim), max_degree_(max_degree) {
  require(n_dim >= 1, "multi-index set needs n_dim >= 1");
  indices_.reserve(binomial(n_dim + max_degree, n_dim));
  MultiIndex current(n_dim, 0);
  for (std::size_t degree = 0; degree <= max_degree; ++degree)
    enumerate_degree(0, static_cast<unsigned>(degree), current, indices_);
}

std::string MultiIndexSet::canonical_string() const {
  std::string out;
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    if (j) out += ';';
    for (std::size_t i = 0; i < n_dim_; ++i) {
      if (i) out += ',';
      out += std::to_string(indices_[j][i]);
    }
  }
  return out;
}

MultiIndexSet multi_index_set(std::size_t n_dim, std::size_t max_degree) {
  return MultiIndexSet(n_dim, max_degree);
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

double hermite_eval(unsigned k, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0;
  double curr = x;
  for (unsigned j = 1; j < k; ++j) {
    const double next = x * curr - static_cast<double>(j) * prev;
    prev = curr;
    curr = next;
  }
  return curr;
}

double psi_eval(const MultiIndex& alpha, std::span<const double> xi) {
  require(alpha.size() == xi.size(), "psi_eval: multi-index has length " +
                                         std::to_string(alpha.size()) + " but xi has length " +
                                         std::to_string(xi.size()));
  double product = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) product *= hermite_eval(alpha[i], xi[i]);
  return product;
}

double psi_norm_sq(const MultiIndex& alpha) {
  double product = 1.0;
  for (const unsigned degree : alpha)
    for (unsigned j = 2; j <= degree; ++j) product *= static_cast<double>(j);
  return product;
}

std::vector<double> basis_values(const MultiIndexSet& set, std::span<const double> xi) {
  require(xi.size() == set.n_dim(), "xi has length " + std::to_string(xi.size()) +
                                        " but the PCE set has n_dim = " +
                                        std::to_string(set.n_dim()));
  // He_k(xi_i) for every dimension up to the maximum degree, then products.
  const std::size_t stride = set.max_degree() + 1;
  std::vector<double> table(set.n_dim() * stride);
  for (std::size_t i = 0; i < set.n_dim(); ++i)
    for (std::size_t k = 0; k < stride; ++k)
      table[i * stride + k] = hermite_eval(static_cast<unsigned>(k), xi[i]);

  std::vector<double> values(set.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    double product = 1.0;
    for (std::size_t i = 0; i < set.n_dim(); ++i) product *= table[i * stride + set[j][i]];
    values[j] = product;
  }
  return values;
}

double pce_eval(std::span<const double> coeffs, const MultiIndexSet& set,
                std::span<const double> xi) {
  require(coeffs.size() == set.size(), "pce_eval: " + std::to_string(coeffs.size()) +
                                           " coefficients for a basis of " +
                                           std::to_string(set.size()) + " terms");
  const std::vector<double> psi = basis_values(set, xi);
  double sum = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) sum += coeffs[j] * psi[j];
  return sum;
}

PCECoefficients::PCECoefficients(std::size_t n_points, std::size_t n_terms)
    : n_points_(n_points), n_terms_(n_terms), data_(n_points * n_terms, 0.0) {}

PCECoefficients::PCECoefficients(std::size_t n_points, std::size_t n_terms,
                                 std::vector<double> data)
    : n_points_(n_points), n_terms_(n_terms), data_(std::move(data)) {
  require(data_.size() == n_points_ * n_terms_, "PCE coefficient buffer has the wrong size");
}

std::vector<double> pce_mean(const PCECoefficients& coeffs, const MultiIndexSet& set) {
  require(coeffs.n_terms() == set.size(), "coefficients do not match the PCE set");
  std::vector<double> mean(coeffs.n_points());
  for (std::size_t p = 0; p < coeffs.n_points(); ++p) mean[p] = coeffs.at(p)[0];
  return mean;
}

std::vector<double> pce_variance(const PCECoefficients& coeffs, const MultiIndexSet& set) {
  require(coeffs.n_terms() == set.size(), "coefficients do not match the PCE set");
  std::vector<double> norms(set.size());
  for (std::size_t j = 0; j < set.size(); ++j) norms[j] = psi_norm_sq(set[j]);

  std::vector<double> variance(coeffs.n_points(), 0.0);
  for (std::size_t p = 0; p < coeffs.n_points(); ++p) {
    const auto c = coeffs.at(p);
    double sum = 0.0;
    for (std::size_t j = 1; j < set.size(); ++j) sum += c[j] * c[j] * norms[j];
    variance[p] = sum;
  }
  return variance;
}

}  // namespace adeuq
