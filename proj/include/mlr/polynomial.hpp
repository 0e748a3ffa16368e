#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlr/rng.hpp"

namespace mlr {

struct PolyTerm {
  std::vector<int> exponents;  // one entry per ambient coordinate
  double coeff;
};

/// Multivariate polynomial with exact coefficients; the target functions
/// all formula modules consume. Differentiation is exact (no truncation).
class Polynomial {
 public:
  explicit Polynomial(int ambient_dim);

  static Polynomial constant(int ambient_dim, double c);
  static Polynomial monomial(int ambient_dim, std::vector<int> exponents, double c);

  /// Adds c * x^exponents, merging with an existing term if present.
  void add_term(const std::vector<int>& exponents, double c);

  int ambient_dim() const { return ambient_dim_; }
  int degree() const;
  const std::vector<PolyTerm>& terms() const { return terms_; }

  double operator()(const Eigen::VectorXd& x) const;
  /// Evaluates on every row of an N x ambient_dim matrix.
  Eigen::VectorXd evaluate_rows(const Eigen::MatrixXd& points) const;

  Polynomial partial_derivative(const std::vector<int>& multi_index) const;
  Polynomial partial_derivative(int coordinate, int times = 1) const;

  /// Value of the mixed partial named by multi_index at the origin.
  double derivative_at_zero(const std::vector<int>& multi_index) const;
  double at_zero() const;

  std::string to_string(const std::vector<std::string>& names = {}) const;

  nlohmann::json to_json() const;
  static Polynomial from_json(const nlohmann::json& j);

 private:
  int ambient_dim_;
  std::vector<PolyTerm> terms_;  // unique exponent vectors, kept sorted
};

/// Dense random polynomial: every monomial up to max_degree gets a
/// coefficient with magnitude in [mag_lo, mag_hi] and random sign.
Polynomial random_polynomial(int ambient_dim, int max_degree, Rng& rng,
                             double mag_lo = 0.25, double mag_hi = 2.0);

}  // namespace mlr
