#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "mlr/manifold.hpp"
#include "mlr/polynomial.hpp"

namespace mlr {

struct Provenance {
  enum class Kind { Analytic, Quadrature, Empirical };
  Kind kind = Kind::Analytic;
  int order = 0;  // quadrature order
  long n = 0;     // sample count
  std::string to_string() const;
};

/// Averaged correlations of the ambient coordinates and the target:
/// <x_i x_j>, <x_i>, <g x_i>, <g>, optionally <g^2> for residual reporting.
struct MomentTable {
  Eigen::MatrixXd second_moments;
  Eigen::VectorXd first_moments;
  Eigen::VectorXd rhs_gx;
  double rhs_g = 0.0;
  std::optional<double> g_squared;
  Provenance provenance;
  std::vector<std::string> coordinate_labels;

  int dim() const { return static_cast<int>(first_moments.size()); }
  void write_csv(std::ostream& os) const;
};

/// The (d+1)x(d+1) least-squares system: A [w; b] = rhs.
struct NormalSystem {
  Eigen::MatrixXd matrix_A;
  Eigen::VectorXd rhs;
  std::vector<std::string> coordinate_labels;  // d coordinates plus "bias"

  int dim() const { return static_cast<int>(matrix_A.rows()); }
  void write_csv(std::ostream& os) const;
};

/// Moment of a monomial under U([-L,L]^k): prod_i L^p_i/(p_i+1) when every
/// exponent is even, zero otherwise.
double analytic_moment_uniform(const std::vector<int>& exponents, double L);

/// Closed-form hypersurface moments under y = sum_i kappa_i x_i^2.
struct HypersurfaceMoments {
  double mean_y = 0.0;
  double y_squared = 0.0;
  Eigen::VectorXd xj2_y;
  double determinant_D = 0.0;  // <y^2> - <y>^2
};
HypersurfaceMoments hypersurface_moment_table(const Eigen::VectorXd& curvatures, double L);

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Gauss-Legendre rule on [-1,1]; exact for polynomials of degree 2*order-1.
QuadratureRule gauss_legendre(int order);
/// Gauss-Hermite rule for the standard normal weight; exact Gaussian
/// moments of degree 2*order-1.
QuadratureRule gauss_hermite(int order);

/// Node budget guard: order^tangent_dim above this throws.
inline constexpr long kQuadratureNodeBudget = 1L << 22;

/// Smallest order that integrates every normal-system entry exactly for
/// polynomial g on the given manifold.
int default_quadrature_order(const ManifoldSpec& spec, const Polynomial& g);

/// Average of an ambient-space polynomial over the manifold patch,
/// tensor-product Gauss-Legendre over [-L,L]^tangent_dim.
double quadrature_average(const ManifoldSpec& spec, const Polynomial& f, double L, int order);

/// Deterministic moment table via tensor quadrature. order = 0 selects
/// default_quadrature_order.
MomentTable quadrature_moments(const ManifoldSpec& spec, const Polynomial& g, double L,
                               int order = 0);

/// Infinite-sample moments of noisy data: Gaussian noise on each normal
/// coordinate is integrated exactly with Gauss-Hermite nodes.
MomentTable quadrature_moments_noisy(const ManifoldSpec& spec, const Polynomial& g, double L,
                                     const Eigen::VectorXd& sigma_per_normal, int order = 0,
                                     int hermite_order = 0);

/// Arithmetic means over a sample set.
MomentTable empirical_moments(const SampleSet& samples, const Eigen::VectorXd& g_values);

NormalSystem assemble_normal_system(const MomentTable& table);

/// Deterministic pairwise sum (stable reduction order).
double pairwise_sum(const std::vector<double>& values);

}  // namespace mlr
