#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlr/polynomial.hpp"

namespace mlr {

/// Raised by prediction formulas when the curvature quantity they divide by
/// is zero. Solvers treat the same situation as a reported state instead.
struct FlatDirection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Correction {
  int coordinate;  // 0-based coordinate index, -1 for the bias
  double value;
  std::string description;
};

/// Closed-form leading-order regression coefficients.
///
/// w_leading already contains the curvature-induced terms (they are O(1));
/// b_leading is g(0). Corrections with coordinate == -1 are patch-size
/// dependent bias terms to be *added* to b_leading (see predicted_b);
/// corrections with coordinate >= 0 document terms already inside
/// w_leading. error_order_exponents[i] is the L-exponent of the residual
/// for coefficient i (bias last).
struct TheoryPrediction {
  Eigen::VectorXd w_leading;
  double b_leading = 0.0;
  std::vector<Correction> corrections;
  std::vector<int> error_order_exponents;

  double predicted_b() const;
};

/// Curve (x, kappa x^2): w_x = g_x(0), w_y = g_y(0) + g_xx(0)/(2 kappa),
/// b = g(0); residuals O(L^2), O(L^2), O(L^4).
TheoryPrediction predict_curve2d(const Polynomial& g, double kappa);

/// Noisy curve: w_y = g_y(0) + (1/2) kappa L^4 / (kappa^2 L^4 + 45/4 sigma^2)
/// * g_xx(0).
double predict_curve2d_noisy(const Polynomial& g, double kappa, double L, double sigma);

/// Hypersurface y = sum_i kappa_i x_i^2: w_i = g_i(0),
/// w_y = g_y(0) + (1/2) sum_i kappa_i g_ii(0) / sum_i kappa_i^2,
/// b = g(0) + (L^2/6) sum_i g_ii(0) (sum_{j!=i} kappa_j^2 - kappa_i
/// sum_{j!=i} kappa_j) / sum_k kappa_k^2 (recorded as a bias correction).
TheoryPrediction predict_hypersurface(const Polynomial& g, const Eigen::VectorXd& kappas,
                                      double L);

/// Curve (x, k2 x^2, k3 x^3) in R^3.
TheoryPrediction predict_curve3d(const Polynomial& g, double k2, double k3);

/// Ordered compositions of n (all positive-integer sequences summing to n),
/// lexicographic order; |A_n| = 2^{n-1}.
struct IndexSequenceSet {
  int n = 0;
  std::vector<std::vector<int>> sequences;
};
IndexSequenceSet enumerate_index_sequences(int n);

struct CurveNdPrediction {
  double w_n_leading = 0.0;
  int error_exponent = 0;
};

/// Leading-order coefficient for direction n of a curve (x, k2 x^2, ...,
/// kd x^d) in R^d:
///   w_n = sum over compositions {j_i} of n of
///         (prod_i k_{j_i}) / (m! k_n) * d^m g / dx_{j_1}..dx_{j_m} (0),
/// with m the composition length. ks holds k_1..k_d with k_1 = 1.
CurveNdPrediction predict_curve_nd(const Polynomial& g, const Eigen::VectorXd& ks, int n,
                                   int d);

/// Residual exponent 2(ceil(d/2) - floor(n/2)) for w_n.
/// Edge cases are inherited from the derivation: for even d the exponent is
/// 0 at n = d, and for odd d the matched-expansion argument suggests d-1
/// for n = 1 where this formula gives d+1 rounded up to even; measured
/// rates are reported by the validation experiment instead of being assumed.
int error_order(int n, int d);
/// Residual exponent 2 ceil(d/2) for the bias.
int error_order_bias(int d);

/// Leading-order w_{y2} for a codimension-2 manifold flat along y2 with
/// Gaussian noise sigma on that coordinate: returns dg/dy2(0); the omitted
/// correction is O(sigma^2) (plus the patch-average term when dg/dy2 varies
/// over the patch). y2 is the last ambient coordinate.
double predict_codim2_noisy_wy2(const Polynomial& g, double sigma);

}  // namespace mlr
