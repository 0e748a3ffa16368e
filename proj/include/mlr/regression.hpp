#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "mlr/manifold.hpp"
#include "mlr/moments.hpp"

namespace mlr {

/// Solved least-squares coefficients. residual_rms is NaN when the solve
/// path cannot compute it (normal system without <g^2>).
struct RegressionSolution {
  Eigen::VectorXd w;
  double b = 0.0;
  int rank = 0;
  Eigen::VectorXd singular_values;  // descending, length d+1
  bool min_norm_applied = false;
  double residual_rms = 0.0;
};

struct DegeneracyReport {
  int rank = 0;
  Eigen::MatrixXd null_space_basis;   // orthonormal columns in R^{d+1}
  std::vector<int> flat_coordinates;  // coordinate indices (bias excluded)

  bool empty() const { return null_space_basis.cols() == 0; }
};

/// Solves A [w; b] = rhs by eigendecomposition of the symmetric system.
///
/// The matrix is diagonally equilibrated first: moment matrices are graded
/// (entries carry different powers of the patch size), and the scaling keeps
/// small-curvature systems solvable at full precision while exact flat
/// directions stay at singular value zero. Scaled singular values below
/// rtol * max are treated as zero; rank-deficient systems get the
/// minimum-Euclidean-norm solution in the original variables.
/// singular_values reports the equilibrated spectrum.
RegressionSolution solve_normal_system(const NormalSystem& system, double rtol = 1e-10,
                                       std::optional<double> g_squared = {});

/// Least-squares fit of [X | 1] against g via SVD of the design matrix.
RegressionSolution solve_from_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& g_values,
                                   double rtol = 1e-10);
RegressionSolution solve_from_data(const SampleSet& samples, const Eigen::VectorXd& g_values,
                                   double rtol = 1e-10);

/// Rank, null-space basis and the coordinate axes lying in the null space.
DegeneracyReport diagnose_degeneracy(const NormalSystem& system, double rtol = 1e-10);

/// w . x + b per row.
Eigen::VectorXd evaluate(const RegressionSolution& solution, const Eigen::MatrixXd& points);

}  // namespace mlr
