#include "mlr/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlr {

namespace {

struct ScaledEigen {
  Eigen::VectorXd scale;        // equilibration diagonal d_i
  Eigen::VectorXd eigenvalues;  // of D^-1 A D^-1, ascending (Eigen order)
  Eigen::MatrixXd eigenvectors;
  double sigma_max = 0.0;       // max |eigenvalue|
};

ScaledEigen scaled_eigen(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  ScaledEigen out;
  out.scale.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = A(i, i);
    out.scale[i] = (d > 0.0 && std::isfinite(d)) ? std::sqrt(d) : 1.0;
  }
  Eigen::MatrixXd scaled =
      out.scale.cwiseInverse().asDiagonal() * A * out.scale.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  out.sigma_max = out.eigenvalues.cwiseAbs().maxCoeff();
  return out;
}

Eigen::VectorXd descending_abs(const Eigen::VectorXd& v) {
  Eigen::VectorXd s = v.cwiseAbs();
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  return s;
}

// Orthonormal basis of the null space in the original variables.
Eigen::MatrixXd null_basis_original(const ScaledEigen& se, double thr) {
  const Eigen::Index n = se.eigenvalues.size();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(se.eigenvalues[i]) <= thr) idx.push_back(i);
  Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k)
    basis.col(static_cast<Eigen::Index>(k)) =
        se.scale.cwiseInverse().asDiagonal() * se.eigenvectors.col(idx[k]);
  if (basis.cols() == 0) return basis;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, basis.cols());
  return q;
}

}  // namespace

RegressionSolution solve_normal_system(const NormalSystem& system, double rtol,
                                       std::optional<double> g_squared) {
  if (rtol <= 0.0 || rtol >= 1.0) throw std::invalid_argument("rtol must be in (0,1)");
  const Eigen::Index n = system.matrix_A.rows();
  if (system.matrix_A.cols() != n || system.rhs.size() != n)
    throw std::invalid_argument("normal system shape mismatch");

  const ScaledEigen se = scaled_eigen(system.matrix_A);
  const double thr = rtol * se.sigma_max;
  const Eigen::VectorXd rhs_scaled = se.scale.cwiseInverse().asDiagonal() * system.rhs;

  Eigen::VectorXd theta_scaled = Eigen::VectorXd::Zero(n);
  int rank = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = se.eigenvalues[i];
    if (std::abs(lambda) <= thr || se.sigma_max == 0.0) continue;
    ++rank;
    theta_scaled += (se.eigenvectors.col(i).dot(rhs_scaled) / lambda) * se.eigenvectors.col(i);
  }
  Eigen::VectorXd theta = se.scale.cwiseInverse().asDiagonal() * theta_scaled;

  RegressionSolution sol;
  sol.rank = rank;
  sol.min_norm_applied = rank < n;
  if (sol.min_norm_applied) {
    const Eigen::MatrixXd nb = null_basis_original(se, thr);
    theta -= nb * (nb.transpose() * theta);
  }
  sol.w = theta.head(n - 1);
  sol.b = theta[n - 1];
  sol.singular_values = descending_abs(se.eigenvalues);
  if (g_squared) {
    const double loss = *g_squared - 2.0 * theta.dot(system.rhs) +
                        theta.dot(system.matrix_A * theta);
    sol.residual_rms = std::sqrt(std::max(0.0, loss));
  } else {
    sol.residual_rms = std::numeric_limits<double>::quiet_NaN();
  }
  return sol;
}

RegressionSolution solve_from_data(const Eigen::MatrixXd& X, const Eigen::VectorXd& g_values,
                                   double rtol) {
  if (rtol <= 0.0 || rtol >= 1.0) throw std::invalid_argument("rtol must be in (0,1)");
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (g_values.size() != n) throw std::invalid_argument("g_values length must equal N");
  if (n < 1) throw std::invalid_argument("need at least one sample");

  Eigen::MatrixXd design(n, d + 1);
  design.leftCols(d) = X;
  design.col(d).setOnes();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  const double thr = rtol * smax;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] <= thr || smax == 0.0) continue;
    ++rank;
    theta += (svd.matrixU().col(i).dot(g_values) / sv[i]) * svd.matrixV().col(i);
  }

  RegressionSolution sol;
  sol.w = theta.head(d);
  sol.b = theta[d];
  sol.rank = rank;
  sol.min_norm_applied = rank < d + 1;
  sol.singular_values = Eigen::VectorXd::Zero(d + 1);
  sol.singular_values.head(sv.size()) = sv;
  std::sort(sol.singular_values.data(), sol.singular_values.data() + d + 1,
            std::greater<double>());
  sol.residual_rms = (design * theta - g_values).norm() / std::sqrt(static_cast<double>(n));
  return sol;
}

RegressionSolution solve_from_data(const SampleSet& samples, const Eigen::VectorXd& g_values,
                                   double rtol) {
  return solve_from_data(samples.points, g_values, rtol);
}

DegeneracyReport diagnose_degeneracy(const NormalSystem& system, double rtol) {
  if (rtol <= 0.0 || rtol >= 1.0) throw std::invalid_argument("rtol must be in (0,1)");
  const ScaledEigen se = scaled_eigen(system.matrix_A);
  const double thr = rtol * se.sigma_max;

  DegeneracyReport report;
  report.null_space_basis = null_basis_original(se, thr);
  report.rank = static_cast<int>(se.eigenvalues.size() - report.null_space_basis.cols());
  if (report.empty()) return report;

  // A coordinate axis is flat when it lies (numerically) inside the null
  // space: the norm of its projection is the best |v . e_i| over unit null
  // vectors v.
  const Eigen::Index n = se.eigenvalues.size();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {  // bias axis excluded
    const double proj = report.null_space_basis.row(i).norm();
    if (proj > 1.0 - 1e-6) report.flat_coordinates.push_back(static_cast<int>(i));
  }
  return report;
}

Eigen::VectorXd evaluate(const RegressionSolution& solution, const Eigen::MatrixXd& points) {
  if (points.cols() != solution.w.size())
    throw std::invalid_argument("point dimension does not match solution");
  return (points * solution.w).array() + solution.b;
}

}  // namespace mlr
