#pragma once

// Shared helpers and independent oracles for the test suites. Everything
// here stays deliberately naive so it cross-checks the library paths
// rather than reusing them.

#include <Eigen/Dense>
#include <vector>

#include "mlr/frames.hpp"
#include "mlr/polynomial.hpp"
#include "mlr/rng.hpp"

namespace testsup {

inline bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

// Haar-ish random rotation with det +1 (QR of a Gaussian matrix,
// sign-fixed, then one column flipped if needed).
inline Eigen::MatrixXd random_rotation(int n, mlr::Rng& rng) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  if (q.determinant() < 0) q.col(n - 1) = -q.col(n - 1);
  return q;
}

// Brute-force least squares by explicit normal equations and Gaussian
// elimination with partial pivoting (independent of the SVD paths).
inline std::pair<Eigen::VectorXd, double> lstsq_oracle(const Eigen::MatrixXd& X,
                                                       const Eigen::VectorXd& g) {
  const int d = static_cast<int>(X.cols());
  Eigen::MatrixXd B(X.rows(), d + 1);
  B.leftCols(d) = X;
  B.col(d).setOnes();
  Eigen::MatrixXd A = B.transpose() * B;
  Eigen::VectorXd r = B.transpose() * g;

  const int n = d + 1;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row)
      if (std::abs(A(row, col)) > std::abs(A(pivot, col))) pivot = row;
    A.row(col).swap(A.row(pivot));
    std::swap(r[col], r[pivot]);
    for (int row = col + 1; row < n; ++row) {
      const double f = A(row, col) / A(col, col);
      A.row(row) -= f * A.row(col);
      r[row] -= f * r[col];
    }
  }
  Eigen::VectorXd theta(n);
  for (int row = n - 1; row >= 0; --row) {
    double s = r[row];
    for (int col = row + 1; col < n; ++col) s -= A(row, col) * theta[col];
    theta[row] = s / A(row, row);
  }
  return {theta.head(d), theta[d]};
}

// Ordered compositions of n via the bitmask-of-cuts bijection: bit i of the
// mask decides whether a cut is placed after position i+1 of 1+1+...+1.
inline std::vector<std::vector<int>> compositions_bitmask(int n) {
  std::vector<std::vector<int>> out;
  for (unsigned long mask = 0; mask < (1UL << (n - 1)); ++mask) {
    std::vector<int> comp;
    int run = 1;
    for (int i = 0; i < n - 1; ++i) {
      if (mask & (1UL << i)) {
        comp.push_back(run);
        run = 1;
      } else {
        ++run;
      }
    }
    comp.push_back(run);
    out.push_back(comp);
  }
  return out;
}

// Classical Gram-Schmidt Frenet oracle: normalize-and-subtract loops over
// the derivative columns, last direction completed by orientation.
struct FrenetOracle {
  Eigen::MatrixXd V;
  Eigen::VectorXd alphas;
};

inline FrenetOracle frenet_gs_oracle(const Eigen::MatrixXd& derivs) {
  const int d = static_cast<int>(derivs.rows());
  Eigen::MatrixXd V(d, d);
  Eigen::VectorXd pivots(d);
  for (int j = 0; j < d - 1; ++j) {
    Eigen::VectorXd u = derivs.col(j);
    for (int k = 0; k < j; ++k) u -= u.dot(V.col(k)) * V.col(k);
    pivots[j] = u.norm();
    V.col(j) = u / pivots[j];
  }
  {
    Eigen::VectorXd u = derivs.col(d - 1);
    for (int k = 0; k < d - 1; ++k) u -= u.dot(V.col(k)) * V.col(k);
    if (u.norm() > 1e-12 * derivs.colwise().norm().maxCoeff()) {
      V.col(d - 1) = u / u.norm();
    } else {
      // complete the basis from a coordinate axis
      for (int axis = 0; axis < d; ++axis) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(d, axis);
        for (int k = 0; k < d - 1; ++k) e -= e.dot(V.col(k)) * V.col(k);
        if (e.norm() > 0.5) {
          V.col(d - 1) = e / e.norm();
          break;
        }
      }
    }
    if (V.determinant() < 0) V.col(d - 1) = -V.col(d - 1);
    pivots[d - 1] = derivs.col(d - 1).dot(V.col(d - 1));
  }
  FrenetOracle oracle;
  oracle.V = V;
  oracle.alphas.resize(d - 1);
  for (int j = 1; j < d; ++j)
    oracle.alphas[j - 1] = pivots[j] / (pivots[j - 1] * pivots[0]);
  return oracle;
}

// Max residual of the Frenet frame equations d/ds V_1 = a2 V_2,
// d/ds V_i = -a_i V_{i-1} + a_{i+1} V_{i+1}, d/ds V_d = -a_d V_{d-1},
// with frame derivatives from 4th-order central differences along t.
inline double frenet_relation_residual(const mlr::PolyCurve& curve, double t,
                                       double h = 1e-3) {
  const int d = curve.dim();
  auto frame_at = [&](double tt) { return mlr::generalized_frenet(curve.derivatives(tt, d)); };
  const mlr::FrenetFrame f0 = frame_at(t);
  const Eigen::MatrixXd vp2 = frame_at(t + 2 * h).basis_V;
  const Eigen::MatrixXd vp1 = frame_at(t + h).basis_V;
  const Eigen::MatrixXd vm1 = frame_at(t - h).basis_V;
  const Eigen::MatrixXd vm2 = frame_at(t - 2 * h).basis_V;
  const Eigen::MatrixXd dV_dt = (-vp2 + 8 * vp1 - 8 * vm1 + vm2) / (12 * h);
  const double speed = curve.derivative(t, 1).norm();
  const Eigen::MatrixXd dV_ds = dV_dt / speed;

  double residual = 0.0;
  const auto& V = f0.basis_V;
  const auto& a = f0.alphas;  // a[i] = alpha_{i+2}
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(d);
    if (i > 0) expected -= a[i - 1] * V.col(i - 1);
    if (i < d - 1) expected += a[i] * V.col(i + 1);
    residual = std::max(residual, (dV_ds.col(i) - expected).cwiseAbs().maxCoeff());
  }
  return residual;
}

// Demo target 2x^2 + 2y^2 + 6xy + 3x + 4y + 10 rebuilt locally so tests do
// not depend on the experiments module for it.
inline mlr::Polynomial toy_target() {
  mlr::Polynomial g(2);
  g.add_term({2, 0}, 2.0);
  g.add_term({0, 2}, 2.0);
  g.add_term({1, 1}, 6.0);
  g.add_term({1, 0}, 3.0);
  g.add_term({0, 1}, 4.0);
  g.add_term({0, 0}, 10.0);
  return g;
}

}  // namespace testsup
