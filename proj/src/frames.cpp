#include "mlr/frames.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "mlr/csvio.hpp"

namespace mlr {

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

LocalFrame::LocalFrame(Eigen::MatrixXd Q, Eigen::VectorXd t0)
    : rotation_Q(std::move(Q)), translation_t0(std::move(t0)) {
  if (rotation_Q.rows() != rotation_Q.cols())
    throw std::invalid_argument("rotation must be square");
  if (translation_t0.size() != rotation_Q.rows())
    throw std::invalid_argument("translation dimension must match rotation");
  const Eigen::MatrixXd gram = rotation_Q.transpose() * rotation_Q;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(rotation_Q.rows(), rotation_Q.cols());
  if ((gram - eye).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("rotation is not orthogonal");
}

LocalFrame LocalFrame::inverse() const {
  return LocalFrame(rotation_Q.transpose(), -(rotation_Q.transpose() * translation_t0));
}

nlohmann::json LocalFrame::to_json() const {
  return {{"rotation_Q", matrix_json(rotation_Q)},
          {"translation_t0", vector_json(translation_t0)}};
}

std::pair<Eigen::VectorXd, double> transform_solution(const Eigen::VectorXd& w, double b,
                                                      const LocalFrame& frame) {
  if (w.size() != frame.rotation_Q.rows())
    throw std::invalid_argument("solution dimension does not match frame");
  Eigen::VectorXd w_new = frame.rotation_Q * w;
  return {w_new, b - w_new.dot(frame.translation_t0)};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> principal_curvatures(
    const Eigen::MatrixXd& hessian) {
  if (hessian.rows() != hessian.cols()) throw std::invalid_argument("Hessian must be square");
  const double scale = std::max(1.0, hessian.cwiseAbs().maxCoeff());
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("Hessian is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (hessian + hessian.transpose()));
  const Eigen::Index n = hessian.rows();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.eigenvalues()[a] > es.eigenvalues()[b];
  });

  Eigen::VectorXd kappas(n);
  Eigen::MatrixXd rotation(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    kappas[k] = es.eigenvalues()[order[k]];
    Eigen::VectorXd v = es.eigenvectors().col(order[k]);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v[i]) > 1e-12) {
        if (v[i] < 0) v = -v;
        break;
      }
    }
    rotation.col(k) = v;
  }

  // Deterministic column order inside exact eigenvalue ties.
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && kappas[end] == kappas[start]) ++end;
    if (end - start > 1) {
      std::vector<Eigen::Index> cols(end - start);
      std::iota(cols.begin(), cols.end(), start);
      std::sort(cols.begin(), cols.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index i = 0; i < n; ++i) {
          if (rotation(i, a) != rotation(i, b)) return rotation(i, a) > rotation(i, b);
        }
        return false;
      });
      Eigen::MatrixXd block(n, end - start);
      for (Eigen::Index k = 0; k < end - start; ++k) block.col(k) = rotation.col(cols[k]);
      rotation.middleCols(start, end - start) = block;
    }
    start = end;
  }
  return {kappas, rotation};
}

FrenetFrame generalized_frenet(const Eigen::MatrixXd& derivs) {
  const Eigen::Index d = derivs.rows();
  if (derivs.cols() != d) throw std::invalid_argument("need d derivative columns in R^d");
  if (d < 2) throw std::invalid_argument("frame needs dimension >= 2");

  const double dmax = derivs.colwise().norm().maxCoeff();
  if (!(dmax > 0.0)) throw DegenerateFrame("all derivatives vanish");
  const double tol = 1e-10 * dmax;

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(derivs);
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  Eigen::MatrixXd V = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (R(j, j) < 0) {
      R.row(j) = -R.row(j);
      V.col(j) = -V.col(j);
    }
  }
  // In R^2 both directions come from Gram-Schmidt (positive curvature
  // convention); in higher dimension the last direction is completed by
  // orientation and its curvature is signed.
  const Eigen::Index pivots_needed = d == 2 ? 2 : d - 1;
  for (Eigen::Index j = 0; j < pivots_needed; ++j) {
    if (R(j, j) < tol)
      throw DegenerateFrame("derivative " + std::to_string(j + 1) +
                            " adds no new direction (pivot below tolerance)");
  }

  FrenetFrame frame;
  frame.alphas.resize(d - 1);
  const double speed = R(0, 0);
  for (Eigen::Index j = 1; j < d - 1; ++j) frame.alphas[j - 1] = R(j, j) / (R(j - 1, j - 1) * speed);

  if (d == 2) {
    frame.alphas[0] = R(1, 1) / (speed * speed);
  } else {
    if (V.determinant() < 0) V.col(d - 1) = -V.col(d - 1);
    frame.alphas[d - 2] = derivs.col(d - 1).dot(V.col(d - 1)) / (R(d - 2, d - 2) * speed);
  }
  frame.basis_V = V;
  return frame;
}

FrenetFrame frenet_frame_3d(const Eigen::Vector3d& d1, const Eigen::Vector3d& d2,
                            const Eigen::Vector3d& d3) {
  const double dmax = std::max({d1.norm(), d2.norm(), d3.norm()});
  if (!(dmax > 0.0)) throw DegenerateFrame("all derivatives vanish");
  const double tol = 1e-10 * dmax;

  const double speed = d1.norm();
  if (speed < tol) throw DegenerateFrame("zero velocity");
  const Eigen::Vector3d T = d1 / speed;

  const Eigen::Vector3d n_raw = d2 - d2.dot(T) * T;
  const double n_norm = n_raw.norm();
  if (n_norm < tol) throw DegenerateFrame("vanishing curvature");
  const Eigen::Vector3d N = n_raw / n_norm;
  const Eigen::Vector3d B = T.cross(N);

  FrenetFrame frame;
  frame.basis_V.resize(3, 3);
  frame.basis_V << T, N, B;
  frame.alphas.resize(2);
  frame.alphas[0] = n_norm / (speed * speed);       // curvature
  frame.alphas[1] = d3.dot(B) / (n_norm * speed);   // torsion, signed by B
  return frame;
}

nlohmann::json FrenetFrame::to_json() const {
  return {{"basis_V", matrix_json(basis_V)}, {"alphas", vector_json(alphas)}};
}

Eigen::VectorXd nonlinear_quantities(const Eigen::VectorXd& alphas) {
  Eigen::VectorXd ks(alphas.size());
  double prod = 1.0;       // alpha_1 = 1
  double factorial = 1.0;  // 1!
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    prod *= alphas[i];
    factorial *= static_cast<double>(i + 2);
    ks[i] = prod / factorial;
  }
  return ks;
}

PcaSpectrum pca_spectrum(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) throw std::invalid_argument("PCA needs at least two rows");
  PcaSpectrum spectrum;
  spectrum.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - spectrum.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  spectrum.singular_values = svd.singularValues();
  spectrum.components = svd.matrixV();
  return spectrum;
}

Eigen::MatrixXd project_onto(const Eigen::MatrixXd& data, const PcaSpectrum& spectrum, int r) {
  if (r < 1 || r > spectrum.components.cols())
    throw std::invalid_argument("projection rank out of range");
  if (data.cols() != spectrum.components.rows())
    throw std::invalid_argument("data dimension does not match spectrum");
  return (data.rowwise() - spectrum.mean.transpose()) * spectrum.components.leftCols(r);
}

void PcaSpectrum::write_csv(std::ostream& os) const {
  os << "index,singular_value\r\n";
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    os << (i + 1) << ',' << csv::format_double(singular_values[i]) << "\r\n";
}

PolyCurve::PolyCurve(Eigen::MatrixXd coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.rows() < 2 || coeffs_.cols() < 1)
    throw std::invalid_argument("curve needs >= 2 coordinates and >= 1 coefficient");
}

Eigen::VectorXd PolyCurve::value(double t) const { return derivative(t, 0); }

Eigen::VectorXd PolyCurve::derivative(double t, int order) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(coeffs_.rows());
  for (Eigen::Index j = order; j < coeffs_.cols(); ++j) {
    double factor = 1.0;
    for (int k = 0; k < order; ++k) factor *= static_cast<double>(j - k);
    out += coeffs_.col(j) * (factor * std::pow(t, static_cast<double>(j - order)));
  }
  return out;
}

Eigen::MatrixXd PolyCurve::derivatives(double t, int count) const {
  Eigen::MatrixXd out(coeffs_.rows(), count);
  for (int k = 1; k <= count; ++k) out.col(k - 1) = derivative(t, k);
  return out;
}

}  // namespace mlr
