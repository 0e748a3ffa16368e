#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace mlr {

/// Raised when a curve's derivatives cannot support a Frenet frame
/// (vanishing speed or curvature pivot below tolerance).
struct DegenerateFrame : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rigid change of coordinates x -> Q x + t0.
struct LocalFrame {
  Eigen::MatrixXd rotation_Q;
  Eigen::VectorXd translation_t0;

  LocalFrame(Eigen::MatrixXd Q, Eigen::VectorXd t0);
  LocalFrame inverse() const;

  nlohmann::json to_json() const;
};

/// Maps a minimizer of the original problem to the minimizer of the
/// transformed problem: (w, b) -> (Q w, b - (Q w) . t0).
std::pair<Eigen::VectorXd, double> transform_solution(const Eigen::VectorXd& w, double b,
                                                      const LocalFrame& frame);

/// Eigenvalues (descending) of a symmetric Hessian together with the
/// orthogonal diagonalizer. Raw eigenvalues are returned; a quadratic graph
/// written as sum kappa_i x_i^2 carries the conventional 1/2 inside kappa.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> principal_curvatures(const Eigen::MatrixXd& hessian);

/// Moving orthonormal frame of a curve with its generalized curvatures.
/// basis_V columns are V_1 = T, V_2 = N, V_3 = B, ...; alphas holds
/// alpha_2..alpha_d (alpha_2 = curvature, alpha_3 = torsion in R^3).
/// alpha_2..alpha_{d-1} are positive by construction; the frame is
/// right-handed and the last curvature carries the orientation sign.
struct FrenetFrame {
  Eigen::MatrixXd basis_V;  // d x d, columns orthonormal
  Eigen::VectorXd alphas;   // length d-1: alpha_2..alpha_d

  int dim() const { return static_cast<int>(basis_V.rows()); }
  nlohmann::json to_json() const;
};

/// Frame from r', r'', r''' at a point (any regular parameterization).
FrenetFrame frenet_frame_3d(const Eigen::Vector3d& d1, const Eigen::Vector3d& d2,
                            const Eigen::Vector3d& d3);

/// Frame in R^d from the first d derivatives (columns of derivs).
/// The first d-1 derivatives must be independent; the d-th direction is
/// completed by orientation and its curvature may be zero.
FrenetFrame generalized_frenet(const Eigen::MatrixXd& derivs);

/// k_n = (1/n!) prod_{i<=n} alpha_i with alpha_1 = 1; input alpha_2..alpha_d,
/// output k_2..k_d.
Eigen::VectorXd nonlinear_quantities(const Eigen::VectorXd& alphas);

/// Centered SVD of a dataset.
struct PcaSpectrum {
  Eigen::VectorXd singular_values;  // non-increasing
  Eigen::MatrixXd components;       // orthonormal columns q_1..q_r
  Eigen::VectorXd mean;

  void write_csv(std::ostream& os) const;  // index, singular_value
};

PcaSpectrum pca_spectrum(const Eigen::MatrixXd& data);

/// Coordinates of the centered data in the leading-r component basis.
Eigen::MatrixXd project_onto(const Eigen::MatrixXd& data, const PcaSpectrum& spectrum, int r);

/// Vector polynomial curve r(t), one coefficient row per ambient coordinate:
/// r_i(t) = sum_j coeffs(i, j) t^j. Derivatives are exact.
class PolyCurve {
 public:
  explicit PolyCurve(Eigen::MatrixXd coeffs);

  int dim() const { return static_cast<int>(coeffs_.rows()); }
  Eigen::VectorXd value(double t) const;
  Eigen::VectorXd derivative(double t, int order) const;
  /// Columns r'(t) ... r^(count)(t).
  Eigen::MatrixXd derivatives(double t, int count) const;

  static PolyCurve helix(double a, double b_pitch);

 private:
  Eigen::MatrixXd coeffs_;
};

}  // namespace mlr
