#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace mlr {

enum class ManifoldKind { Curve2D, Hypersurface, SpaceCurve, CodimK };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& s);

/// Parametric description of a local data manifold in its adapted frame:
/// tangent coordinates are the independent variables, normal coordinates
/// are quadratic (or monomial) functions of them.
///
/// Conventions:
///   Curve2D      (x, kappa x^2)                      tangent_dim 1, ambient 2
///   Hypersurface (x', sum_i kappa_i x_i^2)           codimension 1; the
///                quadratic-graph convention absorbs the 1/2 into kappa_i
///   SpaceCurve   (x, k_2 x^2, ..., k_d x^d)          k_n = (1/n!) prod alpha_i
///   CodimK       normal_j = x'^T F_j x'              one symmetric form per
///                normal direction; flat directions have all-zero forms
struct ManifoldSpec {
  ManifoldKind kind;
  int tangent_dim = 1;
  int ambient_dim = 2;
  Eigen::VectorXd curvatures;              // Curve2D: single kappa; Hypersurface: kappa_1..kappa_{d-1}
  Eigen::VectorXd nonlinear_quantities;    // SpaceCurve: k_2..k_d
  std::vector<Eigen::MatrixXd> quadratic_forms;  // CodimK: one per normal direction
  std::vector<bool> flat_flags;                  // CodimK: marks all-zero forms

  static ManifoldSpec curve2d(double kappa);
  static ManifoldSpec hypersurface(const Eigen::VectorXd& kappas);
  static ManifoldSpec space_curve(const Eigen::VectorXd& ks);
  static ManifoldSpec codim_k(int tangent_dim, std::vector<Eigen::MatrixXd> forms);

  int codimension() const { return ambient_dim - tangent_dim; }

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  /// Maps tangent coordinates to the ambient point.
  Eigen::VectorXd embed(const Eigen::VectorXd& tangent) const;

  nlohmann::json to_json() const;
  static ManifoldSpec from_json(const nlohmann::json& j);
};

Eigen::Vector2d embed_curve2d(double x, double kappa);
Eigen::VectorXd embed_hypersurface(const Eigen::VectorXd& xp, const Eigen::VectorXd& curvatures);
Eigen::VectorXd embed_space_curve(double x, const Eigen::VectorXd& ks);
Eigen::VectorXd embed_codim_k(const Eigen::VectorXd& xp, const std::vector<Eigen::MatrixXd>& forms);

/// A generated dataset in the local frame. Rows are points; the first
/// tangent_dim columns are the tangent coordinates.
struct SampleSet {
  Eigen::MatrixXd points;
  int tangent_dim = 1;
  double half_width_L = 0.0;
  uint64_t seed = 0;
  enum class Density { UniformIID };
  Density density = Density::UniformIID;

  int size() const { return static_cast<int>(points.rows()); }
  int ambient_dim() const { return static_cast<int>(points.cols()); }

  /// Headered CSV: x_1..x_t, y_1..y_c.
  void write_csv(std::ostream& os) const;
  void write_csv(const std::string& path) const;
};

/// Per-normal-coordinate Gaussian noise, sigma_i >= 0.
struct NoiseSpec {
  Eigen::VectorXd stddev_per_normal;
  uint64_t seed = 0;
};

/// Draws N tangent points i.i.d. uniform on [-L, L]^tangent_dim (one RNG
/// substream per tangent coordinate) and embeds them. Identical
/// (spec, L, N, seed) gives bit-identical output.
SampleSet sample_uniform(const ManifoldSpec& spec, double L, int N, uint64_t seed);

/// Adds independent Gaussian noise to each normal coordinate; tangent
/// coordinates are untouched. sigma length must equal the codimension.
SampleSet add_noise(const SampleSet& samples, const NoiseSpec& noise);

/// Bends a rank-deficient dataset along the given orthonormal normal
/// directions: each point gains alpha * sum_i (sum_j eta_ij x_j^2) q_i
/// with eta_ij ~ N(0,1) drawn once from seed. Columns of normal_basis
/// must be orthonormal and orthogonal to the centered data span (1e-8).
SampleSet bend_dataset(const SampleSet& samples, const Eigen::MatrixXd& normal_basis,
                       double alpha, uint64_t seed);

}  // namespace mlr
