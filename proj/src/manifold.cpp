#include "mlr/manifold.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "mlr/csvio.hpp"
#include "mlr/rng.hpp"

namespace mlr {

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Curve2D: return "curve2d";
    case ManifoldKind::Hypersurface: return "hypersurface";
    case ManifoldKind::SpaceCurve: return "space_curve";
    case ManifoldKind::CodimK: return "codim_k";
  }
  throw std::logic_error("unreachable");
}

ManifoldKind manifold_kind_from_string(const std::string& s) {
  if (s == "curve2d") return ManifoldKind::Curve2D;
  if (s == "hypersurface") return ManifoldKind::Hypersurface;
  if (s == "space_curve") return ManifoldKind::SpaceCurve;
  if (s == "codim_k") return ManifoldKind::CodimK;
  throw std::invalid_argument("unknown manifold kind: " + s);
}

ManifoldSpec ManifoldSpec::curve2d(double kappa) {
  ManifoldSpec spec;
  spec.kind = ManifoldKind::Curve2D;
  spec.tangent_dim = 1;
  spec.ambient_dim = 2;
  spec.curvatures = Eigen::VectorXd::Constant(1, kappa);
  return spec;
}

ManifoldSpec ManifoldSpec::hypersurface(const Eigen::VectorXd& kappas) {
  ManifoldSpec spec;
  spec.kind = ManifoldKind::Hypersurface;
  spec.tangent_dim = static_cast<int>(kappas.size());
  spec.ambient_dim = spec.tangent_dim + 1;
  spec.curvatures = kappas;
  return spec;
}

ManifoldSpec ManifoldSpec::space_curve(const Eigen::VectorXd& ks) {
  ManifoldSpec spec;
  spec.kind = ManifoldKind::SpaceCurve;
  spec.tangent_dim = 1;
  spec.ambient_dim = static_cast<int>(ks.size()) + 1;
  spec.nonlinear_quantities = ks;
  return spec;
}

ManifoldSpec ManifoldSpec::codim_k(int tangent_dim, std::vector<Eigen::MatrixXd> forms) {
  ManifoldSpec spec;
  spec.kind = ManifoldKind::CodimK;
  spec.tangent_dim = tangent_dim;
  spec.ambient_dim = tangent_dim + static_cast<int>(forms.size());
  spec.quadratic_forms = std::move(forms);
  spec.flat_flags.resize(spec.quadratic_forms.size());
  for (size_t i = 0; i < spec.quadratic_forms.size(); ++i)
    spec.flat_flags[i] = spec.quadratic_forms[i].isZero(0.0);
  return spec;
}

void ManifoldSpec::validate() const {
  if (tangent_dim < 1) throw std::invalid_argument("tangent_dim must be positive");
  if (ambient_dim <= tangent_dim)
    throw std::invalid_argument("ambient_dim must exceed tangent_dim");
  switch (kind) {
    case ManifoldKind::Curve2D:
      if (tangent_dim != 1 || ambient_dim != 2)
        throw std::invalid_argument("Curve2D requires tangent_dim=1, ambient_dim=2");
      if (curvatures.size() != 1) throw std::invalid_argument("Curve2D needs one curvature");
      break;
    case ManifoldKind::Hypersurface:
      if (ambient_dim != tangent_dim + 1)
        throw std::invalid_argument("Hypersurface requires ambient_dim = tangent_dim + 1");
      if (curvatures.size() != tangent_dim)
        throw std::invalid_argument("curvature count must equal tangent_dim");
      break;
    case ManifoldKind::SpaceCurve:
      if (tangent_dim != 1) throw std::invalid_argument("SpaceCurve requires tangent_dim=1");
      if (nonlinear_quantities.size() != ambient_dim - 1)
        throw std::invalid_argument("SpaceCurve needs k_2..k_d");
      break;
    case ManifoldKind::CodimK: {
      if (static_cast<int>(quadratic_forms.size()) != codimension())
        throw std::invalid_argument("one quadratic form per normal direction required");
      for (size_t i = 0; i < quadratic_forms.size(); ++i) {
        const auto& f = quadratic_forms[i];
        if (f.rows() != tangent_dim || f.cols() != tangent_dim)
          throw std::invalid_argument("quadratic form size must equal tangent_dim");
        if (!f.isApprox(f.transpose(), 1e-12))
          throw std::invalid_argument("quadratic forms must be symmetric");
        if (i < flat_flags.size() && flat_flags[i] && !f.isZero(0.0))
          throw std::invalid_argument("flat direction must have an all-zero form");
      }
      break;
    }
  }
}

Eigen::Vector2d embed_curve2d(double x, double kappa) {
  return Eigen::Vector2d(x, kappa * x * x);
}

Eigen::VectorXd embed_hypersurface(const Eigen::VectorXd& xp,
                                   const Eigen::VectorXd& curvatures) {
  if (xp.size() != curvatures.size())
    throw std::invalid_argument("tangent point and curvature lengths differ");
  Eigen::VectorXd out(xp.size() + 1);
  out.head(xp.size()) = xp;
  out[xp.size()] = curvatures.dot(xp.cwiseProduct(xp));
  return out;
}

Eigen::VectorXd embed_space_curve(double x, const Eigen::VectorXd& ks) {
  Eigen::VectorXd out(ks.size() + 1);
  out[0] = x;
  double xn = x;
  for (Eigen::Index n = 0; n < ks.size(); ++n) {
    xn *= x;  // x^(n+2)
    out[n + 1] = ks[n] * xn;
  }
  return out;
}

Eigen::VectorXd embed_codim_k(const Eigen::VectorXd& xp,
                              const std::vector<Eigen::MatrixXd>& forms) {
  for (const auto& f : forms)
    if (f.rows() != xp.size() || f.cols() != xp.size())
      throw std::invalid_argument("quadratic form size must match tangent point");
  Eigen::VectorXd out(xp.size() + static_cast<Eigen::Index>(forms.size()));
  out.head(xp.size()) = xp;
  for (size_t j = 0; j < forms.size(); ++j)
    out[xp.size() + static_cast<Eigen::Index>(j)] = xp.dot(forms[j] * xp);
  return out;
}

Eigen::VectorXd ManifoldSpec::embed(const Eigen::VectorXd& tangent) const {
  switch (kind) {
    case ManifoldKind::Curve2D: return embed_curve2d(tangent[0], curvatures[0]);
    case ManifoldKind::Hypersurface: return embed_hypersurface(tangent, curvatures);
    case ManifoldKind::SpaceCurve: return embed_space_curve(tangent[0], nonlinear_quantities);
    case ManifoldKind::CodimK: return embed_codim_k(tangent, quadratic_forms);
  }
  throw std::logic_error("unreachable");
}

nlohmann::json ManifoldSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["tangent_dim"] = tangent_dim;
  j["ambient_dim"] = ambient_dim;
  if (curvatures.size() > 0)
    j["curvatures"] = std::vector<double>(curvatures.data(), curvatures.data() + curvatures.size());
  if (nonlinear_quantities.size() > 0)
    j["nonlinear_quantities"] = std::vector<double>(
        nonlinear_quantities.data(), nonlinear_quantities.data() + nonlinear_quantities.size());
  if (!quadratic_forms.empty()) {
    nlohmann::json forms = nlohmann::json::array();
    for (const auto& f : quadratic_forms) {
      std::vector<double> row_major;
      for (Eigen::Index r = 0; r < f.rows(); ++r)
        for (Eigen::Index c = 0; c < f.cols(); ++c) row_major.push_back(f(r, c));
      forms.push_back(row_major);
    }
    j["quadratic_forms"] = forms;
    j["flat_flags"] = flat_flags;
  }
  return j;
}

ManifoldSpec ManifoldSpec::from_json(const nlohmann::json& j) {
  const auto kind = manifold_kind_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case ManifoldKind::Curve2D:
      return curve2d(j.at("curvatures").at(0).get<double>());
    case ManifoldKind::Hypersurface: {
      const auto k = j.at("curvatures").get<std::vector<double>>();
      return hypersurface(Eigen::Map<const Eigen::VectorXd>(k.data(), k.size()));
    }
    case ManifoldKind::SpaceCurve: {
      const auto k = j.at("nonlinear_quantities").get<std::vector<double>>();
      return space_curve(Eigen::Map<const Eigen::VectorXd>(k.data(), k.size()));
    }
    case ManifoldKind::CodimK: {
      const int t = j.at("tangent_dim").get<int>();
      std::vector<Eigen::MatrixXd> forms;
      for (const auto& fj : j.at("quadratic_forms")) {
        const auto flat = fj.get<std::vector<double>>();
        if (static_cast<int>(flat.size()) != t * t)
          throw std::invalid_argument("quadratic form must be row-major tangent_dim^2");
        Eigen::MatrixXd f(t, t);
        for (int r = 0; r < t; ++r)
          for (int c = 0; c < t; ++c) f(r, c) = flat[r * t + c];
        forms.push_back(f);
      }
      return codim_k(t, std::move(forms));
    }
  }
  throw std::logic_error("unreachable");
}

void SampleSet::write_csv(std::ostream& os) const {
  std::vector<std::string> header;
  for (int i = 0; i < tangent_dim; ++i) header.push_back("x_" + std::to_string(i + 1));
  for (int i = 0; i < ambient_dim() - tangent_dim; ++i)
    header.push_back("y_" + std::to_string(i + 1));
  csv::write_matrix(os, header, points);
}

void SampleSet::write_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_csv(os);
}

SampleSet sample_uniform(const ManifoldSpec& spec, double L, int N, uint64_t seed) {
  spec.validate();
  if (L <= 0.0) throw std::invalid_argument("L must be positive");
  if (N < 1) throw std::invalid_argument("N must be at least 1");

  // One substream per tangent coordinate keeps draws independent of the
  // column count and reproducible when coordinates are generated in parallel.
  Eigen::MatrixXd tangent(N, spec.tangent_dim);
  for (int c = 0; c < spec.tangent_dim; ++c) {
    Rng rng(seed, static_cast<uint64_t>(c));
    for (int r = 0; r < N; ++r) tangent(r, c) = rng.uniform(-L, L);
  }

  SampleSet out;
  out.points.resize(N, spec.ambient_dim);
  for (int r = 0; r < N; ++r)
    out.points.row(r) = spec.embed(tangent.row(r).transpose()).transpose();
  out.tangent_dim = spec.tangent_dim;
  out.half_width_L = L;
  out.seed = seed;
  return out;
}

SampleSet add_noise(const SampleSet& samples, const NoiseSpec& noise) {
  const int codim = samples.ambient_dim() - samples.tangent_dim;
  if (noise.stddev_per_normal.size() != codim)
    throw std::invalid_argument("noise vector length must equal the codimension");
  for (Eigen::Index i = 0; i < noise.stddev_per_normal.size(); ++i)
    if (noise.stddev_per_normal[i] < 0.0)
      throw std::invalid_argument("noise stddev must be non-negative");

  SampleSet out = samples;
  for (int j = 0; j < codim; ++j) {
    const double sigma = noise.stddev_per_normal[j];
    if (sigma == 0.0) continue;
    Rng rng(noise.seed, static_cast<uint64_t>(j));
    for (int r = 0; r < samples.size(); ++r)
      out.points(r, samples.tangent_dim + j) += sigma * rng.gaussian();
  }
  return out;
}

SampleSet bend_dataset(const SampleSet& samples, const Eigen::MatrixXd& normal_basis,
                       double alpha, uint64_t seed) {
  const auto& X = samples.points;
  if (normal_basis.rows() != X.cols())
    throw std::invalid_argument("normal basis row count must equal ambient_dim");
  const Eigen::Index m = normal_basis.cols();

  const Eigen::MatrixXd gram = normal_basis.transpose() * normal_basis;
  if ((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("normal basis columns must be orthonormal");
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mean;
  if (samples.size() > 1 && (centered * normal_basis).cwiseAbs().maxCoeff() >
                                1e-8 * std::max(1.0, centered.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("normal basis must be orthogonal to the data span");

  // eta_ij ~ N(0,1), one substream per normal direction.
  Eigen::MatrixXd eta(m, X.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    Rng rng(seed, static_cast<uint64_t>(i));
    for (Eigen::Index j = 0; j < X.cols(); ++j) eta(i, j) = rng.gaussian();
  }

  const Eigen::MatrixXd squares = X.cwiseProduct(X);       // N x ambient
  const Eigen::MatrixXd bend_coeff = squares * eta.transpose();  // N x m
  SampleSet out = samples;
  out.points += alpha * bend_coeff * normal_basis.transpose();
  return out;
}

}  // namespace mlr
