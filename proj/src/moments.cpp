#include "mlr/moments.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mlr/csvio.hpp"

namespace mlr {

std::string Provenance::to_string() const {
  switch (kind) {
    case Kind::Analytic: return "analytic";
    case Kind::Quadrature: return "quadrature(order=" + std::to_string(order) + ")";
    case Kind::Empirical: return "empirical(n=" + std::to_string(n) + ")";
  }
  throw std::logic_error("unreachable");
}

double analytic_moment_uniform(const std::vector<int>& exponents, double L) {
  if (L <= 0.0) throw std::invalid_argument("L must be positive");
  double m = 1.0;
  for (int p : exponents) {
    if (p < 0) throw std::invalid_argument("negative exponent");
    if (p % 2 == 1) return 0.0;
    m *= std::pow(L, p) / (p + 1);
  }
  return m;
}

HypersurfaceMoments hypersurface_moment_table(const Eigen::VectorXd& curvatures, double L) {
  if (L <= 0.0) throw std::invalid_argument("L must be positive");
  const Eigen::Index d1 = curvatures.size();
  const double L2 = L * L;
  const double L4 = L2 * L2;
  const double ksum = curvatures.sum();
  const double ksq = curvatures.squaredNorm();

  HypersurfaceMoments out;
  out.mean_y = L2 / 3.0 * ksum;
  double cross = 0.0;
  for (Eigen::Index i = 1; i < d1; ++i)
    for (Eigen::Index j = 0; j < i; ++j) cross += curvatures[i] * curvatures[j];
  out.y_squared = ksq * L4 / 5.0 + 2.0 * cross * L4 / 9.0;
  out.xj2_y.resize(d1);
  for (Eigen::Index j = 0; j < d1; ++j)
    out.xj2_y[j] = curvatures[j] * L4 / 5.0 + (ksum - curvatures[j]) * L4 / 9.0;
  out.determinant_D = ksq * 4.0 * L4 / 45.0;
  return out;
}

QuadratureRule gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  // Newton iteration on P_n; nodes come in symmetric pairs.
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Evaluate P_n and P_n' by the three-term recurrence.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
  // polynomials: zero diagonal, off-diagonal sqrt(k).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;  // total weight 1 for the normal density
  }
  return rule;
}

double pairwise_sum(const std::vector<double>& values) {
  // Recursive halving; deterministic for a given input order.
  struct Impl {
    static double sum(const double* v, size_t n) {
      if (n <= 8) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += v[i];
        return s;
      }
      const size_t half = n / 2;
      return sum(v, half) + sum(v + half, n - half);
    }
  };
  return Impl::sum(values.data(), values.size());
}

namespace {

// Streaming pairwise reduction: merges equal-sized partial blocks, so the
// result matches recursive pairwise summation without storing all values.
class PairwiseAccumulator {
 public:
  void add(double v) {
    blocks_.push_back(v);
    sizes_.push_back(1);
    while (sizes_.size() >= 2 && sizes_[sizes_.size() - 1] == sizes_[sizes_.size() - 2]) {
      const double merged = blocks_[blocks_.size() - 2] + blocks_.back();
      blocks_.pop_back();
      sizes_.pop_back();
      blocks_.back() = merged;
      sizes_.back() *= 2;
    }
  }
  double total() const {
    double s = 0.0;
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) s += *it;
    return s;
  }

 private:
  std::vector<double> blocks_;
  std::vector<long> sizes_;
};

int embedding_degree(const ManifoldSpec& spec) {
  switch (spec.kind) {
    case ManifoldKind::Curve2D:
    case ManifoldKind::Hypersurface:
    case ManifoldKind::CodimK:
      return 2;
    case ManifoldKind::SpaceCurve:
      return spec.ambient_dim;
  }
  throw std::logic_error("unreachable");
}

std::vector<std::string> spec_labels(int tangent_dim, int ambient_dim) {
  std::vector<std::string> labels;
  for (int i = 0; i < tangent_dim; ++i) labels.push_back("x_" + std::to_string(i + 1));
  for (int i = 0; i < ambient_dim - tangent_dim; ++i)
    labels.push_back("y_" + std::to_string(i + 1));
  return labels;
}

long checked_node_count(int order, int dims) {
  long count = 1;
  for (int i = 0; i < dims; ++i) {
    count *= order;
    if (count > kQuadratureNodeBudget)
      throw std::invalid_argument("quadrature node budget exceeded");
  }
  return count;
}

// Walks the tensor grid over tangent (Gauss-Legendre, scaled to [-L,L]) and
// optional noise dimensions (Gauss-Hermite), invoking fn(point, weight).
template <typename Fn>
void tensor_walk(const ManifoldSpec& spec, double L, int order,
                 const Eigen::VectorXd& sigma, int hermite_order, Fn&& fn) {
  const int t = spec.tangent_dim;
  const QuadratureRule gl = gauss_legendre(order);

  std::vector<int> noisy;  // indices of normal coords with sigma > 0
  for (Eigen::Index j = 0; j < sigma.size(); ++j)
    if (sigma[j] > 0.0) noisy.push_back(static_cast<int>(j));
  QuadratureRule gh;
  if (!noisy.empty()) gh = gauss_hermite(hermite_order);

  const int dims = t + static_cast<int>(noisy.size());
  checked_node_count(order, t);

  std::vector<int> idx(dims, 0);
  Eigen::VectorXd tangent(t);
  const int h = static_cast<int>(noisy.size());
  while (true) {
    double weight = 1.0;
    for (int k = 0; k < t; ++k) {
      tangent[k] = L * gl.nodes[idx[k]];
      weight *= 0.5 * gl.weights[idx[k]];  // average over [-L,L]
    }
    Eigen::VectorXd point = spec.embed(tangent);
    for (int k = 0; k < h; ++k) {
      point[t + noisy[k]] += sigma[noisy[k]] * gh.nodes[idx[t + k]];
      weight *= gh.weights[idx[t + k]];
    }
    fn(point, weight);

    int pos = dims - 1;
    while (pos >= 0) {
      const int limit = pos < t ? order : hermite_order;
      if (++idx[pos] < limit) break;
      idx[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
}

MomentTable quadrature_moments_impl(const ManifoldSpec& spec, const Polynomial& g, double L,
                                    const Eigen::VectorXd& sigma, int order,
                                    int hermite_order) {
  spec.validate();
  if (L <= 0.0) throw std::invalid_argument("L must be positive");
  if (g.ambient_dim() != spec.ambient_dim)
    throw std::invalid_argument("target dimension does not match manifold");
  if (order == 0) order = default_quadrature_order(spec, g);
  if (order < 2) throw std::invalid_argument("quadrature order must be >= 2");
  if (hermite_order == 0) hermite_order = std::max(2, g.degree() + 1);

  const int d = spec.ambient_dim;
  const int n_second = d * (d + 1) / 2;
  std::vector<PairwiseAccumulator> acc(n_second + d + d + 2);

  tensor_walk(spec, L, order, sigma, hermite_order,
              [&](const Eigen::VectorXd& p, double w) {
                int slot = 0;
                for (int i = 0; i < d; ++i)
                  for (int j = i; j < d; ++j) acc[slot++].add(w * p[i] * p[j]);
                for (int i = 0; i < d; ++i) acc[slot++].add(w * p[i]);
                const double gv = g(p);
                for (int i = 0; i < d; ++i) acc[slot++].add(w * gv * p[i]);
                acc[slot++].add(w * gv);
                acc[slot++].add(w * gv * gv);
              });

  MomentTable table;
  table.second_moments.resize(d, d);
  table.first_moments.resize(d);
  table.rhs_gx.resize(d);
  int slot = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const double v = acc[slot++].total();
      table.second_moments(i, j) = v;
      table.second_moments(j, i) = v;
    }
  for (int i = 0; i < d; ++i) table.first_moments[i] = acc[slot++].total();
  for (int i = 0; i < d; ++i) table.rhs_gx[i] = acc[slot++].total();
  table.rhs_g = acc[slot++].total();
  table.g_squared = acc[slot++].total();
  table.provenance = {Provenance::Kind::Quadrature, order, 0};
  table.coordinate_labels = spec_labels(spec.tangent_dim, d);
  return table;
}

}  // namespace

int default_quadrature_order(const ManifoldSpec& spec, const Polynomial& g) {
  const int m = embedding_degree(spec);
  const int dg = g.degree();
  const int max_degree = m * std::max({2, dg + 1, 2 * dg});
  return max_degree / 2 + 1;  // exact for degree <= 2*order - 1
}

double quadrature_average(const ManifoldSpec& spec, const Polynomial& f, double L,
                          int order) {
  spec.validate();
  if (f.ambient_dim() != spec.ambient_dim)
    throw std::invalid_argument("polynomial dimension does not match manifold");
  if (order == 0) order = default_quadrature_order(spec, f);
  PairwiseAccumulator acc;
  tensor_walk(spec, L, order, Eigen::VectorXd(), 0,
              [&](const Eigen::VectorXd& p, double w) { acc.add(w * f(p)); });
  return acc.total();
}

MomentTable quadrature_moments(const ManifoldSpec& spec, const Polynomial& g, double L,
                               int order) {
  return quadrature_moments_impl(spec, g, L, Eigen::VectorXd(), order, 0);
}

MomentTable quadrature_moments_noisy(const ManifoldSpec& spec, const Polynomial& g, double L,
                                     const Eigen::VectorXd& sigma_per_normal, int order,
                                     int hermite_order) {
  if (sigma_per_normal.size() != spec.codimension())
    throw std::invalid_argument("noise vector length must equal the codimension");
  for (Eigen::Index i = 0; i < sigma_per_normal.size(); ++i)
    if (sigma_per_normal[i] < 0.0) throw std::invalid_argument("sigma must be non-negative");
  return quadrature_moments_impl(spec, g, L, sigma_per_normal, order, hermite_order);
}

MomentTable empirical_moments(const SampleSet& samples, const Eigen::VectorXd& g_values) {
  const int n = samples.size();
  if (n < 1) throw std::invalid_argument("empty sample set");
  if (g_values.size() != n) throw std::invalid_argument("g_values length must equal N");

  const auto& X = samples.points;
  const int d = samples.ambient_dim();
  MomentTable table;
  table.second_moments = X.transpose() * X / n;
  table.first_moments = X.colwise().mean().transpose();
  table.rhs_gx = X.transpose() * g_values / n;
  table.rhs_g = g_values.mean();
  table.g_squared = g_values.squaredNorm() / n;
  table.provenance = {Provenance::Kind::Empirical, 0, n};
  table.coordinate_labels = spec_labels(samples.tangent_dim, d);
  return table;
}

NormalSystem assemble_normal_system(const MomentTable& table) {
  const int d = table.dim();
  NormalSystem sys;
  sys.matrix_A.resize(d + 1, d + 1);
  sys.matrix_A.topLeftCorner(d, d) = table.second_moments;
  sys.matrix_A.topRightCorner(d, 1) = table.first_moments;
  sys.matrix_A.bottomLeftCorner(1, d) = table.first_moments.transpose();
  sys.matrix_A(d, d) = 1.0;
  sys.rhs.resize(d + 1);
  sys.rhs.head(d) = table.rhs_gx;
  sys.rhs[d] = table.rhs_g;
  sys.coordinate_labels = table.coordinate_labels;
  if (sys.coordinate_labels.size() != static_cast<size_t>(d)) {
    sys.coordinate_labels.clear();
    for (int i = 0; i < d; ++i) sys.coordinate_labels.push_back("c_" + std::to_string(i + 1));
  }
  sys.coordinate_labels.push_back("bias");
  return sys;
}

namespace {

void write_labeled_matrix(std::ostream& os, const std::vector<std::string>& labels,
                          const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs) {
  std::vector<std::string> header{""};
  header.insert(header.end(), labels.begin(), labels.end());
  header.push_back("rhs");
  os << csv::escape_field(header[0]);
  for (size_t i = 1; i < header.size(); ++i) os << ',' << csv::escape_field(header[i]);
  os << "\r\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << csv::escape_field(labels[r]);
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << ',' << csv::format_double(m(r, c));
    os << ',' << csv::format_double(rhs[r]) << "\r\n";
  }
}

}  // namespace

void MomentTable::write_csv(std::ostream& os) const {
  auto labels = coordinate_labels;
  if (labels.size() != static_cast<size_t>(dim()))
    for (int i = static_cast<int>(labels.size()); i < dim(); ++i)
      labels.push_back("c_" + std::to_string(i + 1));
  write_labeled_matrix(os, labels, second_moments, rhs_gx);
}

void NormalSystem::write_csv(std::ostream& os) const {
  write_labeled_matrix(os, coordinate_labels, matrix_A, rhs);
}

}  // namespace mlr
