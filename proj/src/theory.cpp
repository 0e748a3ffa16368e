#include "mlr/theory.hpp"

#include <cmath>

namespace mlr {

double TheoryPrediction::predicted_b() const {
  double b = b_leading;
  for (const auto& c : corrections)
    if (c.coordinate < 0) b += c.value;
  return b;
}

TheoryPrediction predict_curve2d(const Polynomial& g, double kappa) {
  if (g.ambient_dim() != 2) throw std::invalid_argument("curve target must live in R^2");
  if (kappa == 0.0) throw FlatDirection("kappa = 0: the normal direction is flat");

  TheoryPrediction p;
  p.w_leading.resize(2);
  p.w_leading[0] = g.derivative_at_zero({1, 0});
  const double curv_term = g.derivative_at_zero({2, 0}) / (2.0 * kappa);
  p.w_leading[1] = g.derivative_at_zero({0, 1}) + curv_term;
  p.b_leading = g.at_zero();
  p.corrections.push_back({1, curv_term, "curvature term g_xx(0)/(2 kappa) in w_y"});
  p.error_order_exponents = {2, 2, 4};
  return p;
}

double predict_curve2d_noisy(const Polynomial& g, double kappa, double L, double sigma) {
  if (g.ambient_dim() != 2) throw std::invalid_argument("curve target must live in R^2");
  const double L4 = L * L * L * L;
  const double denom = kappa * kappa * L4 + 45.0 / 4.0 * sigma * sigma;
  if (denom <= 0.0)
    throw FlatDirection("kappa and sigma both zero: the normal direction is flat");
  return g.derivative_at_zero({0, 1}) +
         0.5 * kappa * L4 / denom * g.derivative_at_zero({2, 0});
}

TheoryPrediction predict_hypersurface(const Polynomial& g, const Eigen::VectorXd& kappas,
                                      double L) {
  const int d1 = static_cast<int>(kappas.size());
  const int d = d1 + 1;
  if (g.ambient_dim() != d)
    throw std::invalid_argument("target dimension must be tangent_dim + 1");
  const double ksq = kappas.squaredNorm();
  if (ksq == 0.0) throw FlatDirection("all kappa_i = 0: the normal direction is flat");
  const double ksum = kappas.sum();

  TheoryPrediction p;
  p.w_leading.resize(d);
  std::vector<int> e(d, 0);
  Eigen::VectorXd gii(d1);
  for (int i = 0; i < d1; ++i) {
    std::fill(e.begin(), e.end(), 0);
    e[i] = 1;
    p.w_leading[i] = g.derivative_at_zero(e);
    e[i] = 2;
    gii[i] = g.derivative_at_zero(e);
  }
  std::fill(e.begin(), e.end(), 0);
  e[d1] = 1;
  const double curv_term = 0.5 * kappas.dot(gii) / ksq;
  p.w_leading[d1] = g.derivative_at_zero(e) + curv_term;
  p.b_leading = g.at_zero();
  p.corrections.push_back(
      {d1, curv_term, "curvature term (1/2) sum_i kappa_i g_ii / sum_i kappa_i^2 in w_y"});

  double b_corr = 0.0;
  for (int i = 0; i < d1; ++i) {
    const double kj_sq_rest = ksq - kappas[i] * kappas[i];
    const double kj_rest = ksum - kappas[i];
    b_corr += gii[i] * (kj_sq_rest - kappas[i] * kj_rest);
  }
  b_corr *= 0.5 * (L * L / 3.0) / ksq;
  p.corrections.push_back({-1, b_corr, "O(L^2) bias correction"});

  p.error_order_exponents.assign(d + 1, 2);
  p.error_order_exponents[d] = 4;  // bias residual after its correction
  return p;
}

IndexSequenceSet enumerate_index_sequences(int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  IndexSequenceSet set;
  set.n = n;
  std::vector<int> current;
  // Lexicographic depth-first enumeration of ordered compositions.
  struct Rec {
    static void go(int remaining, std::vector<int>& cur,
                   std::vector<std::vector<int>>& out) {
      if (remaining == 0) {
        out.push_back(cur);
        return;
      }
      for (int j = 1; j <= remaining; ++j) {
        cur.push_back(j);
        go(remaining - j, cur, out);
        cur.pop_back();
      }
    }
  };
  Rec::go(n, current, set.sequences);
  return set;
}

int error_order(int n, int d) {
  if (n < 1 || n > d) throw std::invalid_argument("need 1 <= n <= d");
  const int ceil_half_d = (d + 1) / 2;
  return 2 * (ceil_half_d - n / 2);
}

int error_order_bias(int d) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  return 2 * ((d + 1) / 2);
}

CurveNdPrediction predict_curve_nd(const Polynomial& g, const Eigen::VectorXd& ks, int n,
                                   int d) {
  if (n < 1 || n > d) throw std::invalid_argument("need 1 <= n <= d");
  if (ks.size() != d) throw std::invalid_argument("ks must hold k_1..k_d");
  if (g.ambient_dim() != d) throw std::invalid_argument("target dimension must equal d");
  const double kn = ks[n - 1];
  if (kn == 0.0)
    throw FlatDirection("k_" + std::to_string(n) + " = 0: direction " + std::to_string(n) +
                        " is flat");

  const IndexSequenceSet set = enumerate_index_sequences(n);
  double sum = 0.0;
  for (const auto& seq : set.sequences) {
    double k_prod = 1.0;
    std::vector<int> multi(d, 0);
    for (int j : seq) {
      k_prod *= ks[j - 1];
      multi[j - 1] += 1;
    }
    double m_factorial = 1.0;
    for (size_t m = 2; m <= seq.size(); ++m) m_factorial *= static_cast<double>(m);
    sum += k_prod / (m_factorial * kn) * g.derivative_at_zero(multi);
  }
  return {sum, error_order(n, d)};
}

TheoryPrediction predict_curve3d(const Polynomial& g, double k2, double k3) {
  if (g.ambient_dim() != 3) throw std::invalid_argument("curve target must live in R^3");
  if (k2 == 0.0) throw FlatDirection("k_2 = 0: direction y is flat");
  if (k3 == 0.0) throw FlatDirection("k_3 = 0: direction z is flat");

  Eigen::VectorXd ks(3);
  ks << 1.0, k2, k3;
  TheoryPrediction p;
  p.w_leading.resize(3);
  for (int n = 1; n <= 3; ++n) p.w_leading[n - 1] = predict_curve_nd(g, ks, n, 3).w_n_leading;
  p.b_leading = g.at_zero();
  p.corrections.push_back(
      {1, p.w_leading[1] - g.derivative_at_zero({0, 1, 0}), "curvature term in w_y"});
  p.corrections.push_back(
      {2, p.w_leading[2] - g.derivative_at_zero({0, 0, 1}), "curvature terms in w_z"});
  p.error_order_exponents = {4, 2, 2, 4};
  return p;
}

double predict_codim2_noisy_wy2(const Polynomial& g, double sigma) {
  if (sigma <= 0.0)
    throw FlatDirection("sigma = 0: the y2 direction stays flat and the system degenerate");
  const int d = g.ambient_dim();
  std::vector<int> e(d, 0);
  e[d - 1] = 1;
  return g.derivative_at_zero(e);
}

}  // namespace mlr
