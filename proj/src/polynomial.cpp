#include "mlr/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mlr {

namespace {

void check_exponents(const std::vector<int>& e, int dim) {
  if (static_cast<int>(e.size()) != dim)
    throw std::invalid_argument("exponent vector length does not match ambient_dim");
  for (int p : e)
    if (p < 0) throw std::invalid_argument("negative exponent");
}

}  // namespace

Polynomial::Polynomial(int ambient_dim) : ambient_dim_(ambient_dim) {
  if (ambient_dim < 1) throw std::invalid_argument("ambient_dim must be positive");
}

Polynomial Polynomial::constant(int ambient_dim, double c) {
  Polynomial p(ambient_dim);
  p.add_term(std::vector<int>(ambient_dim, 0), c);
  return p;
}

Polynomial Polynomial::monomial(int ambient_dim, std::vector<int> exponents, double c) {
  Polynomial p(ambient_dim);
  p.add_term(exponents, c);
  return p;
}

void Polynomial::add_term(const std::vector<int>& exponents, double c) {
  check_exponents(exponents, ambient_dim_);
  auto it = std::lower_bound(terms_.begin(), terms_.end(), exponents,
                             [](const PolyTerm& t, const std::vector<int>& e) {
                               return t.exponents < e;
                             });
  if (it != terms_.end() && it->exponents == exponents) {
    it->coeff += c;
    if (it->coeff == 0.0) terms_.erase(it);
  } else if (c != 0.0) {
    terms_.insert(it, PolyTerm{exponents, c});
  }
}

int Polynomial::degree() const {
  int deg = 0;
  for (const auto& t : terms_) {
    int d = 0;
    for (int p : t.exponents) d += p;
    deg = std::max(deg, d);
  }
  return deg;
}

double Polynomial::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != ambient_dim_)
    throw std::invalid_argument("point dimension does not match ambient_dim");
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (int i = 0; i < ambient_dim_; ++i)
      for (int p = 0; p < t.exponents[i]; ++p) v *= x[i];
    sum += v;
  }
  return sum;
}

Eigen::VectorXd Polynomial::evaluate_rows(const Eigen::MatrixXd& points) const {
  if (points.cols() != ambient_dim_)
    throw std::invalid_argument("matrix width does not match ambient_dim");
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index r = 0; r < points.rows(); ++r) out[r] = (*this)(points.row(r));
  return out;
}

Polynomial Polynomial::partial_derivative(const std::vector<int>& multi_index) const {
  check_exponents(multi_index, ambient_dim_);
  Polynomial result = *this;
  for (int i = 0; i < ambient_dim_; ++i)
    for (int k = 0; k < multi_index[i]; ++k) result = result.partial_derivative(i, 1);
  return result;
}

Polynomial Polynomial::partial_derivative(int coordinate, int times) const {
  if (coordinate < 0 || coordinate >= ambient_dim_)
    throw std::invalid_argument("coordinate out of range");
  Polynomial result(ambient_dim_);
  if (times == 0) return *this;
  for (const auto& t : terms_) {
    if (t.exponents[coordinate] == 0) continue;
    auto e = t.exponents;
    double c = t.coeff * e[coordinate];
    e[coordinate] -= 1;
    result.add_term(e, c);
  }
  return times == 1 ? result : result.partial_derivative(coordinate, times - 1);
}

double Polynomial::derivative_at_zero(const std::vector<int>& multi_index) const {
  check_exponents(multi_index, ambient_dim_);
  // d^a x^a / dx^a (0) = a!; every other monomial vanishes at 0.
  for (const auto& t : terms_) {
    if (t.exponents == multi_index) {
      double f = t.coeff;
      for (int p : multi_index)
        for (int k = 2; k <= p; ++k) f *= k;
      return f;
    }
  }
  return 0.0;
}

double Polynomial::at_zero() const {
  return derivative_at_zero(std::vector<int>(ambient_dim_, 0));
}

std::string Polynomial::to_string(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << " + ";
    first = false;
    os << t.coeff;
    for (int i = 0; i < ambient_dim_; ++i) {
      if (t.exponents[i] == 0) continue;
      os << "*";
      if (static_cast<size_t>(i) < names.size())
        os << names[i];
      else
        os << "x" << (i + 1);
      if (t.exponents[i] > 1) os << "^" << t.exponents[i];
    }
  }
  return os.str();
}

nlohmann::json Polynomial::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : terms_)
    terms.push_back({{"exps", t.exponents}, {"coeff", t.coeff}});
  return {{"ambient_dim", ambient_dim_}, {"terms", terms}};
}

Polynomial Polynomial::from_json(const nlohmann::json& j) {
  Polynomial p(j.at("ambient_dim").get<int>());
  for (const auto& t : j.at("terms"))
    p.add_term(t.at("exps").get<std::vector<int>>(), t.at("coeff").get<double>());
  return p;
}

namespace {

void enumerate_exponents(int dim, int max_degree, std::vector<int>& current, int pos,
                         int used, std::vector<std::vector<int>>& out) {
  if (pos == dim) {
    out.push_back(current);
    return;
  }
  for (int p = 0; p + used <= max_degree; ++p) {
    current[pos] = p;
    enumerate_exponents(dim, max_degree, current, pos + 1, used + p, out);
  }
  current[pos] = 0;
}

}  // namespace

Polynomial random_polynomial(int ambient_dim, int max_degree, Rng& rng, double mag_lo,
                             double mag_hi) {
  std::vector<std::vector<int>> exps;
  std::vector<int> current(ambient_dim, 0);
  enumerate_exponents(ambient_dim, max_degree, current, 0, 0, exps);
  Polynomial p(ambient_dim);
  for (const auto& e : exps) {
    const double mag = rng.uniform(mag_lo, mag_hi);
    const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    p.add_term(e, sign * mag);
  }
  return p;
}

}  // namespace mlr
