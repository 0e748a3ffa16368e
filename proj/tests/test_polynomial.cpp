#include <doctest.h>

#include "mlr/polynomial.hpp"
#include "test_support.hpp"

using mlr::Polynomial;

TEST_CASE("evaluation and term merging") {
  Polynomial p(2);
  p.add_term({1, 1}, 2.0);
  p.add_term({1, 1}, 1.0);  // merges to 3xy
  p.add_term({0, 0}, 5.0);
  Eigen::Vector2d x(2.0, -1.0);
  CHECK(p(x) == doctest::Approx(5.0 - 6.0));
  CHECK(p.degree() == 2);
  CHECK(p.terms().size() == 2);
}

TEST_CASE("partial derivatives of the demo target") {
  const auto g = testsup::toy_target();
  // d/dy at 0
  CHECK(g.derivative_at_zero({0, 1}) == 4.0);
  // d2/dx2 is the constant 4
  const auto gxx = g.partial_derivative(0, 2);
  CHECK(gxx.degree() == 0);
  CHECK(gxx.at_zero() == 4.0);
  // derivative of a constant vanishes
  const auto c = Polynomial::constant(2, 3.5);
  CHECK(c.partial_derivative(0).terms().empty());
}

TEST_CASE("derivative_at_zero carries the factorial") {
  Polynomial p(2);
  p.add_term({2, 1}, 3.0);  // 3 x^2 y
  CHECK(p.derivative_at_zero({2, 1}) == 3.0 * 2.0);  // 2! * 1!
  CHECK(p.derivative_at_zero({1, 1}) == 0.0);
}

TEST_CASE("mixed partial via multi-index equals repeated single partials") {
  mlr::Rng rng(5);
  const auto p = mlr::random_polynomial(3, 4, rng);
  const auto a = p.partial_derivative({1, 2, 0});
  const auto b = p.partial_derivative(1, 2).partial_derivative(0, 1);
  Eigen::Vector3d x(0.3, -0.7, 1.1);
  CHECK(a(x) == doctest::Approx(b(x)).epsilon(1e-12));
}

TEST_CASE("json round trip") {
  const auto g = testsup::toy_target();
  const auto back = Polynomial::from_json(g.to_json());
  Eigen::Vector2d x(0.13, -0.4);
  CHECK(back(x) == g(x));
}

TEST_CASE("random polynomials are deterministic in the rng state") {
  mlr::Rng a(11), b(11);
  const auto pa = mlr::random_polynomial(2, 3, a);
  const auto pb = mlr::random_polynomial(2, 3, b);
  Eigen::Vector2d x(0.2, 0.9);
  CHECK(pa(x) == pb(x));
}

TEST_CASE("input validation") {
  Polynomial p(2);
  CHECK_THROWS_AS(p.add_term({1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(p.add_term({-1, 0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(p(Eigen::Vector3d::Zero()), std::invalid_argument);
}
