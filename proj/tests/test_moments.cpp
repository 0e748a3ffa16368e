#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mlr/manifold.hpp"
#include "mlr/moments.hpp"
#include "test_support.hpp"

using namespace mlr;

TEST_CASE("analytic moments of the uniform box") {
  const double L = 0.37;
  CHECK(analytic_moment_uniform({2}, L) == doctest::Approx(L * L / 3).epsilon(1e-15));
  CHECK(analytic_moment_uniform({4}, L) == doctest::Approx(std::pow(L, 4) / 5).epsilon(1e-15));
  CHECK(analytic_moment_uniform({1, 2}, L) == 0.0);
  CHECK(analytic_moment_uniform({2, 2}, L) ==
        doctest::Approx(std::pow(L, 4) / 9).epsilon(1e-15));
  CHECK_THROWS_AS(analytic_moment_uniform({2}, 0.0), std::invalid_argument);
}

TEST_CASE("hypersurface moment table") {
  SUBCASE("single curvature unit patch") {
    const auto m = hypersurface_moment_table(Eigen::VectorXd::Ones(1), 1.0);
    CHECK(m.determinant_D == doctest::Approx(4.0 / 45.0).epsilon(1e-15));
  }
  SUBCASE("flat hypersurface degenerates") {
    const auto m = hypersurface_moment_table(Eigen::VectorXd::Zero(4), 0.2);
    CHECK(m.determinant_D == 0.0);
  }
  SUBCASE("closed form equals the assembled moments") {
    Eigen::VectorXd k(2);
    k << 1, 2;
    const double L = 0.5;
    const auto m = hypersurface_moment_table(k, L);
    // independent assembly from box moments
    const double y2 = k[0] * k[0] * analytic_moment_uniform({4, 0}, L) +
                      k[1] * k[1] * analytic_moment_uniform({0, 4}, L) +
                      2 * k[0] * k[1] * analytic_moment_uniform({2, 2}, L);
    const double ym = k[0] * analytic_moment_uniform({2, 0}, L) +
                      k[1] * analytic_moment_uniform({0, 2}, L);
    CHECK(m.y_squared == doctest::Approx(y2).epsilon(1e-14));
    CHECK(m.mean_y == doctest::Approx(ym).epsilon(1e-14));
    CHECK(m.determinant_D == doctest::Approx(y2 - ym * ym).epsilon(1e-14));
  }
}

TEST_CASE("determinant identity for random configurations") {
  mlr::Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int d1 = 1 + static_cast<int>(rng.uniform(0, 5.999));
    Eigen::VectorXd k(d1);
    for (int i = 0; i < d1; ++i) {
      const double mag = rng.uniform(0.5, 2.0);
      k[i] = rng.uniform01() < 0.5 ? -mag : mag;
    }
    const double L = rng.uniform(0.05, 0.5);
    const auto m = hypersurface_moment_table(k, L);
    const double closed = k.squaredNorm() * 4.0 * std::pow(L, 4) / 45.0;
    CHECK(m.determinant_D == doctest::Approx(closed).epsilon(1e-14));
    CHECK(m.determinant_D ==
          doctest::Approx(m.y_squared - m.mean_y * m.mean_y).epsilon(1e-13));
  }
}

TEST_CASE("gauss-legendre nodes and weights") {
  for (int order : {2, 5, 16, 33}) {
    const auto rule = gauss_legendre(order);
    CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
    // symmetric nodes and exact even moments up to degree 2*order-1
    for (int i = 0; i < order; ++i)
      CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[order - 1 - i]).epsilon(1e-14));
    for (int p = 2; p <= 2 * order - 2; p += 2) {
      double s = 0;
      for (int i = 0; i < order; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], p);
      CHECK(s / 2 == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("gauss-hermite integrates normal moments") {
  const auto rule = gauss_hermite(6);
  CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
  double m2 = 0, m4 = 0, m6 = 0, m3 = 0;
  for (int i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i], w = rule.weights[i];
    m2 += w * x * x;
    m3 += w * x * x * x;
    m4 += w * std::pow(x, 4);
    m6 += w * std::pow(x, 6);
  }
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m3 == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(m6 == doctest::Approx(15.0).epsilon(1e-13));
}

TEST_CASE("quadrature moments on the curve") {
  const auto spec = ManifoldSpec::curve2d(0.25);
  const auto g = testsup::toy_target();
  const double L = 0.1;
  const auto table = quadrature_moments(spec, g, L);
  CHECK(table.second_moments(0, 0) == doctest::Approx(L * L / 3).epsilon(1e-14));
  CHECK(table.second_moments(0, 1) == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(table.first_moments[0] == doctest::Approx(0.0).epsilon(1e-18));
  // <y> = kappa L^2/3
  CHECK(table.first_moments[1] == doctest::Approx(0.25 * L * L / 3).epsilon(1e-14));
}

TEST_CASE("quadrature matches the hypersurface closed forms") {
  Eigen::VectorXd k(3);
  k << 1, 2, 3;
  const auto spec = ManifoldSpec::hypersurface(k);
  const double L = 0.2;
  const auto m = hypersurface_moment_table(k, L);
  const auto g = Polynomial::constant(4, 1.0);
  const auto table = quadrature_moments(spec, g, L, 6);
  CHECK(table.second_moments(3, 3) == doctest::Approx(m.y_squared).epsilon(1e-13));
  CHECK(table.first_moments[3] == doctest::Approx(m.mean_y).epsilon(1e-13));
  CHECK(table.rhs_g == doctest::Approx(1.0).epsilon(1e-15));
  // <x_j^2 y> via a monomial average
  for (int j = 0; j < 3; ++j) {
    std::vector<int> e(4, 0);
    e[j] = 2;
    e[3] = 1;
    const double v = quadrature_average(spec, Polynomial::monomial(4, e, 1.0), L, 6);
    CHECK(v == doctest::Approx(m.xj2_y[j]).epsilon(1e-13));
  }
}

TEST_CASE("noisy quadrature folds the gaussian in exactly") {
  const auto spec = ManifoldSpec::curve2d(0.1);
  const auto g = testsup::toy_target();
  const double L = 0.1, sigma = 1e-3;
  const auto table = quadrature_moments_noisy(spec, g, L, Eigen::VectorXd::Constant(1, sigma));
  // <y~^2> = kappa^2 L^4/5 + sigma^2, <y~> = kappa L^2/3
  CHECK(table.second_moments(1, 1) ==
        doctest::Approx(0.01 * 1e-4 / 5 + sigma * sigma).epsilon(1e-13));
  CHECK(table.first_moments[1] == doctest::Approx(0.1 * 0.01 / 3).epsilon(1e-13));
}

TEST_CASE("empirical moments") {
  const auto spec = ManifoldSpec::curve2d(0.1);
  const auto g = testsup::toy_target();

  SUBCASE("single sample is its own average") {
    const auto s = sample_uniform(spec, 0.1, 1, 3);
    const auto t = empirical_moments(s, g.evaluate_rows(s.points));
    const Eigen::VectorXd p = s.points.row(0);
    CHECK(t.second_moments(0, 1) == doctest::Approx(p[0] * p[1]).epsilon(1e-15));
    CHECK(t.rhs_g == doctest::Approx(g(p)).epsilon(1e-15));
  }
  SUBCASE("duplicating every row changes nothing") {
    const auto s = sample_uniform(spec, 0.1, 50, 3);
    SampleSet doubled = s;
    doubled.points.resize(100, 2);
    doubled.points << s.points, s.points;
    const auto a = empirical_moments(s, g.evaluate_rows(s.points));
    const auto b = empirical_moments(doubled, g.evaluate_rows(doubled.points));
    CHECK(a.second_moments.isApprox(b.second_moments, 1e-15));
    CHECK(a.rhs_gx.isApprox(b.rhs_gx, 1e-15));
  }
  SUBCASE("monte carlo convergence to the box moment") {
    const int n = 1000000;
    const auto s = sample_uniform(spec, 0.1, n, 12);
    const auto t = empirical_moments(s, g.evaluate_rows(s.points));
    // Var(x^2) = L^4 (1/5 - 1/9)
    const double se = std::sqrt(1e-4 * (1.0 / 5 - 1.0 / 9) / n);
    CHECK(std::abs(t.second_moments(0, 0) - 0.01 / 3) < 3 * se);
  }
  SUBCASE("empty input throws") {
    SampleSet empty;
    empty.points.resize(0, 2);
    CHECK_THROWS_AS(empirical_moments(empty, Eigen::VectorXd()), std::invalid_argument);
  }
}

TEST_CASE("empirical moments converge at the Monte Carlo rate") {
  const auto spec = ManifoldSpec::curve2d(0.1);
  const double truth = 0.01 / 3;  // <x^2> at L = 0.1
  std::vector<double> ns = {1e3, 1e4, 1e5};
  std::vector<double> rms;
  for (double nd : ns) {
    const int n = static_cast<int>(nd);
    double sq = 0;
    for (int seed = 0; seed < 20; ++seed) {
      const auto s = sample_uniform(spec, 0.1, n, 1000 + seed);
      const double dev = s.points.col(0).squaredNorm() / n - truth;
      sq += dev * dev;
    }
    rms.push_back(std::sqrt(sq / 20));
  }
  // log-log slope of rms vs N
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < ns.size(); ++i) {
    const double lx = std::log(ns[i]), ly = std::log(rms[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const int n = static_cast<int>(ns.size());
  const double fitted = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(fitted == doctest::Approx(-0.5).epsilon(0.3));  // -0.5 +- 0.15
}

TEST_CASE("normal system assembly") {
  SUBCASE("curve system is the reduced 3x3") {
    const auto spec = ManifoldSpec::curve2d(0.1);
    const auto table = quadrature_moments(spec, testsup::toy_target(), 0.1);
    const auto sys = assemble_normal_system(table);
    CHECK(sys.dim() == 3);
    CHECK(sys.matrix_A(2, 2) == 1.0);
    CHECK(sys.matrix_A(0, 1) == doctest::Approx(0.0).epsilon(1e-18));  // <xy>
    CHECK(sys.matrix_A(0, 2) == doctest::Approx(0.0).epsilon(1e-18));  // <x>
    CHECK(sys.matrix_A.isApprox(sys.matrix_A.transpose()));
    CHECK(sys.coordinate_labels ==
          std::vector<std::string>{"x_1", "y_1", "bias"});
  }
  SUBCASE("flat y2 row vanishes") {
    const auto spec = ManifoldSpec::codim_k(
        2, {(Eigen::MatrixXd(2, 2) << 1, 0, 0, 2).finished(), Eigen::MatrixXd::Zero(2, 2)});
    Polynomial g(4);
    g.add_term({1, 0, 0, 0}, 1.0);
    const auto sys = assemble_normal_system(quadrature_moments(spec, g, 0.1));
    CHECK(sys.dim() == 5);
    for (int j = 0; j < 5; ++j) CHECK(sys.matrix_A(3, j) == doctest::Approx(0.0).epsilon(1e-18));
  }
  SUBCASE("zero moments leave only the bias") {
    MomentTable t;
    t.second_moments = Eigen::MatrixXd::Zero(2, 2);
    t.first_moments = Eigen::VectorXd::Zero(2);
    t.rhs_gx = Eigen::VectorXd::Zero(2);
    t.rhs_g = 1.0;
    const auto sys = assemble_normal_system(t);
    CHECK(sys.matrix_A.cwiseAbs().sum() == 1.0);
    CHECK(sys.matrix_A(2, 2) == 1.0);
  }
}

TEST_CASE("quadrature budget guard") {
  Eigen::VectorXd k = Eigen::VectorXd::Ones(8);
  const auto spec = ManifoldSpec::hypersurface(k);
  const auto g = Polynomial::constant(9, 1.0);
  CHECK_THROWS_AS(quadrature_moments(spec, g, 0.1, 9), std::invalid_argument);
}

TEST_CASE("labeled csv dumps") {
  const auto spec = ManifoldSpec::curve2d(0.1);
  const auto table = quadrature_moments(spec, testsup::toy_target(), 0.1);
  std::ostringstream os;
  assemble_normal_system(table).write_csv(os);
  CHECK(os.str().find(",x_1,y_1,bias,rhs") != std::string::npos);
  CHECK(table.provenance.to_string().find("quadrature") == 0);
}
