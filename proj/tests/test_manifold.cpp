#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include "mlr/csvio.hpp"
#include "mlr/manifold.hpp"
#include "mlr/moments.hpp"
#include "test_support.hpp"

using namespace mlr;

TEST_CASE("curve embedding") {
  CHECK(testsup::bit_equal(embed_curve2d(0.5, 2.0), Eigen::Vector2d(0.5, 0.5)));
  CHECK(testsup::bit_equal(embed_curve2d(0.0, 123.0), Eigen::Vector2d(0.0, 0.0)));
  CHECK(embed_curve2d(0.1, 0.1)[1] == doctest::Approx(0.001).epsilon(1e-15));
}

TEST_CASE("hypersurface embedding") {
  Eigen::VectorXd xp(2), k(2);
  xp << 1, 1;
  k << 2, 3;
  const auto p = embed_hypersurface(xp, k);
  CHECK(p[2] == 5.0);
  k << 0, 0;
  xp << -0.7, 0.3;
  CHECK(embed_hypersurface(xp, k)[2] == 0.0);
  xp << 0.1, -0.1;
  k << 1, 1;
  CHECK(embed_hypersurface(xp, k)[2] == doctest::Approx(0.02).epsilon(1e-15));
  Eigen::VectorXd bad(3);
  CHECK_THROWS_AS(embed_hypersurface(bad, k), std::invalid_argument);
}

TEST_CASE("space curve embedding") {
  Eigen::VectorXd ks(2);
  ks << 1, 1;
  CHECK(testsup::bit_equal(embed_space_curve(2.0, ks), Eigen::Vector3d(2, 4, 8)));
  ks << 0.5, 1.0 / 60.0;
  const auto p = embed_space_curve(0.1, ks);
  CHECK(p[1] == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(p[2] == doctest::Approx(1.0 / 60.0 * 1e-3).epsilon(1e-15));
  ks << 0, 0;
  CHECK(testsup::bit_equal(embed_space_curve(0.3, ks), Eigen::Vector3d(0.3, 0, 0)));
}

TEST_CASE("codim-k embedding") {
  std::vector<Eigen::MatrixXd> forms = {(Eigen::MatrixXd(2, 2) << 1, 0, 0, 2).finished(),
                                        Eigen::MatrixXd::Zero(2, 2)};
  Eigen::VectorXd xp(2);
  xp << 1, 1;
  Eigen::VectorXd p = embed_codim_k(xp, forms);
  CHECK(testsup::bit_equal(p, (Eigen::VectorXd(4) << 1, 1, 3, 0).finished()));

  std::vector<Eigen::MatrixXd> cross = {(Eigen::MatrixXd(2, 2) << 0, 0.5, 0.5, 0).finished()};
  xp << 1, 0;
  CHECK(embed_codim_k(xp, cross)[2] == 0.0);
  xp << 1, 1;
  CHECK(embed_codim_k(xp, cross)[2] == doctest::Approx(1.0).epsilon(1e-15));

  Eigen::VectorXd bad(3);
  CHECK_THROWS_AS(embed_codim_k(bad, cross), std::invalid_argument);
}

TEST_CASE("spec validation") {
  auto spec = ManifoldSpec::codim_k(
      2, {(Eigen::MatrixXd(2, 2) << 1, 0, 0, 1).finished(), Eigen::MatrixXd::Zero(2, 2)});
  CHECK(spec.flat_flags == std::vector<bool>{false, true});
  spec.validate();
  spec.flat_flags = {true, true};  // first direction is not actually flat
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  auto asym = ManifoldSpec::codim_k(2, {(Eigen::MatrixXd(2, 2) << 0, 1, 0, 0).finished()});
  CHECK_THROWS_AS(asym.validate(), std::invalid_argument);
}

TEST_CASE("manifold spec json round trip") {
  Eigen::VectorXd ks(3);
  ks << 0.5, -0.25, 0.125;
  const auto spec = ManifoldSpec::space_curve(ks);
  const auto back = ManifoldSpec::from_json(spec.to_json());
  CHECK(back.kind == ManifoldKind::SpaceCurve);
  CHECK(testsup::bit_equal(back.nonlinear_quantities, ks));

  const auto cd = ManifoldSpec::codim_k(
      2, {(Eigen::MatrixXd(2, 2) << 1, 0.5, 0.5, 2).finished(), Eigen::MatrixXd::Zero(2, 2)});
  const auto cd_back = ManifoldSpec::from_json(cd.to_json());
  CHECK(testsup::bit_equal(cd_back.quadratic_forms[0], cd.quadratic_forms[0]));
  CHECK(cd_back.flat_flags == cd.flat_flags);
}

TEST_CASE("uniform sampling hits the paper setup") {
  const auto spec = ManifoldSpec::curve2d(0.1);
  const auto s = sample_uniform(spec, 0.1, 1000, 7);
  CHECK(s.size() == 1000);
  CHECK(s.ambient_dim() == 2);
  for (int r = 0; r < s.size(); ++r) {
    CHECK(std::abs(s.points(r, 0)) <= 0.1);
    CHECK(s.points(r, 1) == doctest::Approx(0.1 * s.points(r, 0) * s.points(r, 0))
                                .epsilon(1e-15));
  }
}

TEST_CASE("sampling is deterministic") {
  const auto spec = ManifoldSpec::curve2d(0.3);
  const auto a = sample_uniform(spec, 0.2, 257, 99);
  const auto b = sample_uniform(spec, 0.2, 257, 99);
  CHECK(testsup::bit_equal(a.points, b.points));
  const auto c = sample_uniform(spec, 0.2, 257, 100);
  CHECK(!testsup::bit_equal(a.points, c.points));
}

TEST_CASE("embedding consistency over every kind") {
  mlr::Rng rng(4);
  std::vector<ManifoldSpec> specs;
  specs.push_back(ManifoldSpec::curve2d(0.7));
  specs.push_back(ManifoldSpec::hypersurface((Eigen::VectorXd(3) << 1, -2, 0.5).finished()));
  specs.push_back(ManifoldSpec::space_curve((Eigen::VectorXd(3) << 0.5, 0.2, -0.1).finished()));
  specs.push_back(ManifoldSpec::codim_k(
      2, {(Eigen::MatrixXd(2, 2) << 1, 0.25, 0.25, -1).finished(),
          (Eigen::MatrixXd(2, 2) << 0, 0.5, 0.5, 0).finished()}));
  for (const auto& spec : specs) {
    const auto s = sample_uniform(spec, 0.15, 64, 11);
    for (int r = 0; r < s.size(); ++r) {
      const Eigen::VectorXd expect = spec.embed(s.points.row(r).head(spec.tangent_dim));
      const double scale = std::max(1.0, expect.cwiseAbs().maxCoeff());
      CHECK((s.points.row(r).transpose() - expect).cwiseAbs().maxCoeff() <= 1e-14 * scale);
    }
  }
  CHECK_THROWS_AS(sample_uniform(specs[0], -1.0, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_uniform(specs[0], 0.1, 0, 0), std::invalid_argument);
}

TEST_CASE("large-sample symmetry of the tangent draws") {
  const double L = 0.1;
  const int n = 1000000;
  const auto s =
      sample_uniform(ManifoldSpec::hypersurface((Eigen::VectorXd(2) << 1, 2).finished()), L, n, 3);
  const double se_mean = (L / std::sqrt(3.0)) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(s.points.col(0).mean()) < 3 * se_mean);
  CHECK(std::abs(s.points.col(1).mean()) < 3 * se_mean);
  // <x1 x2> has standard error Var(x)^... = L^2/3 / sqrt(n)
  const double cross = (s.points.col(0).cwiseProduct(s.points.col(1))).mean();
  CHECK(std::abs(cross) < 3 * (L * L / 3.0) / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("add_noise") {
  const auto spec = ManifoldSpec::codim_k(
      2, {(Eigen::MatrixXd(2, 2) << 1, 0, 0, 1).finished(), Eigen::MatrixXd::Zero(2, 2)});
  const auto s = sample_uniform(spec, 0.1, 200, 5);

  SUBCASE("zero sigma is the identity") {
    const auto out = add_noise(s, {Eigen::VectorXd::Zero(2), 17});
    CHECK(testsup::bit_equal(out.points, s.points));
  }
  SUBCASE("noise touches only its coordinate") {
    Eigen::VectorXd sig(2);
    sig << 0.0, 1e-3;
    const auto out = add_noise(s, {sig, 17});
    CHECK(testsup::bit_equal(out.points.leftCols(3), s.points.leftCols(3)));
    CHECK((out.points.col(3) - s.points.col(3)).cwiseAbs().maxCoeff() > 0.0);
  }
  SUBCASE("length mismatch throws") {
    CHECK_THROWS_AS(add_noise(s, {Eigen::VectorXd::Zero(1), 0}), std::invalid_argument);
  }
}

TEST_CASE("noise variance matches sigma^2 at large N") {
  const auto spec = ManifoldSpec::curve2d(0.1);
  const auto s = sample_uniform(spec, 0.1, 100000, 21);
  const auto noisy = add_noise(s, {Eigen::VectorXd::Constant(1, 1e-3), 22});
  const Eigen::VectorXd resid =
      noisy.points.col(1) - 0.1 * s.points.col(0).cwiseProduct(s.points.col(0));
  const double var = resid.squaredNorm() / resid.size();
  CHECK(var == doctest::Approx(1e-6).epsilon(0.1));
}

TEST_CASE("bend_dataset") {
  // rank-3 data inside R^8 with an exact zero tail
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(40, 8);
  mlr::Rng rng(31);
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 3; ++c) X(r, c) = rng.uniform(-1, 1);
  SampleSet base;
  base.points = X;
  base.tangent_dim = 3;
  base.half_width_L = 1.0;

  Eigen::MatrixXd normals = Eigen::MatrixXd::Zero(8, 5);
  for (int i = 0; i < 5; ++i) normals(3 + i, i) = 1.0;

  SUBCASE("alpha 0 is the identity") {
    const auto out = bend_dataset(base, normals, 0.0, 9);
    CHECK(testsup::bit_equal(out.points, X));
  }
  SUBCASE("displacement is linear in alpha") {
    const auto a = bend_dataset(base, normals, 1e-4, 9);
    const auto b = bend_dataset(base, normals, 2e-4, 9);
    const Eigen::MatrixXd da = a.points - X;
    const Eigen::MatrixXd db = b.points - X;
    CHECK((db - 2.0 * da).cwiseAbs().maxCoeff() <= 1e-12 * da.cwiseAbs().maxCoeff());
  }
  SUBCASE("bending restores full numerical rank") {
    const auto out = bend_dataset(base, normals, 1e-8, 9);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(out.points);
    const auto& sv = svd.singularValues();
    CHECK(sv[sv.size() - 1] > 1e-12 * sv[0]);
  }
  SUBCASE("non-orthonormal basis is rejected") {
    Eigen::MatrixXd bad = normals;
    bad(3, 0) = 0.5;
    CHECK_THROWS_AS(bend_dataset(base, bad, 1e-4, 9), std::invalid_argument);
  }
  SUBCASE("basis overlapping the data span is rejected") {
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(8, 1);
    bad(0, 0) = 1.0;
    CHECK_THROWS_AS(bend_dataset(base, bad, 1e-4, 9), std::invalid_argument);
  }
}

TEST_CASE("sample csv export") {
  const auto spec = ManifoldSpec::hypersurface((Eigen::VectorXd(2) << 1, 2).finished());
  const auto s = sample_uniform(spec, 0.1, 5, 1);
  std::ostringstream os;
  s.write_csv(os);
  std::istringstream is(os.str());
  const auto table = csv::read_table(is);
  CHECK(table.header == std::vector<std::string>{"x_1", "x_2", "y_1"});
  CHECK(table.rows.size() == 5);
  CHECK(table.numeric().isApprox(s.points));
}
