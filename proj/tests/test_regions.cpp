#include <cmath>

#include "doctest.h"
#include "edgeboot/linalg.hpp"
#include "edgeboot/quadrature.hpp"
#include "edgeboot/regions.hpp"

using namespace edgeboot;

namespace {

Eigen::VectorXd v2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("ball membership") {
  const Ball unit = Ball::sphere(Eigen::VectorXd::Zero(2), 1.0);
  CHECK(contains(unit, v2(0, 0)));
  CHECK(contains(unit, v2(1, 0)));
  CHECK_FALSE(contains(unit, v2(1.0000001, 0)));
  CHECK(contains(Ball::whole_space(3), Eigen::VectorXd::Constant(3, 1e300)));
  CHECK(contains(Ball::half_line(0.5), Eigen::VectorXd::Constant(1, 0.5)));
  CHECK_FALSE(contains(Ball::half_line(0.5), Eigen::VectorXd::Constant(1, 0.6)));
  CHECK_THROWS(Ball::sphere(Eigen::VectorXd::Zero(2), -1.0));
}

TEST_CASE("translation identity") {
  StreamRng rng(5, 0);
  for (int i = 0; i < 200; ++i) {
    const Ball b = Ball::sphere(v2(rng.normal(), rng.normal()), 0.5 + rng.uniform());
    const Eigen::VectorXd y = v2(rng.normal(), rng.normal());
    const Eigen::VectorXd x = v2(2 * rng.normal(), 2 * rng.normal());
    CHECK(contains(b.translated(y), x) == contains(b, x - y));
    const Ball h = Ball::half_line(rng.normal());
    const Eigen::VectorXd y1 = Eigen::VectorXd::Constant(1, rng.normal());
    const Eigen::VectorXd x1 = Eigen::VectorXd::Constant(1, rng.normal());
    CHECK(contains(h.translated(y1), x1) == contains(h, x1 - y1));
  }
}

TEST_CASE("boundary neighborhoods") {
  const Ball unit = Ball::sphere(Eigen::VectorXd::Zero(2), 1.0);
  CHECK(in_boundary_neighborhood(unit, v2(1.05, 0), 0.1));
  CHECK_FALSE(in_boundary_neighborhood(unit, v2(0.5, 0), 0.1));
  CHECK_FALSE(in_boundary_neighborhood(Ball::whole_space(2), v2(0.5, 0), 10.0));
  StreamRng rng(8, 0);
  for (int i = 0; i < 500; ++i) {
    const Eigen::VectorXd x = v2(1.5 * rng.normal(), 1.5 * rng.normal());
    const double e1 = 0.5 * rng.uniform(), e2 = e1 + 0.5 * rng.uniform();
    if (in_boundary_neighborhood(unit, x, e1)) CHECK(in_boundary_neighborhood(unit, x, e2));
  }
}

TEST_CASE("gaussian boundary mass") {
  MCConfig mc;
  mc.samples = 1000000;
  mc.seed = 3;
  const Estimate m = gaussian_boundary_mass(Ball::half_line(0.0), Eigen::MatrixXd::Identity(1, 1), 0.01, mc);
  CHECK(std::abs(m.value - 0.02 * normal_pdf(0.0)) <= 3.0 * m.se);
  CHECK(gaussian_boundary_mass(Ball::half_line(0.0), Eigen::MatrixXd::Identity(1, 1), 0.0, mc).value == 0.0);
}

TEST_CASE("eigenvalue selection") {
  Eigen::MatrixXd same(1, 2);
  same << 1.0, 1.0;
  CHECK(lemma1_select(same).lambda_min == doctest::Approx(1.0));

  Eigen::MatrixXd vs(2, 3);
  vs << 1, 0, 1, 0, 1, 1;
  const Lemma1Result r = lemma1_select(vs);
  CHECK(r.index == 2);
  CHECK(r.lambda_min == doctest::Approx(1.0));

  StreamRng rng(21, 0);
  for (int t = 0; t < 1000; ++t) {
    const int q = 1 + static_cast<int>(rng.below(3));
    const int d = q + 1 + static_cast<int>(rng.below(3));
    Eigen::MatrixXd m(q, d);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
    if (!is_spd(m * m.transpose())) continue;
    CHECK(lemma1_select(m).lambda_min > 0.0);
  }
  Eigen::MatrixXd too_few(2, 2);
  too_few.setIdentity();
  CHECK_THROWS(lemma1_select(too_few));
}

TEST_CASE("polynomial map constants") {
  MultiPolynomial lin(2);
  lin.add_term({1, 0}, 2.0);
  lin.add_term({0, 1}, -1.0);
  MultiPolynomial quad(2);
  quad.add_term({2, 0}, 0.5);
  const PolynomialMap p({{lin, quad}});
  CHECK(p.q() == 1);
  CHECK(p.d() == 2);
  CHECK(p.b1() == 2.0);
  CHECK(p.W()(0, 0) == doctest::Approx(5.0));
  CHECK(p.b2() == doctest::Approx(5.0));
  CHECK(p.evaluate(v2(1.0, 1.0), 4.0)(0) == doctest::Approx(1.0 + 0.25));
  MultiPolynomial not_linear(2);
  not_linear.add_term({2, 0}, 1.0);
  CHECK_THROWS(PolynomialMap({{not_linear}}));
}

TEST_CASE("prop1 probability") {
  const PolynomialMap ident({{MultiPolynomial::variable(1, 0)}});
  MCConfig mc;
  mc.samples = 1000000;
  mc.seed = 4;
  const double n = 100.0;
  const Prop1Result r = prop1_probability(ident, {Ball::half_line(0.0)}, 0.5, 2.0, n, mc);
  const double eps = 0.1;
  const double exact = 2.0 * normal_cdf(eps) - 1.0;
  CHECK(r.eps == doctest::Approx(eps));
  CHECK(std::abs(r.sup.value - exact) <= 3.0 * r.sup.se);
  const Prop1Result far = prop1_probability(ident, {Ball::half_line(100.0)}, 0.5, 2.0, n, mc);
  CHECK(far.sup.value == 0.0);
}

TEST_CASE("linear algebra helpers") {
  Eigen::MatrixXd a(2, 2);
  a << 4.0, 1.0, 1.0, 3.0;
  const Eigen::MatrixXd s = sym_sqrt(a);
  CHECK((s * s - a).norm() < 1e-12);
  CHECK((sym_inv_sqrt(a) * a * sym_inv_sqrt(a) - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  CHECK(lambda_min(a) == doctest::Approx((7.0 - std::sqrt(5.0)) / 2.0));
  CHECK(lambda_max(a) == doctest::Approx((7.0 + std::sqrt(5.0)) / 2.0));
  CHECK_FALSE(is_spd(-a));
}
