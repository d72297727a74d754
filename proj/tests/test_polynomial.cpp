#include "doctest.h"
#include "edgeboot/polynomial.hpp"

using namespace edgeboot;

TEST_CASE("polynomial arithmetic") {
  const auto x = MultiPolynomial::variable(1, 0);
  const auto sq = x * x;
  CHECK(sq.size() == 1);
  CHECK(sq.coefficient({2}) == 1.0);

  const auto zero = scale(sq, 0.0);
  CHECK(zero.empty());
  CHECK(zero.degree() == 0);

  const auto c = compose_affine(x, 2.0 * Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Ones(1));
  CHECK(c.coefficient({1}) == 2.0);
  CHECK(c.coefficient({0}) == 1.0);

  CHECK_THROWS(add(x, MultiPolynomial::variable(2, 0)));
  CHECK((x - x).empty());
}

TEST_CASE("polynomial evaluation") {
  const auto x1 = MultiPolynomial::variable(2, 0);
  const auto p = x1 * x1 - MultiPolynomial::constant(2, 1.0);
  Eigen::VectorXd at(2);
  at << 2.0, 7.0;
  CHECK(p.evaluate(at) == 3.0);
  CHECK(MultiPolynomial(3).evaluate(Eigen::VectorXd::Ones(3)) == 0.0);
}

TEST_CASE("truncation, homogeneous parts and parity") {
  const auto x = MultiPolynomial::variable(2, 0);
  const auto y = MultiPolynomial::variable(2, 1);
  const auto p = x * x * y + x + MultiPolynomial::constant(2, 3.0);
  CHECK(p.degree() == 3);
  CHECK(p.min_degree() == 0);
  CHECK(p.truncated(1).degree() == 1);
  CHECK(p.homogeneous_part(3).size() == 1);
  CHECK((x * x * y + x).has_parity(-1));
  CHECK_FALSE(p.has_parity(-1));
  CHECK(p.derivative(0).coefficient({1, 1}) == 2.0);
  CHECK(x.multiply_truncated(x * y, 2).empty());
}
