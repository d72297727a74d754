#include <cmath>

#include "doctest.h"
#include "edgeboot/bootstrap.hpp"
#include "edgeboot/population.hpp"
#include "edgeboot/smooth_model.hpp"

using namespace edgeboot;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double a : v) x(i++) = a;
  return x;
}

CumulantSet univariate(double k2, double k3, double k4) {
  CumulantSet c(1, 4, CumulantSet::Kind::cumulants);
  c.set({0, 0}, k2);
  c.set({0, 0, 0}, k3);
  c.set({0, 0, 0, 0}, k4);
  return c;
}

}  // namespace

TEST_CASE("catalog") {
  for (const auto& name : statistic_names()) {
    const SmoothStatistic s = make_statistic(name, 1);
    CHECK(s.name == name);
    CHECK(s.value);
  }
  CHECK_THROWS(make_statistic("median"));
  CHECK_THROWS(make_statistic("variance", 2));
  const SmoothStatistic st = make_statistic("studentized_mean", 2);
  CHECK(st.d == 4);
  CHECK(st.q == 2);
  CHECK(st.lift_observation(vec({2.0, -1.0})) == vec({2.0, -1.0, 4.0, 1.0}));
}

TEST_CASE("taylor expansion of simple statistics") {
  const SmoothStatistic mean = make_statistic("mean", 2);
  const StatisticExpansion lin = taylor_expand(mean, vec({0.3, -0.2}), 50.0, 2);
  for (int c = 0; c < 2; ++c) {
    CHECK(lin.grades[c][0].coefficient(c == 0 ? ExponentVector{1, 0} : ExponentVector{0, 1}) == doctest::Approx(1.0));
    CHECK(lin.grades[c][0].size() == 1);
    for (std::size_t s = 1; s < lin.grades[c].size(); ++s) CHECK(lin.grades[c][s].empty());
  }

  const SmoothStatistic sq = make_statistic("square");
  const double a = 1.4, n = 25.0;
  const StatisticExpansion e = taylor_expand(sq, vec({a}), n, 1);
  const MultiPolynomial comp = e.component(0);
  CHECK(comp.coefficient({1}) == doctest::Approx(2.0 * a));
  CHECK(comp.coefficient({2}) == doctest::Approx(1.0 / std::sqrt(n)));
  CHECK(e.offset(0) == doctest::Approx(std::sqrt(n) * a * a));
  CHECK(e.evaluate(vec({0.7}))(0) == doctest::Approx(scaled_statistic(sq, vec({a}), n, vec({0.7}))(0)));
}

TEST_CASE("remainder of exp(x) - 1") {
  const SmoothStatistic ex = make_statistic("exp");
  for (double n : {100.0, 1000.0, 10000.0}) {
    StatisticExpansion e = taylor_expand(ex, vec({0.0}), n, 1);
    Eigen::MatrixXd grid(201, 1);
    for (int i = 0; i <= 200; ++i) grid(i, 0) = -std::log(n) + 2.0 * std::log(n) * i / 200.0;
    const double c = estimate_remainder_constant(ex, vec({0.0}), e, grid);
    MESSAGE("C* at n=" << n << ": " << c);
    CHECK(e.remainder.estimated);
    CHECK(c < 1.0);
  }
}

TEST_CASE("finite differences agree with analytic derivatives") {
  SmoothStatistic bare;
  bare.name = "exp_bare";
  bare.value = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    return Eigen::VectorXd::Constant(1, std::exp(x(0) - a(0)) - 1.0).eval();
  };
  const Eigen::VectorXd a = vec({0.3});
  CHECK(statistic_derivative(bare, 0, {0}, a) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(statistic_derivative(bare, 0, {0, 0}, a) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(statistic_derivative(bare, 0, {0, 0, 0}, a) == doctest::Approx(1.0).epsilon(1e-3));
  const SmoothStatistic ex = make_statistic("exp");
  CHECK(statistic_derivative(ex, 0, {0, 0, 0}, a) == doctest::Approx(1.0));
}

TEST_CASE("approximate cumulants of the mean") {
  const SmoothStatistic mean = make_statistic("mean", 1);
  const double k2 = 2.0, k3 = 1.5, k4 = 3.0;
  const auto ac = approximate_cumulants(mean, vec({0.0}), {univariate(k2, k3, k4)}, {40}, 2);
  CHECK(ac.W(0, 0) == doctest::Approx(k2));
  CHECK(ac.T(0, 0) == doctest::Approx(1.0 / std::sqrt(k2)));
  CHECK(ac.eta.find(3, 1)->at(std::vector<int>{0, 0, 0}) == doctest::Approx(k3 / std::pow(k2, 1.5)));
  CHECK(ac.eta.find(4, 2)->at(std::vector<int>{0, 0, 0, 0}) == doctest::Approx(k4 / (k2 * k2)));
  const SymmetricTensor* v2 = ac.eta.find(2, 2);
  CHECK((v2 == nullptr || v2->max_abs() < 1e-15));
  const EdgeworthExpansion e = ac.expansion();
  CHECK(e.polynomial(1).coefficient({3}) == doctest::Approx(k3 / std::pow(k2, 1.5) / 6.0));
}

TEST_CASE("approximate cumulants of a difference of means") {
  const SmoothStatistic diff = make_statistic("mean_difference", 1);
  const auto ac = approximate_cumulants(diff, vec({0.0, 0.0}), {univariate(1.0, 2.0, 0.0), univariate(3.0, 0.5, 0.0)},
                                        {30, 30}, 1);
  // rho_j = 1/2: order 2 scales by 2, order 3 by 4 (and the second sample enters with sign -1).
  CHECK(ac.W(0, 0) == doctest::Approx(2.0 * (1.0 + 3.0)));
  CHECK(ac.raw.find(3, 1)->at(std::vector<int>{0, 0, 0}) == doctest::Approx(4.0 * (2.0 - 0.5)));

  // Monte Carlo check with Exp(1) - 1 against N(0, 1), 30 observations each
  const auto mixed = approximate_cumulants(diff, vec({0.0, 0.0}), {univariate(1.0, 2.0, 6.0), univariate(1.0, 0.0, 0.0)},
                                           {30, 30}, 1);
  const double k3_pred = mixed.raw.find(3, 1)->at(std::vector<int>{0, 0, 0}) / std::sqrt(60.0);
  const Population pe = make_population("exp");
  const Population pn = make_population("normal");
  const int reps = 100000;
  std::vector<double> v(reps);
  for (int r = 0; r < reps; ++r) {
    StreamRng rng(31, static_cast<std::uint64_t>(r));
    const double m1 = pe.sample(30, rng).mean(), m2 = pn.sample(30, rng).mean();
    v[static_cast<std::size_t>(r)] = std::sqrt(60.0) * (m1 - m2);
  }
  Eigen::Map<Eigen::VectorXd> vv(v.data(), reps);
  const double mu = vv.mean();
  const double c2 = (vv.array() - mu).square().mean();
  const double c3 = (vv.array() - mu).cube().mean();
  CHECK(mixed.W(0, 0) == doctest::Approx(4.0));
  CHECK(c2 == doctest::Approx(4.0).epsilon(0.02));
  // sd of the sample third moment here is about 0.1
  CHECK(std::abs(c3 - k3_pred) < 0.4);
}

TEST_CASE("approximate cumulants of the square") {
  const SmoothStatistic sq = make_statistic("square");
  const double a = 1.0, k2 = 1.3, k3 = 0.4;
  const auto ac = approximate_cumulants(sq, vec({a}), {univariate(k2, k3, 0.5)}, {50}, 2);
  CHECK(ac.W(0, 0) == doctest::Approx(4.0 * a * a * k2));
  CHECK(ac.raw.find(1, 1)->at(std::vector<int>{0}) == doctest::Approx(k2));
  CHECK(ac.raw.find(2, 2)->at(std::vector<int>{0, 0}) == doctest::Approx(4.0 * a * k3 + 2.0 * k2 * k2));

  // MC variance of the bootstrap statistic from a sample with mean 1
  StreamRng rng(5, 0);
  Eigen::MatrixXd x = make_population("normal").sample(50, rng);
  x.array() += 1.0 - x.mean();
  const SampleSet s({x});
  const auto cs = s.resampling_cumulants(4);
  const auto acs = approximate_cumulants(sq, s.stacked_means(), cs, {50}, 2);
  const auto boot = bootstrap_distribution(sq, s, 100000, 3);
  const double mean = boot.values.col(0).mean();
  const double var = (boot.values.col(0).array() - mean).square().mean();
  const double predicted = acs.W(0, 0) + acs.raw.find(2, 2)->at(std::vector<int>{0, 0}) / 50.0;
  CHECK(var == doctest::Approx(predicted).epsilon(0.03));
}

TEST_CASE("degenerate and unbalanced inputs") {
  const SmoothStatistic sq = make_statistic("square");
  CHECK_THROWS(approximate_cumulants(sq, vec({0.0}), {univariate(1.0, 0.0, 0.0)}, {50}, 1));
  const SmoothStatistic diff = make_statistic("mean_difference", 1);
  CHECK_THROWS(approximate_cumulants(diff, vec({0.0, 0.0}), {univariate(1, 0, 0), univariate(1, 0, 0)}, {2, 500}, 1));
  CHECK_THROWS(approximate_cumulants(make_statistic("mean"), vec({0.0}), {univariate(1, 0, 0)}, {50}, 3));
}

TEST_CASE("region membership") {
  const SmoothStatistic id = make_statistic("mean", 2);
  const Ball unit = Ball::sphere(Eigen::VectorXd::Zero(2), 1.0);
  CHECK(region_membership(id, Eigen::VectorXd::Zero(2), unit, 10.0, Eigen::VectorXd::Zero(2)));
  const SmoothStatistic m1 = make_statistic("mean", 1);
  StreamRng rng(2, 0);
  for (int i = 0; i < 200; ++i) {
    const double t = rng.normal(), x = rng.normal(), a = rng.normal();
    CHECK(region_membership(m1, vec({a}), Ball::half_line(t), 30.0, vec({x})) == (x <= t));
  }
}

TEST_CASE("dagger membership") {
  const SmoothStatistic id = make_statistic("mean", 2);
  const Ball b = Ball::sphere(vec({0.3, -0.2}), 1.1);
  const double n = 40.0;
  const std::vector<Eigen::MatrixXd> eye{Eigen::MatrixXd::Identity(2, 2)};
  const std::vector<Eigen::VectorXd> zero{Eigen::VectorXd::Zero(2)};
  const Eigen::VectorXd c = vec({0.05, -0.02});
  StreamRng rng(9, 0);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = vec({rng.normal(), rng.normal()});
    const Eigen::VectorXd a = vec({rng.normal(), rng.normal()});
    CHECK(region_dagger_membership(id, a, b, n, x, eye, zero) == region_membership(id, a, b, n, x));
    CHECK(region_dagger_membership(id, a, b, n, x, eye, {c}) == region_membership(id, a, b, n, x + std::sqrt(n) * c));

    Eigen::MatrixXd m(2, 2);
    m << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    const Eigen::MatrixXd spd = m * m.transpose() + 0.1 * Eigen::MatrixXd::Identity(2, 2);
    const Eigen::VectorXd y = vec({rng.normal(), rng.normal()});
    const Eigen::VectorXd fwd = dagger_transform(y, n, {spd}, {c});
    CHECK(region_dagger_membership(id, a, b, n, fwd, {spd}, {c}) == region_membership(id, a, b, n, y));
  }
}

TEST_CASE("polynomial map of the variance statistic") {
  const SmoothStatistic var = make_statistic("variance");
  const PolynomialMap p = taylor_expand(var, vec({0.5, 1.25}), 100.0, 1).polynomial_map();
  CHECK(p.q() == 1);
  CHECK(p.d() == 2);
  const Eigen::MatrixXd c = p.linear_coefficients();
  CHECK(c(0, 0) == doctest::Approx(-1.0));
  CHECK(c(0, 1) == doctest::Approx(1.0));
  CHECK(p.b() == doctest::Approx(2.0));
}
