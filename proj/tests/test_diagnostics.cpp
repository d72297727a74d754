#include <cmath>
#include <sstream>

#include "doctest.h"
#include "edgeboot/diagnostics.hpp"

using namespace edgeboot;

namespace {

SampleSet normal_sample(int n, std::uint64_t seed, int d = 1) {
  StreamRng rng(seed, 0);
  return SampleSet({make_population("normal", d).sample(n, rng)});
}

}  // namespace

TEST_CASE("populations") {
  for (const auto& name : population_names()) {
    const Population p = make_population(name, 2);
    StreamRng rng(1, 0);
    const Eigen::MatrixXd x = p.sample(20000, rng);
    CHECK(std::abs(x.col(0).mean()) < 0.05);
    CHECK(std::abs((x.col(1).array() - x.col(1).mean()).square().mean() - 1.0) < 0.08);
    CHECK(std::abs(p.cf(Eigen::VectorXd::Zero(2)) - 1.0) < 1e-15);
    CHECK(p.cumulants(4).at({0, 0}) == 1.0);
  }
  CHECK_FALSE(make_population("lattice").cramer);
  CHECK_FALSE(make_population("lattice").has_density());
  CHECK(make_population("exp").cumulants(3).univariate(3) == 2.0);
  CHECK(make_population("chisq", 1, 2.0).cumulants(3).univariate(3) == doctest::Approx(2.0));
  CHECK_THROWS(make_population("cauchy"));
  CHECK_THROWS(make_population("chisq", 1, 2.5));
  // Exp(1) - 1 characteristic function
  const auto cf = make_population("exp").coordinate_cf(0.7);
  const auto expected = std::exp(std::complex<double>(0.0, -0.7)) / std::complex<double>(1.0, -0.7);
  CHECK(std::abs(cf - expected) < 1e-15);
}

TEST_CASE("event configuration") {
  EventConfig c;
  CHECK(c.minimal_m() == 8);
  CHECK(c.e2_r() == 5);
  c.e2_exponent = E2Exponent::lemma;
  CHECK(c.e2_r() == 3);
  c.C2 = 1.0;
  CHECK_NOTHROW(c.validate());
  c.C3 = 1.0;
  CHECK_THROWS(c.validate());
  c.C3 = 4.0;
  c.m = 7;
  CHECK_THROWS(c.validate());
}

TEST_CASE("E1") {
  EventConfig c;
  c.C2 = 1.0;
  const auto mean = make_statistic("mean", 1);
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(1);
  int hits_big = 0, hits_small = 0;
  for (int r = 0; r < 50; ++r) {
    const SampleSet s = normal_sample(400, 100 + r);
    // C1 also bounds |Xbar - mu| by 1/C1, so "large" means moderate here
    c.C1 = 5.0;
    hits_big += e1_indicator(s, mean, mu, c);
    c.C1 = 1e-6;
    hits_small += e1_indicator(s, mean, mu, c);
  }
  CHECK(hits_big >= 45);
  CHECK(hits_small == 0);
  CHECK(sample_xi(normal_sample(400, 1), mean, 1) < 0.5);
}

TEST_CASE("E2") {
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 0.0, 3.0;
  const SampleSet s({x});
  CHECK(e2_conditional_moment(s, 2.0) == doctest::Approx(2.0));
  CHECK(e2_conditional_moment(s, 5.0) == doctest::Approx((1.0 + 1.0 + 32.0) / 3.0));
  EventConfig c;
  c.C2 = 100.0;
  CHECK(e2_indicator(s, c));
  c.C2 = 1.0;
  CHECK_FALSE(e2_indicator(s, c));
}

TEST_CASE("E3 and E4") {
  Eigen::MatrixXd x(4, 2);
  const double a = std::sqrt(1.6), b = std::sqrt(2.4);
  x << a, 0, -a, 0, 0, b, 0, -b;
  const SampleSet s({x});
  CHECK((s.covariance(0) - Eigen::Vector2d(0.8, 1.2).asDiagonal().toDenseMatrix()).norm() < 1e-12);
  EventConfig c;
  c.C2 = 1.0;
  c.C3 = 2.0;
  const auto [e3, e4] = e3_e4_indicator(s, c);
  CHECK(e3);
  CHECK(e4);
  c.C3 = 1.1;
  CHECK_FALSE(e3_e4_indicator(s, c).first);
}

TEST_CASE("E5") {
  const SampleSet s = normal_sample(50, 3);
  EventConfig c;
  c.C2 = 1.0;
  MCConfig mc;
  mc.samples = 2000;
  mc.seed = 4;
  const CharacteristicFn same = [&](const Eigen::VectorXd& t) { return empirical_cf(s.sample(0), t); };
  const E5Result zero = e5_integral(s, same, c, mc);
  CHECK(zero.value.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(zero.holds);

  const Population p = make_population("normal");
  const CharacteristicFn pcf = [&](const Eigen::VectorXd& t) { return p.cf(t); };
  double last = INFINITY;
  for (int m : {8, 10, 14, 20}) {
    c.m = m;
    const double v = e5_integral_quadrature(s, pcf, c);
    CHECK(v <= last);
    last = v;
  }
  c.m = 8;
  const E5Result is = e5_integral(s, pcf, c, MCConfig{20000, 5, 1, 8192});
  CHECK(std::abs(is.value.value - e5_integral_quadrature(s, pcf, c)) <= 4.0 * is.value.se + 1e-15);

  // Minimal m at n = 200: the event holds in at least 95% of samples.
  int holds = 0;
  for (int r = 0; r < 200; ++r) {
    const SampleSet t = normal_sample(200, 1000 + static_cast<std::uint64_t>(r));
    holds += e5_integral(t, pcf, c, MCConfig{2000, static_cast<std::uint64_t>(r), 1, 8192}).holds;
  }
  MESSAGE("E5 held in " << holds << " of 200 samples");
  CHECK(holds >= 190);
}

TEST_CASE("cramer probe") {
  CHECK(cramer_probe(make_population("lattice"), 1.0, 10.0) > 0.999);
  CHECK(cramer_probe(make_population("normal"), 1.0, 10.0) < 0.61);
}

TEST_CASE("failure probability estimators agree") {
  const Population p = make_population("normal");
  EventConfig c;
  c.C2 = 1.0;
  c.C3 = 1.6;
  const SampleEvent e3 = [&](const SampleSet& s) { return e3_e4_indicator(s, c).first; };
  FailureOptions plain;
  plain.reps = 20000;
  plain.seed = 6;
  const Estimate a = event_failure_probability(p, 25, e3, plain);
  FailureOptions is = plain;
  is.scales = {1.3};
  const Estimate b = event_failure_probability(p, 25, e3, is);
  CHECK(a.value > 0.0);
  CHECK(std::abs(a.value - b.value) <= 4.0 * std::hypot(a.se, b.se));
  FailureOptions par = is;
  par.jobs = 3;
  const Estimate b3 = event_failure_probability(p, 25, e3, par);
  CHECK(b3.value == b.value);
  CHECK(b3.se == b.se);
}

TEST_CASE("rate fits") {
  std::vector<RatePoint> exact;
  for (int n : {10, 20, 40, 80}) exact.push_back({n, {3.0 / n, 0.0}, false});
  CHECK(rate_fit(exact).slope == doctest::Approx(-1.0).epsilon(1e-12));
  std::vector<RatePoint> flat;
  for (int n : {10, 20, 40}) flat.push_back({n, {0.2, 0.01}, false});
  CHECK(std::abs(rate_fit(flat).slope) < 1e-12);

  std::vector<RatePoint> zeros{{10, {0.1, 0.01}, false}, {20, {0.0, 0.0}, false}, {40, {0.0, 0.0}, false}};
  CHECK_THROWS_WITH(rate_fit(zeros), doctest::Contains("decay below MC resolution"));
  const RateFit floored = rate_fit(zeros, 1e-4);
  CHECK(floored.points[1].floored);

  std::ostringstream out;
  write_rate_csv(out, rate_fit(exact));
  CHECK(out.str().rfind("n,estimate,se\n", 0) == 0);
  CHECK(out.str().find("slope,") != std::string::npos);

  // Prop. 1 grid for the identity map decays like n^{-1/2}
  const PolynomialMap ident({{MultiPolynomial::variable(1, 0)}});
  const auto est = [&](int n) {
    MCConfig mc;
    mc.samples = 1000000;
    mc.seed = static_cast<std::uint64_t>(n);
    return prop1_probability(ident, {Ball::half_line(0.0), Ball::half_line(0.5)}, 0.5, 2.0, n, mc).sup;
  };
  CHECK(rate_fit(est, {100, 1000, 10000}).slope <= -0.5 + 0.3);
}
