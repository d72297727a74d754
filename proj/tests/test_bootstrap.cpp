#include <cmath>
#include <sstream>

#include "doctest.h"
#include "edgeboot/bootstrap.hpp"
#include "edgeboot/population.hpp"

using namespace edgeboot;

namespace {

SampleSet column(std::initializer_list<double> values) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(values.size()), 1);
  int i = 0;
  for (double v : values) x(i++, 0) = v;
  return SampleSet({x});
}

SampleSet exp_sample(int n, std::uint64_t seed) {
  StreamRng rng(seed, 0);
  return SampleSet({make_population("exp").sample(n, rng)});
}

}  // namespace

TEST_CASE("sample set invariants") {
  CHECK_THROWS(column({1.0}));
  CHECK_THROWS(SampleSet(std::vector<Eigen::MatrixXd>{}));
  CHECK_THROWS(SampleSet({Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(3, 2)}));
  const SampleSet s = column({1.0, 2.0, 6.0});
  CHECK(s.mean(0)(0) == doctest::Approx(3.0));
  CHECK(s.covariance(0)(0, 0) == doctest::Approx(14.0 / 3.0));
  CHECK(s.total_n() == 3);
  const SampleSet two({Eigen::MatrixXd::Zero(4, 1), Eigen::MatrixXd::Zero(8, 1)});
  CHECK(two.balance_ratio() == 2.0);
}

TEST_CASE("resampling is deterministic and uniform") {
  Eigen::MatrixXd idx(10, 1);
  for (int i = 0; i < 10; ++i) idx(i, 0) = i;
  const SampleSet s({idx});
  CHECK(resample(s, 42).sample(0) == resample(s, 42).sample(0));
  CHECK(resample(s, 42).sample(0) != resample(s, 43).sample(0));

  const int reps = 100000;
  std::int64_t hits = 0;
  for (int r = 0; r < reps; ++r) {
    const auto x = resample(s, static_cast<std::uint64_t>(r)).sample(0);
    for (int i = 0; i < 10; ++i) hits += x(i, 0) == 1.0;
  }
  const double total = 10.0 * reps;
  const double p = hits / total;
  CHECK(std::abs(p - 0.1) <= 3.0 * std::sqrt(0.1 * 0.9 / total));
}

TEST_CASE("bootstrap distribution") {
  const SampleSet s = exp_sample(20, 1);
  SmoothStatistic constant = make_statistic("mean", 1);
  constant.value = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1).eval(); };
  const auto c = bootstrap_distribution(constant, s, 1000, 7);
  CHECK(c.values.cwiseAbs().maxCoeff() == 0.0);

  const auto lin = bootstrap_distribution(make_statistic("mean", 1), s, 100000, 7);
  const double mean = lin.values.col(0).mean();
  const double sd = std::sqrt((lin.values.col(0).array() - mean).square().mean());
  CHECK(std::abs(mean) <= 3.0 * sd / std::sqrt(100000.0));

  BootstrapOptions par;
  par.jobs = 4;
  const auto lin4 = bootstrap_distribution(make_statistic("mean", 1), s, 100000, 7, par);
  CHECK(lin4.values == lin.values);
}

TEST_CASE("exact enumeration") {
  std::uint64_t count = 0, mult = 0;
  for_each_composition(3, [&](const std::vector<int>&, std::uint64_t m) {
    ++count;
    mult += m;
  });
  CHECK(count == 10);
  CHECK(mult == 27);

  // sqrt(2)(Xbar* - 1/2) on {0, 1}
  const auto law = exact_bootstrap_law(make_statistic("mean", 1), column({0.0, 1.0}));
  CHECK(law.total == 4);
  CHECK(law.count(Ball::half_line(-0.5)) == 1);
  CHECK(law.count(Ball::interval(-0.1, 0.1)) == 2);
  CHECK(law.probability(Ball::half_line(0.0)) == 0.75);

  const auto big = exact_bootstrap_law(make_statistic("mean", 1), exp_sample(6, 3));
  std::uint64_t sum = 0;
  for (const auto& a : big.atoms) sum += a.count;
  CHECK(sum == big.total);
  CHECK(big.probability(Ball::whole_space(1)) == 1.0);
  const double t = 0.2;
  CHECK(big.count(Ball::half_line(t)) + big.count(Ball::sphere(Eigen::VectorXd::Constant(1, t + 1e6), 1e6 - 1e-12)) <=
        big.total);
  CHECK_THROWS(exact_bootstrap_law(make_statistic("mean", 1), exp_sample(9, 3)));
}

TEST_CASE("exact vs Monte Carlo at n = 6") {
  const SampleSet s = exp_sample(6, 11);
  const auto stat = make_statistic("mean", 1);
  const auto law = exact_bootstrap_law(stat, s);
  const auto mc = bootstrap_distribution(stat, s, 200000, 5);
  std::vector<Ball> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(Ball::half_line(-2.0 + 4.0 * i / 19.0));
  const auto cdf = exact_bootstrap_cdf(stat, s, grid);
  double gap = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(cdf[i] == law.probability(grid[i]));
    gap = std::max(gap, std::abs(cdf[i] - mc.probability(grid[i]).value));
  }
  CHECK(gap <= 0.006);

  MCConfig cfg;
  cfg.samples = 200000;
  cfg.seed = 9;
  const Estimate q_exact = product_measure_eval(ProductMeasure::Q, {Ball::half_line(0.3)}, s, true);
  const Estimate q_mc = product_measure_eval(ProductMeasure::Q, {Ball::half_line(0.3)}, s, false, cfg);
  CHECK(std::abs(q_exact.value - q_mc.value) <= 0.006);
}

TEST_CASE("product measures") {
  const SampleSet one = exp_sample(30, 4);
  StreamRng rng(8, 0);
  const SampleSet two({one.sample(0), make_population("normal").sample(25, rng)});
  MCConfig mc;
  mc.samples = 50000;
  mc.seed = 2;
  CHECK(product_measure_eval(ProductMeasure::Q, {Ball::whole_space(1), Ball::whole_space(1)}, two, false, mc).value == 1.0);
  const Estimate single = product_measure_eval(ProductMeasure::Q, {Ball::half_line(0.1)}, one, false, mc);
  const Estimate paired =
      product_measure_eval(ProductMeasure::Q, {Ball::half_line(0.1), Ball::whole_space(1)}, two, false, mc);
  CHECK(single.value == paired.value);
  const Estimate dag = product_measure_eval(ProductMeasure::Qdagger, {Ball::half_line(0.1)}, one, false, mc);
  CHECK(dag.value > 0.0);
  CHECK(dag.value < 1.0);
}

TEST_CASE("truncation") {
  const SampleSet s = exp_sample(50, 12);
  const TruncationReport r = truncate_and_center(s);
  CHECK(r.threshold == doctest::Approx(std::sqrt(50.0)));
  CHECK(r.truncation_fraction[0] == 0.0);
  CHECK(r.y_means[0].norm() < 1e-14);
  // V-dagger is the covariance of the standardized atoms, i.e. the identity
  CHECK((r.vdagger[0] - Eigen::MatrixXd::Identity(1, 1)).norm() < 1e-12);

  // A threshold below the largest standardized atom zeroes exactly that atom.
  const SampleSet out = column({-1.0, 0.0, 1.0, 0.5, -0.5, 0.2, -0.2, 20.0});
  const TruncationReport base = truncate_and_center(out);
  double biggest = 0.0, second = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double v = std::abs(base.y_atoms[0](i, 0));
    if (v > biggest) {
      second = biggest;
      biggest = v;
    } else {
      second = std::max(second, v);
    }
  }
  TruncationOptions opt;
  opt.threshold = 0.5 * (biggest + second);
  const TruncationReport cut = truncate_and_center(out, opt);
  CHECK(cut.truncation_fraction[0] == doctest::Approx(1.0 / 8.0));
  CHECK(cut.y_atoms[0](7, 0) == 0.0);
  CHECK(cut.y_means[0].norm() > 0.0);

  opt.convention = TruncationConvention::keep_large;
  CHECK(truncate_and_center(out, opt).truncation_fraction[0] == doctest::Approx(7.0 / 8.0));

  // ||a|| over simulated N(0,1) samples
  double worst = 0.0;
  const Population normal = make_population("normal");
  for (int r = 0; r < 200; ++r) {
    StreamRng rng(77, static_cast<std::uint64_t>(r));
    worst = std::max(worst, truncate_and_center(SampleSet({normal.sample(100, rng)})).a.norm());
  }
  MESSAGE("max ||a|| over 200 N(0,1) samples of n=100: " << worst);
  CHECK(worst <= 1.0);
}

TEST_CASE("sample csv round trip") {
  StreamRng rng(1, 0);
  const SampleSet s({make_population("normal", 2).sample(5, rng), make_population("normal", 2).sample(3, rng)});
  std::stringstream buf;
  write_sample_csv(buf, s);
  const SampleSet back = read_sample_csv(buf);
  CHECK(back.k() == 2);
  CHECK(back.sample(0) == s.sample(0));
  CHECK(back.sample(1) == s.sample(1));

  std::istringstream bad("sample_id,x1\n0,1.0\n0,abc\n");
  CHECK_THROWS_WITH(read_sample_csv(bad), doctest::Contains("3"));
  std::istringstream header("id,x1\n0,1\n0,2\n");
  CHECK_THROWS(read_sample_csv(header));
}
