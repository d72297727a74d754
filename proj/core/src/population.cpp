#include "edgeboot/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace edgeboot {

namespace {
constexpr std::complex<double> I(0.0, 1.0);
}  // namespace

Eigen::VectorXd Population::draw(StreamRng& rng) const {
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x(i) = draw_coordinate(rng);
  return x;
}

Eigen::MatrixXd Population::sample(int n, StreamRng& rng) const {
  if (n < 1) throw std::invalid_argument("Population::sample: n must be positive");
  Eigen::MatrixXd m(n, dim);
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < dim; ++i) m(r, i) = draw_coordinate(rng);
  return m;
}

std::complex<double> Population::cf(const Eigen::VectorXd& t) const {
  if (t.size() != dim) throw std::invalid_argument("Population::cf: dimension mismatch");
  std::complex<double> v = 1.0;
  for (int i = 0; i < dim; ++i) v *= coordinate_cf(t(i));
  return v;
}

double Population::log_density(const Eigen::VectorXd& x) const {
  if (!has_density()) throw std::logic_error("population '" + name + "' has no density");
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += coordinate_log_density(x(i));
  return s;
}

CumulantSet Population::cumulants(int max_order) const {
  if (max_order > static_cast<int>(coordinate_cumulants.size()))
    throw std::invalid_argument("Population::cumulants: order not available");
  CumulantSet cs(dim, max_order, CumulantSet::Kind::cumulants);
  for (int r = 1; r <= max_order; ++r)
    for (int i = 0; i < dim; ++i) cs.set(std::vector<int>(static_cast<std::size_t>(r), i), coordinate_cumulants[static_cast<std::size_t>(r - 1)]);
  return cs;
}

std::vector<std::string> population_names() { return {"normal", "exp", "chisq", "lattice"}; }

Population make_population(const std::string& name, int dim, std::optional<double> param) {
  if (dim < 1) throw std::invalid_argument("make_population: dimension must be positive");
  Population p;
  p.name = name;
  p.dim = dim;
  p.mean = Eigen::VectorXd::Zero(dim);
  using cd = std::complex<double>;
  if (name == "normal") {
    p.draw_coordinate = [](StreamRng& rng) { return rng.normal(); };
    p.coordinate_cf = [](double t) { return cd(std::exp(-0.5 * t * t), 0.0); };
    p.coordinate_log_density = [](double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi); };
    p.coordinate_cumulants = {0.0, 1.0, 0.0, 0.0};
  } else if (name == "exp") {
    p.draw_coordinate = [](StreamRng& rng) { return -std::log1p(-rng.uniform()) - 1.0; };
    p.coordinate_cf = [](double t) { return std::exp(-I * t) / (1.0 - I * t); };
    p.coordinate_log_density = [](double x) {
      return x > -1.0 ? -(x + 1.0) : -std::numeric_limits<double>::infinity();
    };
    p.coordinate_cumulants = {0.0, 1.0, 2.0, 6.0};
  } else if (name == "chisq") {
    const double df = param.value_or(3.0);
    if (df < 1.0 || df != std::floor(df)) throw std::invalid_argument("chisq: df must be a positive integer");
    p.param = df;
    const double s = std::sqrt(2.0 * df);
    const int k = static_cast<int>(df);
    p.draw_coordinate = [k, df, s](StreamRng& rng) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) {
        const double z = rng.normal();
        acc += z * z;
      }
      return (acc - df) / s;
    };
    p.coordinate_cf = [df, s](double t) { return std::pow(1.0 - 2.0 * I * t / s, -0.5 * df) * std::exp(-I * t * df / s); };
    p.coordinate_log_density = [df, s](double x) {
      const double y = s * x + df;
      if (y <= 0.0) return -std::numeric_limits<double>::infinity();
      return std::log(s) + (0.5 * df - 1.0) * std::log(y) - 0.5 * y - 0.5 * df * std::log(2.0) - std::lgamma(0.5 * df);
    };
    // chi2_df cumulants: 2^{r-1} (r-1)! df
    p.coordinate_cumulants = {0.0, 1.0, 8.0 * df / std::pow(s, 3), 48.0 * df / std::pow(s, 4)};
  } else if (name == "lattice") {
    p.cramer = false;
    p.draw_coordinate = [](StreamRng& rng) { return (rng() >> 63) ? 1.0 : -1.0; };
    p.coordinate_cf = [](double t) { return cd(std::cos(t), 0.0); };
    p.coordinate_cumulants = {0.0, 1.0, 0.0, -2.0};
  } else {
    throw std::invalid_argument("unknown population '" + name + "'");
  }
  return p;
}

Estimate absolute_moment(const Population& pop, double r, const MCConfig& mc) {
  if (mc.samples < 2) throw std::invalid_argument("absolute_moment: need at least 2 samples");
  const std::int64_t nblocks = (mc.samples + mc.block_size - 1) / mc.block_size;
  std::vector<std::pair<double, double>> part(static_cast<std::size_t>(nblocks));
  parallel_for(nblocks, mc.jobs, [&](std::int64_t b) {
    StreamRng rng(mc.seed, static_cast<std::uint64_t>(b));
    double s = 0.0, ss = 0.0;
    for (std::int64_t i = b * mc.block_size; i < std::min(mc.samples, (b + 1) * mc.block_size); ++i) {
      const double v = std::pow((pop.draw(rng) - pop.mean).norm(), r);
      s += v;
      ss += v * v;
    }
    part[static_cast<std::size_t>(b)] = {s, ss};
  });
  double s = 0.0, ss = 0.0;
  for (const auto& [a, b] : part) {
    s += a;
    ss += b;
  }
  const double N = static_cast<double>(mc.samples);
  const double m = s / N;
  return {m, std::sqrt(std::max(0.0, ss / N - m * m) / N)};
}

}  // namespace edgeboot
