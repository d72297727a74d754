#include "edgeboot/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "edgeboot/edgeworth.hpp"
#include "edgeboot/linalg.hpp"
#include "edgeboot/quadrature.hpp"

namespace edgeboot {

int EventConfig::e2_r() const {
  return e2_exponent == E2Exponent::display ? std::max(2 * nu + 3, d + 1) : std::max(2 * nu + 1, d + 1);
}

int EventConfig::minimal_m() const {
  const double bound = 2.0 * d * (u + 1.0) + nu + 3.0 + lambda;
  return static_cast<int>(std::floor(bound)) + 1;
}

void EventConfig::validate() const {
  if (!(C1 > 0.0) || !(C2 > 0.0) || !(u > 0.0) || !(C > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("EventConfig: constants must be positive");
  if (!(C3 > 1.0)) throw std::invalid_argument("EventConfig: C3 must exceed 1");
  if (d < 1 || nu < 1) throw std::invalid_argument("EventConfig: need d >= 1 and nu >= 1");
  const double bound = 2.0 * d * (u + 1.0) + nu + 3.0 + lambda;
  if (!(effective_m() > bound))
    throw std::invalid_argument("EventConfig: m must exceed 2d(u+1)+nu+3+lambda = " + std::to_string(bound));
}

EventConfig resolve_event_config(EventConfig cfg, const Population& pop, const MCConfig& mc) {
  cfg.d = pop.dim;
  if (cfg.C2 <= 0.0) cfg.C2 = 10.0 * absolute_moment(pop, cfg.e2_r(), mc).value;
  cfg.validate();
  return cfg;
}

double sample_xi(const SampleSet& sset, const SmoothStatistic& stat, int nu) {
  const auto ac = approximate_cumulants(stat, sset.stacked_means(), sset.resampling_cumulants(nu + 2),
                                        sset.sizes(), nu);
  return xi_nu(ac.expansion());
}

bool e1_indicator(const SampleSet& sset, const SmoothStatistic& stat, const Eigen::VectorXd& mu,
                  const EventConfig& cfg) {
  if (mu.size() != sset.k() * sset.d()) throw std::invalid_argument("e1_indicator: population mean has wrong size");
  if ((sset.stacked_means() - mu).norm() > 1.0 / cfg.C1) return false;
  try {
    return sample_xi(sset, stat, cfg.nu) <= cfg.C1;
  } catch (const std::domain_error&) {
    return false;  // degenerate sample covariance
  }
}

double e2_conditional_moment(const SampleSet& sset, double r) {
  if (sset.k() != 1) throw std::invalid_argument("e2: single sample expected");
  const Eigen::MatrixXd c = sset.sample(0).rowwise() - sset.mean(0).transpose();
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) s += std::pow(c.row(i).norm(), r);
  return s / static_cast<double>(c.rows());
}

bool e2_indicator(const SampleSet& sset, const EventConfig& cfg, double r) {
  return e2_conditional_moment(sset, r) <= cfg.C2;
}

bool e2_indicator(const SampleSet& sset, const EventConfig& cfg) { return e2_indicator(sset, cfg, cfg.e2_r()); }

std::pair<bool, bool> e3_e4_indicator(const SampleSet& sset, const EventConfig& cfg,
                                      const TruncationOptions& truncation) {
  if (sset.k() != 1) throw std::invalid_argument("e3/e4: single sample expected");
  if (sset.n(0) < sset.d() + 1) throw std::invalid_argument("e3/e4: need n >= d + 1");
  const Eigen::MatrixXd vhat = sset.covariance(0);
  const bool e3 = lambda_max(vhat) <= cfg.C3;
  bool e4 = false;
  if (is_spd(vhat)) {
    const TruncationReport rep = truncate_and_center(sset, truncation);
    e4 = lambda_max(rep.vdagger.front()) <= 2.0;
  }
  return {e3, e4};
}

std::complex<double> empirical_cf(const Eigen::MatrixXd& sample, const Eigen::VectorXd& t) {
  const Eigen::VectorXd mean = sample.colwise().mean().transpose();
  double re = 0.0, im = 0.0;
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    const double a = t.dot(sample.row(i).transpose() - mean);
    re += std::cos(a);
    im += std::sin(a);
  }
  const double n = static_cast<double>(sample.rows());
  return {re / n, im / n};
}

namespace {

double unit_sphere_area(int d) {
  // 2 pi^{d/2} / Gamma(d/2)
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double e5_threshold(double n, const EventConfig& cfg) {
  return std::pow(n, -cfg.d * (cfg.u + 1.0) - 0.5 * (cfg.nu + 3));
}

}  // namespace

E5Result e5_integral(const SampleSet& sset, const CharacteristicFn& cf, const EventConfig& cfg, const MCConfig& mc) {
  if (sset.k() != 1) throw std::invalid_argument("e5: single sample expected");
  if (!cf) throw std::invalid_argument("e5: population characteristic function unavailable");
  if (mc.samples < 2) throw std::invalid_argument("e5: MC budget too small");
  const int d = sset.d();
  const double n = sset.n(0);
  const int m = cfg.effective_m();
  const double scale = std::pow(n, -0.5 + cfg.u);
  // Total mass of exp(-C ||t||^{1/2}) over R^d.
  const double mass = unit_sphere_area(d) * 2.0 * std::tgamma(2.0 * d) / std::pow(cfg.C, 2 * d);
  const Eigen::MatrixXd& x = sset.sample(0);

  const std::int64_t nblocks = (mc.samples + mc.block_size - 1) / mc.block_size;
  std::vector<std::pair<double, double>> part(static_cast<std::size_t>(nblocks));
  parallel_for(nblocks, mc.jobs, [&](std::int64_t b) {
    StreamRng rng(mc.seed, static_cast<std::uint64_t>(b));
    double s = 0.0, ss = 0.0;
    Eigen::VectorXd dir(d);
    for (std::int64_t i = b * mc.block_size; i < std::min(mc.samples, (b + 1) * mc.block_size); ++i) {
      double g = 0.0;
      for (int k = 0; k < 2 * d; ++k) g -= std::log1p(-rng.uniform());
      const double r = (g / cfg.C) * (g / cfg.C);
      if (d == 1) {
        dir(0) = (rng() >> 63) ? 1.0 : -1.0;
      } else {
        do {
          for (int k = 0; k < d; ++k) dir(k) = rng.normal();
        } while (dir.norm() == 0.0);
        dir.normalize();
      }
      const Eigen::VectorXd tau = scale * r * dir;
      const double v = std::pow(std::abs(empirical_cf(x, tau) - cf(tau)), m);
      s += v;
      ss += v * v;
    }
    part[static_cast<std::size_t>(b)] = {s, ss};
  });
  double s = 0.0, ss = 0.0;
  for (const auto& [a, c] : part) {
    s += a;
    ss += c;
  }
  const double N = static_cast<double>(mc.samples);
  const double mean = s / N;
  E5Result out;
  out.value = {mass * mean, mass * std::sqrt(std::max(0.0, ss / N - mean * mean) / N)};
  out.threshold = e5_threshold(n, cfg);
  out.holds = out.value.value <= out.threshold;
  return out;
}

double e5_integral_quadrature(const SampleSet& sset, const CharacteristicFn& cf, const EventConfig& cfg,
                              int radial_nodes, int angles) {
  if (sset.k() != 1) throw std::invalid_argument("e5: single sample expected");
  const int d = sset.d();
  if (d > 2) throw std::invalid_argument("e5 quadrature: only d <= 2");
  const double n = sset.n(0);
  const int m = cfg.effective_m();
  const double scale = std::pow(n, -0.5 + cfg.u);
  const Eigen::MatrixXd& x = sset.sample(0);
  const auto gl = gauss_laguerre(radial_nodes);
  auto integrand = [&](const Eigen::VectorXd& t) {
    const Eigen::VectorXd tau = scale * t;
    return std::pow(std::abs(empirical_cf(x, tau) - cf(tau)), m);
  };
  double sum = 0.0;
  Eigen::VectorXd t(d);
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double s = gl.nodes[i];
    const double r = (s / cfg.C) * (s / cfg.C);
    if (d == 1) {
      // |Delta(-t)| = |Delta(t)| for characteristic functions of real laws.
      t(0) = r;
      sum += gl.weights[i] * 2.0 * integrand(t) * 2.0 * s / (cfg.C * cfg.C);
    } else {
      double ring = 0.0;
      for (int a = 0; a < angles; ++a) {
        const double th = 2.0 * std::numbers::pi * a / angles;
        t << r * std::cos(th), r * std::sin(th);
        ring += integrand(t);
      }
      ring *= 2.0 * std::numbers::pi / angles;
      sum += gl.weights[i] * ring * 2.0 * s * s * s / std::pow(cfg.C, 4);
    }
  }
  return sum;
}

double cramer_probe(const Population& pop, double t_min, double t_max, int points) {
  if (!(t_max > t_min) || t_min < 0.0 || points < 2) throw std::invalid_argument("cramer_probe: bad range");
  const int d = pop.dim;
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < d; ++i) dirs.push_back(Eigen::VectorXd::Unit(d, i));
  if (d > 1) dirs.push_back(Eigen::VectorXd::Ones(d) / std::sqrt(static_cast<double>(d)));
  double sup = 0.0;
  for (const auto& dir : dirs)
    for (int k = 0; k < points; ++k) {
      const double r = t_min + (t_max - t_min) * k / (points - 1);
      sup = std::max(sup, std::abs(pop.cf(r * dir)));
    }
  return sup;
}

Estimate event_failure_probability(const Population& pop, int n, const SampleEvent& holds,
                                   const FailureOptions& options) {
  if (options.reps < 2) throw std::invalid_argument("event_failure_probability: need at least 2 replicates");
  std::vector<double> scales{1.0};
  for (double s : options.scales) {
    if (!(s > 0.0)) throw std::invalid_argument("event_failure_probability: scales must be positive");
    if (s != 1.0) scales.push_back(s);
  }
  if (!pop.has_density()) scales = {1.0};
  const auto M = static_cast<std::int64_t>(scales.size());
  std::vector<double> contrib(static_cast<std::size_t>(options.reps), 0.0);
  constexpr std::int64_t chunk = 64;
  const std::int64_t nchunks = (options.reps + chunk - 1) / chunk;
  parallel_for(nchunks, options.jobs, [&](std::int64_t c) {
    std::vector<double> logf(scales.size());
    for (std::int64_t r = c * chunk; r < std::min(options.reps, (c + 1) * chunk); ++r) {
      StreamRng rng(options.seed, static_cast<std::uint64_t>(r));
      const double s = scales[static_cast<std::size_t>(r % M)];
      Eigen::MatrixXd x = pop.sample(n, rng);
      if (s != 1.0) x = ((x.rowwise() - pop.mean.transpose()) * s).rowwise() + pop.mean.transpose();
      double w = 1.0;
      if (M > 1) {
        for (std::size_t k = 0; k < scales.size(); ++k) {
          double lf = -n * pop.dim * std::log(scales[k]);
          for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd y = pop.mean + (x.row(i).transpose() - pop.mean) / scales[k];
            lf += pop.log_density(y);
          }
          logf[k] = lf;
        }
        const double top = *std::max_element(logf.begin(), logf.end());
        double acc = 0.0;
        for (double lf : logf) acc += std::exp(lf - top);
        const double log_mix = top + std::log(acc / static_cast<double>(M));
        w = std::isinf(logf[0]) ? 0.0 : std::exp(logf[0] - log_mix);
      }
      const SampleSet sset({std::move(x)}, pop.name);
      contrib[static_cast<std::size_t>(r)] = holds(sset) ? 0.0 : w;
    }
  });
  double s = 0.0, ss = 0.0;
  for (double v : contrib) {
    s += v;
    ss += v * v;
  }
  const double N = static_cast<double>(options.reps);
  const double mean = s / N;
  return {mean, std::sqrt(std::max(0.0, ss / N - mean * mean) / (N - 1.0))};
}

RateFit rate_fit(std::vector<RatePoint> points, double zero_floor) {
  if (points.size() < 3) throw std::invalid_argument("rate_fit: need at least 3 grid points");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].n <= points[i - 1].n) throw std::invalid_argument("rate_fit: n grid must be strictly increasing");
  RateFit fit;
  std::vector<double> xs, ys, ses;
  for (auto& p : points) {
    if (p.estimate.value <= 0.0) {
      if (zero_floor <= 0.0) continue;
      p.estimate = {zero_floor, zero_floor};
      p.floored = true;
    }
    xs.push_back(std::log(static_cast<double>(p.n)));
    ys.push_back(std::log(p.estimate.value));
    ses.push_back(p.estimate.se / p.estimate.value);
  }
  fit.points = std::move(points);
  if (xs.size() < 2) throw std::runtime_error("rate_fit: decay below MC resolution");
  const bool weighted = std::all_of(ses.begin(), ses.end(), [](double s) { return s > 0.0; });
  fit.weighted = weighted;
  std::vector<double> w(xs.size(), 1.0);
  if (weighted)
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / (ses[i] * ses[i]);
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += w[i];
    sx += w[i] * xs[i];
    sy += w[i] * ys[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += w[i] * (xs[i] - mx) * (xs[i] - mx);
    sxy += w[i] * (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (weighted) {
    fit.slope_se = 1.0 / std::sqrt(sxx);
  } else if (xs.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - fit.intercept - fit.slope * xs[i];
      rss += r * r;
    }
    fit.slope_se = std::sqrt(rss / static_cast<double>(xs.size() - 2) / sxx);
  }
  fit.ci_low = fit.slope - 1.96 * fit.slope_se;
  fit.ci_high = fit.slope + 1.96 * fit.slope_se;
  return fit;
}

RateFit rate_fit(const std::function<Estimate(int)>& estimator, const std::vector<int>& n_grid, double zero_floor) {
  std::vector<RatePoint> pts;
  for (int n : n_grid) pts.push_back({n, estimator(n), false});
  return rate_fit(std::move(pts), zero_floor);
}

void write_rate_csv(std::ostream& out, const RateFit& fit) {
  out << "n,estimate,se\n" << std::setprecision(10);
  for (const auto& p : fit.points) out << p.n << ',' << p.estimate.value << ',' << p.estimate.se << '\n';
  out << "slope," << fit.slope << ',' << fit.slope_se << '\n';
}

}  // namespace edgeboot
