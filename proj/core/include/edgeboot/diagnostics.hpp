#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "edgeboot/bootstrap.hpp"
#include "edgeboot/parallel.hpp"
#include "edgeboot/population.hpp"
#include "edgeboot/smooth_model.hpp"

namespace edgeboot {

enum class E2Exponent {
  display,  ///< max(2 nu + 3, d + 1)
  lemma,    ///< max(2 nu + 1, d + 1)
};

struct EventConfig {
  double C1 = 10.0;
  double C2 = 0.0;  ///< <= 0 means "10 x population absolute moment", see resolve_event_config
  double C3 = 4.0;
  double u = 0.1;
  double C = 1.0;
  int m = 0;  ///< <= 0 means the smallest integer allowed
  int nu = 1;
  double lambda = 1.0;
  int d = 1;
  E2Exponent e2_exponent = E2Exponent::display;

  int e2_r() const;
  /// Smallest integer m with m > 2d(u+1) + nu + 3 + lambda.
  int minimal_m() const;
  int effective_m() const { return m > 0 ? m : minimal_m(); }
  /// Throws std::invalid_argument on C3 <= 1, nonpositive constants or too small m.
  void validate() const;
};

/// Fills C2 from a Monte Carlo estimate of E||X - mu||^r when unset, then validates.
EventConfig resolve_event_config(EventConfig cfg, const Population& pop, const MCConfig& mc);

/// xi_nu of the expansion built from the sample's resampling cumulants.
double sample_xi(const SampleSet& sset, const SmoothStatistic& stat, int nu);

/// xi_nu <= C1 and ||Xbar - mu|| <= 1 / C1.
bool e1_indicator(const SampleSet& sset, const SmoothStatistic& stat, const Eigen::VectorXd& mu,
                  const EventConfig& cfg);

/// E(||X* - Xbar||^r | X) as the exact atom average.
double e2_conditional_moment(const SampleSet& sset, double r);
bool e2_indicator(const SampleSet& sset, const EventConfig& cfg, double r);
bool e2_indicator(const SampleSet& sset, const EventConfig& cfg);

/// (lambda_max(Vhat) <= C3, lambda_max(Vdagger) <= 2).
std::pair<bool, bool> e3_e4_indicator(const SampleSet& sset, const EventConfig& cfg,
                                      const TruncationOptions& truncation = {});

using CharacteristicFn = std::function<std::complex<double>(const Eigen::VectorXd&)>;

/// (1/n) sum_i exp(i t^T (X_i - Xbar)).
std::complex<double> empirical_cf(const Eigen::MatrixXd& sample, const Eigen::VectorXd& t);

struct E5Result {
  Estimate value;
  double threshold = 0.0;  ///< n^{-d(u+1) - (nu+3)/2}
  bool holds = false;
};

/// Importance sampling with density proportional to exp(-C ||t||^{1/2}); the radius
/// is drawn exactly (C ||t||^{1/2} ~ Gamma(2d)).
E5Result e5_integral(const SampleSet& sset, const CharacteristicFn& cf, const EventConfig& cfg, const MCConfig& mc);

/// Deterministic cross-check for d <= 2: Gauss-Laguerre in s = C ||t||^{1/2},
/// trapezoid in angle for d = 2.
double e5_integral_quadrature(const SampleSet& sset, const CharacteristicFn& cf, const EventConfig& cfg,
                              int radial_nodes = 64, int angles = 64);

/// sup of |cf(t)| over ||t|| in [t_min, t_max] along coordinate axes and diagonals.
double cramer_probe(const Population& pop, double t_min, double t_max, int points = 2000);

/// Returns true when the event holds for the sample.
using SampleEvent = std::function<bool(const SampleSet&)>;

struct FailureOptions {
  std::int64_t reps = 2000;
  std::uint64_t seed = 1;
  int jobs = 1;
  /// Population scale factors of the defensive proposal mixture (1 is always included).
  std::vector<double> scales;
};

/// 1 - P(event) for samples of size n, by a deterministic mixture of scaled
/// populations X = mu + s (X0 - mu) with balance-heuristic weights. Falls back
/// to plain Monte Carlo when the population has no density or scales = {1}.
Estimate event_failure_probability(const Population& pop, int n, const SampleEvent& holds,
                                   const FailureOptions& options);

struct RatePoint {
  int n = 0;
  Estimate estimate;
  bool floored = false;
};

struct RateFit {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool weighted = true;
};

/// Weighted least squares of log(estimate) on log(n) with weights estimate^2 / se^2
/// (ordinary least squares when some se is zero). Nonpositive estimates are raised to
/// `zero_floor` when it is positive and dropped otherwise. Throws std::runtime_error
/// ("decay below MC resolution") when fewer than two usable points remain.
RateFit rate_fit(std::vector<RatePoint> points, double zero_floor = 0.0);
RateFit rate_fit(const std::function<Estimate(int)>& estimator, const std::vector<int>& n_grid,
                 double zero_floor = 0.0);

/// Columns n,estimate,se followed by a summary row "slope,<slope>,<slope_se>".
void write_rate_csv(std::ostream& out, const RateFit& fit);

}  // namespace edgeboot
