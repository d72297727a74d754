#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "edgeboot/edgeworth.hpp"
#include "edgeboot/polynomial.hpp"
#include "edgeboot/regions.hpp"
#include "edgeboot/tensors.hpp"

namespace edgeboot {

/// A statistic g(x_1..x_k; a_1..a_k) in R^q of k mean vectors in R^d, evaluated
/// at anchors a (population means for A, sample means for A-hat). Vectors are
/// flattened sample-major: entry j*d + i is component i of sample j.
struct SmoothStatistic {
  using ValueFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& anchors)>;
  /// d^|idx| g_component / dx_idx at x = anchors; idx are flattened variable indices.
  using DerivativeFn =
      std::function<double(int component, const std::vector<int>& idx, const Eigen::VectorXd& anchors)>;
  /// Taylor polynomials of g about x = anchors in the deviation x - anchors,
  /// all terms of total degree <= order (constant term included).
  using TaylorFn = std::function<std::vector<MultiPolynomial>(const Eigen::VectorXd& anchors, int order)>;
  /// Maps a raw observation to the vector whose mean the statistic consumes
  /// (e.g. X -> (X, X^2)). Empty means identity.
  using LiftFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& raw)>;

  std::string name;
  int k = 1;
  int d = 1;
  int q = 1;
  int raw_dim = 1;
  bool centered = true;  ///< value(a; a) == 0
  ValueFn value;
  DerivativeFn derivative;  ///< optional
  TaylorFn taylor;          ///< optional; preferred over derivative when present
  LiftFn lift;              ///< optional

  int kd() const { return k * d; }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& anchors) const;
  Eigen::VectorXd lift_observation(const Eigen::VectorXd& raw) const;
};

/// Partial derivative of one component at the anchors: analytic callback, then
/// Taylor coefficients, then central differences with one Richardson step.
/// The difference path loses accuracy quickly beyond third order.
double statistic_derivative(const SmoothStatistic& stat, int component, const std::vector<int>& idx,
                            const Eigen::VectorXd& anchors);

/// Central-difference mixed partial with one Richardson extrapolation.
double finite_difference_derivative(const SmoothStatistic& stat, int component,
                                    const std::vector<int>& idx, const Eigen::VectorXd& anchors);

/// Taylor polynomials to total degree `order` in the deviation variables.
std::vector<MultiPolynomial> taylor_polynomials(const SmoothStatistic& stat,
                                                const Eigen::VectorXd& anchors, int order);

struct RemainderBound {
  double c_star = 0.0;  ///< filled by estimate_remainder_constant
  double exponent = 0.0;  ///< (nu + 2) / 2
  int log_power = 0;      ///< nu + 3
  bool estimated = false;
};

/// The polynomial part of n^{1/2} g(a + n^{-1/2} x; a): component c at grade s
/// (s = 0..nu+1) is n^{-s/2} times the degree-(s+1) Taylor term. `offset` is
/// n^{1/2} g(a; a), nonzero only for statistics not in centered form.
struct StatisticExpansion {
  int q = 0;
  int nvars = 0;
  int nu = 0;
  double n = 0.0;
  std::vector<std::vector<MultiPolynomial>> grades;  ///< [component][s], unscaled Taylor terms
  Eigen::VectorXd offset;
  RemainderBound remainder;

  /// Scaled grade: n^{-s/2} * grades[c][s].
  MultiPolynomial graded_part(int component, int s) const;
  /// Sum over grades for one component, scaled at sample size n.
  MultiPolynomial component(int c) const;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
  /// Scaled grades as a PolynomialMap (regions module).
  PolynomialMap polynomial_map() const;
};

StatisticExpansion taylor_expand(const SmoothStatistic& stat, const Eigen::VectorXd& anchors, double n,
                                 int nu);

/// n^{1/2} g(a + n^{-1/2} x; a) minus offset, evaluated exactly.
Eigen::VectorXd scaled_statistic(const SmoothStatistic& stat, const Eigen::VectorXd& anchors, double n,
                                 const Eigen::VectorXd& x);

/// Largest |scaled_statistic - expansion| / (n^{-(nu+2)/2} (log n)^{nu+3}) over the
/// given points (rows, restricted to ||x|| <= log n); stores it in e.remainder.
double estimate_remainder_constant(const SmoothStatistic& stat, const Eigen::VectorXd& anchors,
                                   StatisticExpansion& e, const Eigen::MatrixXd& points);

struct ApproximateCumulants {
  GradedCumulants eta;   ///< standardized: leading covariance I_q
  GradedCumulants raw;   ///< before standardization
  Eigen::MatrixXd W;     ///< leading covariance of the polynomial statistic
  Eigen::MatrixXd T;     ///< W^{-1/2}
  int nu = 0;
  double n = 0.0;

  /// Edgeworth expansion against N(0, I_q) in the standardized scale.
  EdgeworthExpansion expansion() const;
};

struct BalanceOptions {
  double max_ratio = 100.0;
};

/// Approximate cumulants of n^{1/2} g(a + n^{-1/2} x; a) where x_j = n^{1/2}(Xbar*_j - Xbar_j)
/// and sample j has resampling cumulants sample_cumulants[j] (orders >= nu + 2).
ApproximateCumulants approximate_cumulants(const SmoothStatistic& stat, const Eigen::VectorXd& anchors,
                                           const std::vector<CumulantSet>& sample_cumulants,
                                           const std::vector<int>& n_js, int nu,
                                           const BalanceOptions& balance = {});

/// x in R(B): n^{1/2} g(a + n^{-1/2} x; a) in B. Non-centered statistics keep their offset.
bool region_membership(const SmoothStatistic& stat, const Eigen::VectorXd& anchors, const Ball& b,
                       double n, const Eigen::VectorXd& x);

/// x in R-dagger(B): y_j = Vhat_j^{1/2} (x_j + n^{1/2} Ymean_j) lies in R(B).
bool region_dagger_membership(const SmoothStatistic& stat, const Eigen::VectorXd& anchors, const Ball& b,
                              double n, const Eigen::VectorXd& x,
                              const std::vector<Eigen::MatrixXd>& vhat_blocks,
                              const std::vector<Eigen::VectorXd>& y_means);

/// Forward map of R-dagger: x_j = Vhat_j^{-1/2} y_j - n^{1/2} Ymean_j.
Eigen::VectorXd dagger_transform(const Eigen::VectorXd& y, double n,
                                 const std::vector<Eigen::MatrixXd>& vhat_blocks,
                                 const std::vector<Eigen::VectorXd>& y_means);

// Statistic catalog.

/// Names accepted by make_statistic.
std::vector<std::string> statistic_names();

/// Builds a catalog statistic. `dim` is the raw observation dimension where
/// the statistic allows a choice (mean, mean_difference, studentized_mean).
///   mean              k=1, q=d, g = x - a
///   mean_difference   k=2, q=d, g = (x1 - x2) - (a1 - a2)
///   studentized_mean  k=1, raw dim p, lifted to (X, X*X), q=p,
///                     g_c = (x_c - a_c) / sqrt(s_c(x)), s_c = x2_c - x_c^2
///   variance          k=1, raw dim 1, lifted to (X, X^2), q=1,
///                     g = (x2 - x1^2) - (a2 - a1^2)
///   square            k=1, d=q=1, g = x^2 (not centered)
///   exp               k=1, d=q=1, g = exp(x - a) - 1
SmoothStatistic make_statistic(const std::string& name, int dim = 1);

}  // namespace edgeboot
