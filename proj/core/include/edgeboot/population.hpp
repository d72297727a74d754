#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "edgeboot/parallel.hpp"
#include "edgeboot/tensors.hpp"

namespace edgeboot {

/// Simulation population on R^d with independent identically distributed coordinates.
struct Population {
  std::string name;
  int dim = 1;
  double param = 0.0;  ///< chi-square degrees of freedom; unused elsewhere
  bool cramer = true;  ///< satisfies Cramer's condition
  Eigen::VectorXd mean;

  std::function<double(StreamRng&)> draw_coordinate;
  /// Characteristic function of one centered coordinate.
  std::function<std::complex<double>(double)> coordinate_cf;
  /// Log density of one coordinate; empty for lattice laws.
  std::function<double(double)> coordinate_log_density;
  /// Cumulants of one coordinate, orders 1..4 (uncentered first cumulant).
  std::vector<double> coordinate_cumulants;

  Eigen::VectorXd draw(StreamRng& rng) const;
  Eigen::MatrixXd sample(int n, StreamRng& rng) const;
  /// E exp(i t^T (X - mu)).
  std::complex<double> cf(const Eigen::VectorXd& t) const;
  bool has_density() const { return static_cast<bool>(coordinate_log_density); }
  /// Sum of coordinate log densities.
  double log_density(const Eigen::VectorXd& x) const;
  /// Exact cumulants of X, orders 1..max_order <= 4.
  CumulantSet cumulants(int max_order) const;
};

std::vector<std::string> population_names();

/// normal (N(0, I)), exp (Exp(1) - 1), chisq ((chi2_df - df) / sqrt(2 df), df = param, default 3),
/// lattice (+-1 with equal probability; violates Cramer's condition).
Population make_population(const std::string& name, int dim = 1, std::optional<double> param = std::nullopt);

/// Monte Carlo estimate of E ||X - mu||^r.
Estimate absolute_moment(const Population& pop, double r, const MCConfig& mc);

}  // namespace edgeboot
