#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "edgeboot/parallel.hpp"
#include "edgeboot/polynomial.hpp"

namespace edgeboot {

/// A member of the region class: a closed Euclidean ball in R^q (radius may be
/// +inf, meaning all of R^q), or for q = 1 a half-line (-inf, t].
class Ball {
 public:
  static Ball sphere(Eigen::VectorXd center, double radius);
  static Ball whole_space(int q);
  static Ball half_line(double threshold);
  /// Closed interval [lo, hi] in R^1, stored as a ball.
  static Ball interval(double lo, double hi);

  int dim() const { return static_cast<int>(center_.size()); }
  const Eigen::VectorXd& center() const { return center_; }
  double radius() const { return radius_; }
  bool is_half_line() const { return halfline_threshold_.has_value(); }
  double threshold() const { return *halfline_threshold_; }
  bool is_whole_space() const { return !is_half_line() && radius_ == kInfinity; }

  /// y + B.
  Ball translated(const Eigen::VectorXd& y) const;

  std::string describe() const;

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

 private:
  Ball() = default;
  Eigen::VectorXd center_;
  double radius_ = kInfinity;
  std::optional<double> halfline_threshold_;
};

bool contains(const Ball& b, const Eigen::VectorXd& x);
/// Euclidean distance from x to the boundary of b (infinite for R^q).
double boundary_distance(const Ball& b, const Eigen::VectorXd& x);
/// x lies in the open eps-neighborhood of the boundary of b.
bool in_boundary_neighborhood(const Ball& b, const Eigen::VectorXd& x, double eps);

/// Mass of the eps-neighborhood of the boundary under N(0, V), by Monte Carlo.
Estimate gaussian_boundary_mass(const Ball& b, const Eigen::MatrixXd& V, double eps,
                                const MCConfig& mc);

struct Lemma1Result {
  int index = -1;  ///< argmax_j lambda_min(W_j), 0-based
  double lambda_min = 0.0;
  std::vector<double> lambda_mins;  ///< lambda_min(W_j) for every j
};

/// Given d vectors v_j in R^q (columns of `vs`, d > q) with W0 = sum v v^T
/// positive definite, returns the j maximizing lambda_min(W0 - v_j v_j^T).
Lemma1Result lemma1_select(const Eigen::MatrixXd& vs);

/// q graded polynomials in d variables: component a at sample size n is
/// sum_s n^{-s/2} parts[a][s], where parts[a][s] is homogeneous of degree s+1.
class PolynomialMap {
 public:
  PolynomialMap(std::vector<std::vector<MultiPolynomial>> parts);

  int q() const { return static_cast<int>(parts_.size()); }
  int d() const { return d_; }
  int grades() const { return grades_; }
  const std::vector<std::vector<MultiPolynomial>>& parts() const { return parts_; }

  /// Largest |coefficient| over all components and grades.
  double b1() const { return b1_; }
  /// Gram matrix of the linear coefficients.
  const Eigen::MatrixXd& W() const { return W_; }
  /// Smallest b2 with b2^{-1} <= lambda_min(W) and lambda_max(W) <= b2.
  double b2() const { return b2_; }
  double b() const { return std::max(b1_, b2_); }

  /// Linear coefficients c_{a i} as a q x d matrix.
  Eigen::MatrixXd linear_coefficients() const;

  Eigen::VectorXd evaluate(const Eigen::VectorXd& z, double n) const;

 private:
  int d_ = 0;
  int grades_ = 0;
  std::vector<std::vector<MultiPolynomial>> parts_;
  double b1_ = 0.0;
  double b2_ = 0.0;
  Eigen::MatrixXd W_;
};

struct Prop1Result {
  std::vector<Estimate> per_region;
  Estimate sup;          ///< region with the largest estimate
  int sup_index = -1;
  double eps = 0.0;      ///< n^{-beta}
  double radius = 0.0;   ///< b log n
};

/// P{ |Z| <= b log n and pmap(Z) in the n^{-beta} neighborhood of the boundary
/// of B } for Z ~ N(0, I_d), estimated with common random numbers across `regions`.
Prop1Result prop1_probability(const PolynomialMap& pmap, const std::vector<Ball>& regions,
                              double beta, double b, double n, const MCConfig& mc);

}  // namespace edgeboot
