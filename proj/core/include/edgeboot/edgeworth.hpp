#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "edgeboot/parallel.hpp"
#include "edgeboot/polynomial.hpp"
#include "edgeboot/regions.hpp"
#include "edgeboot/tensors.hpp"

namespace edgeboot {

inline constexpr int kMaxExpansionOrder = 2;
inline constexpr int kMaxExpansionDim = 4;

/// Cumulants of a statistic written as power series in u = n^{-1/2}:
/// cumulant of order r ~ sum_g u^g * term(r, g). The leading covariance
/// (order 2, grade 0) is carried separately as V.
///
/// For a normalized sum of iid vectors the only terms are (r, r-2) = the
/// per-observation cumulant of order r; smooth functions of means add
/// (1, 1) mean and (2, 2) covariance corrections.
class GradedCumulants {
 public:
  GradedCumulants() = default;
  explicit GradedCumulants(int dim);

  /// Terms (r, r-2) = cumulants.tensor(r) for 3 <= r <= max_order.
  static GradedCumulants from_cumulants(const CumulantSet& cumulants);

  int dim() const { return dim_; }
  void set(int order, int grade, SymmetricTensor tensor);
  const SymmetricTensor* find(int order, int grade) const;
  const std::map<std::pair<int, int>, SymmetricTensor>& terms() const { return terms_; }

  /// Multilinear change of variables x -> M x applied to every term.
  GradedCumulants transformed(const Eigen::MatrixXd& M) const;

  /// The approximate cumulants at sample size n, orders 1..max_order, with
  /// leading covariance V added to order 2.
  CumulantSet at_sample_size(double n, const Eigen::MatrixXd& V, int max_order) const;

 private:
  int dim_ = 0;
  std::map<std::pair<int, int>, SymmetricTensor> terms_;
};

/// Hermite tensors H_alpha defined by (-d)^alpha phi_{0,V} = H_alpha phi_{0,V},
/// built by H_{alpha+e_i} = (V^{-1} x)_i H_alpha - d_i H_alpha and memoized.
/// Not thread-safe while being filled.
class HermiteTensorTable {
 public:
  explicit HermiteTensorTable(const Eigen::MatrixXd& V);

  int dim() const { return static_cast<int>(v_inverse_.rows()); }
  const Eigen::MatrixXd& v_inverse() const { return v_inverse_; }

  const MultiPolynomial& get(const ExponentVector& alpha);
  const std::map<ExponentVector, MultiPolynomial>& table() const { return table_; }

 private:
  Eigen::MatrixXd v_inverse_;
  std::vector<MultiPolynomial> vinv_x_;  // (V^{-1} x)_i as linear polynomials
  std::map<ExponentVector, MultiPolynomial> table_;
};

MultiPolynomial hermite_tensor(const ExponentVector& alpha, const Eigen::MatrixXd& V);

/// phi_{0,V} times sum_j n^{-j/2} Pcheck_j, with Pcheck_j stored symbolically.
class EdgeworthExpansion {
 public:
  EdgeworthExpansion(Eigen::MatrixXd V, std::vector<MultiPolynomial> terms);

  int q() const { return static_cast<int>(V_.rows()); }
  int nu() const { return static_cast<int>(terms_.size()) - 1; }
  const Eigen::MatrixXd& V() const { return V_; }
  const Eigen::MatrixXd& cholesky() const { return L_; }
  const MultiPolynomial& polynomial(int j) const;
  const std::vector<MultiPolynomial>& polynomials() const { return terms_; }

  double gaussian_density(const Eigen::VectorXd& x) const;

  /// Same V, terms 0..order.
  EdgeworthExpansion truncated(int order) const;

 private:
  Eigen::MatrixXd V_;
  Eigen::MatrixXd L_;
  Eigen::MatrixXd v_inverse_;
  double log_norm_ = 0.0;
  std::vector<MultiPolynomial> terms_;
};

/// Polynomials pi_j in the variables s = it from exp(sum_g u^g chi_g(s)),
/// chi_g(s) = sum_r term(r, g) . s^{(r)} / r!. Entry j is the u^j coefficient.
std::vector<MultiPolynomial> characteristic_polynomials(const GradedCumulants& cumulants, int nu);

/// Build Pcheck_0..Pcheck_nu. Requires V SPD, 0 <= nu <= 2, q <= 4.
EdgeworthExpansion build_expansion(const GradedCumulants& cumulants, const Eigen::MatrixXd& V,
                                   int nu);
/// Normalized-sum form: cumulants of order 3..nu+2 are per-observation cumulants;
/// orders 1 and 2 are ignored (V is the leading covariance).
EdgeworthExpansion build_expansion(const CumulantSet& cumulants, const Eigen::MatrixXd& V,
                                   int nu);

/// Pcheck_j(x) * phi_{0,V}(x).
double density_term(const EdgeworthExpansion& e, int j, const Eigen::VectorXd& x);

/// Integral of Pcheck_j phi_{0,V} over B by Monte Carlo from phi_{0,V}.
Estimate signed_measure(const EdgeworthExpansion& e, int j, const Ball& b, const MCConfig& mc);

/// Deterministic path: exact for q = 1 (truncated Gaussian moments), polar
/// Gauss-Legendre for balls in q = 2, 40-node Gauss-Hermite per axis for R^q, q <= 2.
double signed_measure_quadrature(const EdgeworthExpansion& e, int j, const Ball& b);

/// sum_{j<=order} n^{-j/2} signed measure of B, one MC pass so the SE accounts
/// for correlation between terms. order < 0 means e.nu().
Estimate expansion_probability(const EdgeworthExpansion& e, const Ball& b, double n,
                               const MCConfig& mc, int order = -1);
double expansion_probability_quadrature(const EdgeworthExpansion& e, const Ball& b, double n,
                                        int order = -1);

/// Largest |coefficient| of Pcheck_1..Pcheck_nu.
double xi_nu(const EdgeworthExpansion& e);

}  // namespace edgeboot
