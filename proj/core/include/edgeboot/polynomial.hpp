#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace edgeboot {

/// Exponents of one monomial; entry i is the power of variable i.
using ExponentVector = std::vector<int>;

int total_degree(const ExponentVector& alpha);

/// Sparse polynomial in a fixed number of real variables.
///
/// Coefficients are stored per exponent vector. Exact zeros produced by
/// arithmetic are pruned; near-zero values are kept (use prune_below()).
class MultiPolynomial {
 public:
  using TermMap = std::map<ExponentVector, double>;

  MultiPolynomial() = default;
  explicit MultiPolynomial(int nvars);

  static MultiPolynomial constant(int nvars, double value);
  /// The single variable x_i.
  static MultiPolynomial variable(int nvars, int i);
  static MultiPolynomial monomial(const ExponentVector& alpha, double coefficient);
  /// sum_j coefficients[j] * x_j
  static MultiPolynomial linear(std::span<const double> coefficients);

  int nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Max total degree over stored terms; 0 for the empty polynomial.
  int degree() const;
  /// Lowest total degree over stored terms; 0 for the empty polynomial.
  int min_degree() const;
  double coefficient(const ExponentVector& alpha) const;
  double max_abs_coefficient() const;

  void add_term(const ExponentVector& alpha, double coefficient);

  MultiPolynomial& operator+=(const MultiPolynomial& other);
  MultiPolynomial& operator-=(const MultiPolynomial& other);
  MultiPolynomial& operator*=(double factor);

  friend MultiPolynomial operator+(MultiPolynomial a, const MultiPolynomial& b) { return a += b; }
  friend MultiPolynomial operator-(MultiPolynomial a, const MultiPolynomial& b) { return a -= b; }
  friend MultiPolynomial operator*(MultiPolynomial a, double s) { return a *= s; }
  friend MultiPolynomial operator*(double s, MultiPolynomial a) { return a *= s; }
  friend MultiPolynomial operator*(const MultiPolynomial& a, const MultiPolynomial& b);

  friend bool operator==(const MultiPolynomial& a, const MultiPolynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  /// Product with all terms of total degree > max_degree discarded.
  MultiPolynomial multiply_truncated(const MultiPolynomial& other, int max_degree) const;
  MultiPolynomial truncated(int max_degree) const;
  /// Terms of exactly the given total degree.
  MultiPolynomial homogeneous_part(int degree) const;

  /// Partial derivative with respect to variable i.
  MultiPolynomial derivative(int i) const;

  /// p(M x + c). M has shape nvars x nvars.
  MultiPolynomial compose_affine(const Eigen::MatrixXd& M, const Eigen::VectorXd& c) const;

  double evaluate(std::span<const double> x) const;
  double evaluate(const Eigen::VectorXd& x) const;

  /// Copy with |coefficient| <= tol removed.
  MultiPolynomial prune_below(double tol) const;

  /// p(-x) == sign * p(x) holds term by term.
  bool has_parity(int sign) const;

  std::string to_string() const;

 private:
  void check_same_nvars(const MultiPolynomial& other) const;

  int nvars_ = 0;
  TermMap terms_;
};

MultiPolynomial add(const MultiPolynomial& a, const MultiPolynomial& b);
MultiPolynomial multiply(const MultiPolynomial& a, const MultiPolynomial& b);
MultiPolynomial scale(const MultiPolynomial& p, double factor);
MultiPolynomial compose_affine(const MultiPolynomial& p, const Eigen::MatrixXd& M,
                               const Eigen::VectorXd& c);
double poly_eval(const MultiPolynomial& p, std::span<const double> x);

}  // namespace edgeboot
