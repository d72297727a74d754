#include "edgeboot/polynomial.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace edgeboot {

int total_degree(const ExponentVector& alpha) {
  return std::accumulate(alpha.begin(), alpha.end(), 0);
}

MultiPolynomial::MultiPolynomial(int nvars) : nvars_(nvars) {
  if (nvars < 1) throw std::invalid_argument("MultiPolynomial: nvars must be positive");
}

MultiPolynomial MultiPolynomial::constant(int nvars, double value) {
  MultiPolynomial p(nvars);
  p.add_term(ExponentVector(nvars, 0), value);
  return p;
}

MultiPolynomial MultiPolynomial::variable(int nvars, int i) {
  if (i < 0 || i >= nvars) throw std::out_of_range("MultiPolynomial::variable: index out of range");
  MultiPolynomial p(nvars);
  ExponentVector alpha(nvars, 0);
  alpha[i] = 1;
  p.add_term(alpha, 1.0);
  return p;
}

MultiPolynomial MultiPolynomial::monomial(const ExponentVector& alpha, double coefficient) {
  MultiPolynomial p(static_cast<int>(alpha.size()));
  p.add_term(alpha, coefficient);
  return p;
}

MultiPolynomial MultiPolynomial::linear(std::span<const double> coefficients) {
  const int n = static_cast<int>(coefficients.size());
  MultiPolynomial p(n);
  for (int i = 0; i < n; ++i) {
    ExponentVector alpha(n, 0);
    alpha[i] = 1;
    p.add_term(alpha, coefficients[i]);
  }
  return p;
}

int MultiPolynomial::degree() const {
  int d = 0;
  for (const auto& [alpha, c] : terms_) d = std::max(d, total_degree(alpha));
  return d;
}

int MultiPolynomial::min_degree() const {
  if (terms_.empty()) return 0;
  int d = total_degree(terms_.begin()->first);
  for (const auto& [alpha, c] : terms_) d = std::min(d, total_degree(alpha));
  return d;
}

double MultiPolynomial::coefficient(const ExponentVector& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

double MultiPolynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [alpha, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

void MultiPolynomial::add_term(const ExponentVector& alpha, double coefficient) {
  if (static_cast<int>(alpha.size()) != nvars_)
    throw std::invalid_argument("MultiPolynomial: exponent vector length mismatch");
  if (coefficient == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(alpha, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void MultiPolynomial::check_same_nvars(const MultiPolynomial& other) const {
  if (nvars_ != other.nvars_) throw std::invalid_argument("MultiPolynomial: nvars mismatch");
}

MultiPolynomial& MultiPolynomial::operator+=(const MultiPolynomial& other) {
  check_same_nvars(other);
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, c);
  return *this;
}

MultiPolynomial& MultiPolynomial::operator-=(const MultiPolynomial& other) {
  check_same_nvars(other);
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, -c);
  return *this;
}

MultiPolynomial& MultiPolynomial::operator*=(double factor) {
  if (factor == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= factor;
    if (it->second == 0.0)
      it = terms_.erase(it);
    else
      ++it;
  }
  return *this;
}

MultiPolynomial MultiPolynomial::multiply_truncated(const MultiPolynomial& other,
                                                    int max_degree) const {
  check_same_nvars(other);
  MultiPolynomial out(nvars_);
  ExponentVector gamma(nvars_);
  for (const auto& [a, ca] : terms_) {
    const int da = total_degree(a);
    for (const auto& [b, cb] : other.terms_) {
      if (da + total_degree(b) > max_degree) continue;
      for (int i = 0; i < nvars_; ++i) gamma[i] = a[i] + b[i];
      out.add_term(gamma, ca * cb);
    }
  }
  return out;
}

MultiPolynomial operator*(const MultiPolynomial& a, const MultiPolynomial& b) {
  return a.multiply_truncated(b, std::numeric_limits<int>::max());
}

MultiPolynomial MultiPolynomial::truncated(int max_degree) const {
  MultiPolynomial out(nvars_);
  for (const auto& [alpha, c] : terms_)
    if (total_degree(alpha) <= max_degree) out.terms_.emplace(alpha, c);
  return out;
}

MultiPolynomial MultiPolynomial::homogeneous_part(int degree) const {
  MultiPolynomial out(nvars_);
  for (const auto& [alpha, c] : terms_)
    if (total_degree(alpha) == degree) out.terms_.emplace(alpha, c);
  return out;
}

MultiPolynomial MultiPolynomial::derivative(int i) const {
  if (i < 0 || i >= nvars_) throw std::out_of_range("MultiPolynomial::derivative: bad variable");
  MultiPolynomial out(nvars_);
  for (const auto& [alpha, c] : terms_) {
    if (alpha[i] == 0) continue;
    ExponentVector beta = alpha;
    beta[i] -= 1;
    out.add_term(beta, c * alpha[i]);
  }
  return out;
}

MultiPolynomial MultiPolynomial::compose_affine(const Eigen::MatrixXd& M,
                                                const Eigen::VectorXd& c) const {
  if (M.rows() != nvars_ || M.cols() != nvars_ || c.size() != nvars_)
    throw std::invalid_argument("compose_affine: nvars mismatch");
  // y_i = sum_j M_ij x_j + c_i
  std::vector<MultiPolynomial> y;
  y.reserve(nvars_);
  for (int i = 0; i < nvars_; ++i) {
    MultiPolynomial yi = MultiPolynomial::constant(nvars_, c(i));
    for (int j = 0; j < nvars_; ++j) yi += MultiPolynomial::variable(nvars_, j) * M(i, j);
    y.push_back(std::move(yi));
  }
  // Powers of each y_i are reused across terms.
  std::vector<std::vector<MultiPolynomial>> powers(nvars_);
  for (int i = 0; i < nvars_; ++i) powers[i].push_back(MultiPolynomial::constant(nvars_, 1.0));

  MultiPolynomial out(nvars_);
  for (const auto& [alpha, coef] : terms_) {
    MultiPolynomial term = MultiPolynomial::constant(nvars_, coef);
    for (int i = 0; i < nvars_; ++i) {
      while (static_cast<int>(powers[i].size()) <= alpha[i])
        powers[i].push_back(powers[i].back() * y[i]);
      if (alpha[i] > 0) term = term * powers[i][alpha[i]];
    }
    out += term;
  }
  return out;
}

double MultiPolynomial::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != nvars_)
    throw std::invalid_argument("MultiPolynomial::evaluate: dimension mismatch");
  double sum = 0.0;
  for (const auto& [alpha, c] : terms_) {
    double v = c;
    for (int i = 0; i < nvars_; ++i)
      for (int e = 0; e < alpha[i]; ++e) v *= x[i];
    sum += v;
  }
  return sum;
}

double MultiPolynomial::evaluate(const Eigen::VectorXd& x) const {
  return evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

MultiPolynomial MultiPolynomial::prune_below(double tol) const {
  MultiPolynomial out(nvars_);
  for (const auto& [alpha, c] : terms_)
    if (std::abs(c) > tol) out.terms_.emplace(alpha, c);
  return out;
}

bool MultiPolynomial::has_parity(int sign) const {
  for (const auto& [alpha, c] : terms_) {
    const bool odd = total_degree(alpha) % 2 != 0;
    if (sign > 0 && odd) return false;
    if (sign < 0 && !odd) return false;
  }
  return true;
}

std::string MultiPolynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [alpha, c] : terms_) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    os << std::abs(c);
    for (int i = 0; i < nvars_; ++i) {
      if (alpha[i] == 0) continue;
      os << "*x" << (i + 1);
      if (alpha[i] > 1) os << "^" << alpha[i];
    }
  }
  return os.str();
}

MultiPolynomial add(const MultiPolynomial& a, const MultiPolynomial& b) { return a + b; }
MultiPolynomial multiply(const MultiPolynomial& a, const MultiPolynomial& b) { return a * b; }
MultiPolynomial scale(const MultiPolynomial& p, double factor) { return p * factor; }
MultiPolynomial compose_affine(const MultiPolynomial& p, const Eigen::MatrixXd& M,
                               const Eigen::VectorXd& c) {
  return p.compose_affine(M, c);
}
double poly_eval(const MultiPolynomial& p, std::span<const double> x) { return p.evaluate(x); }

}  // namespace edgeboot
