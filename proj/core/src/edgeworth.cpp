#include "edgeboot/edgeworth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "edgeboot/linalg.hpp"
#include "edgeboot/quadrature.hpp"

namespace edgeboot {

GradedCumulants::GradedCumulants(int dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("GradedCumulants: dimension must be positive");
}

GradedCumulants GradedCumulants::from_cumulants(const CumulantSet& cumulants) {
  GradedCumulants g(cumulants.dim());
  for (int r = 3; r <= cumulants.max_order(); ++r) g.set(r, r - 2, cumulants.tensor(r));
  return g;
}

void GradedCumulants::set(int order, int grade, SymmetricTensor tensor) {
  if (tensor.dim() != dim_ || tensor.order() != order)
    throw std::invalid_argument("GradedCumulants::set: tensor shape mismatch");
  if (grade < 1) throw std::invalid_argument("GradedCumulants::set: grade must be >= 1");
  if (order > grade + 2)
    throw std::invalid_argument("GradedCumulants::set: order exceeds grade + 2");
  terms_[{order, grade}] = std::move(tensor);
}

const SymmetricTensor* GradedCumulants::find(int order, int grade) const {
  auto it = terms_.find({order, grade});
  return it == terms_.end() ? nullptr : &it->second;
}

GradedCumulants GradedCumulants::transformed(const Eigen::MatrixXd& M) const {
  GradedCumulants out(static_cast<int>(M.rows()));
  for (const auto& [key, t] : terms_) out.set(key.first, key.second, t.transformed(M));
  return out;
}

CumulantSet GradedCumulants::at_sample_size(double n, const Eigen::MatrixXd& V,
                                            int max_order) const {
  CumulantSet out(dim_, max_order, CumulantSet::Kind::cumulants);
  if (max_order >= 2) out.tensor(2) = SymmetricTensor::from_matrix(V);
  const double u = 1.0 / std::sqrt(n);
  for (const auto& [key, t] : terms_) {
    const auto [r, g] = key;
    if (r > max_order) continue;
    SymmetricTensor& dst = out.tensor(r);
    for (const auto& [idx, v] : t.entries()) dst.set(idx, dst.at(idx) + std::pow(u, g) * v);
  }
  return out;
}

HermiteTensorTable::HermiteTensorTable(const Eigen::MatrixXd& V) {
  require_spd(V, "HermiteTensorTable");
  v_inverse_ = V.inverse();
  v_inverse_ = 0.5 * (v_inverse_ + v_inverse_.transpose()).eval();
  const int q = static_cast<int>(V.rows());
  for (int i = 0; i < q; ++i) {
    std::vector<double> row(static_cast<std::size_t>(q));
    for (int k = 0; k < q; ++k) row[static_cast<std::size_t>(k)] = v_inverse_(i, k);
    vinv_x_.push_back(MultiPolynomial::linear(row));
  }
  table_.emplace(ExponentVector(static_cast<std::size_t>(q), 0), MultiPolynomial::constant(q, 1.0));
}

const MultiPolynomial& HermiteTensorTable::get(const ExponentVector& alpha) {
  if (static_cast<int>(alpha.size()) != dim())
    throw std::invalid_argument("HermiteTensorTable::get: wrong exponent length");
  if (auto it = table_.find(alpha); it != table_.end()) return it->second;
  const auto pos = std::find_if(alpha.begin(), alpha.end(), [](int a) { return a > 0; });
  if (pos == alpha.end() || std::any_of(alpha.begin(), alpha.end(), [](int a) { return a < 0; }))
    throw std::invalid_argument("HermiteTensorTable::get: invalid exponent vector");
  const auto i = static_cast<std::size_t>(pos - alpha.begin());
  ExponentVector beta = alpha;
  beta[i] -= 1;
  const MultiPolynomial& prev = get(beta);
  MultiPolynomial h = vinv_x_[i] * prev - prev.derivative(static_cast<int>(i));
  return table_.emplace(alpha, std::move(h)).first->second;
}

MultiPolynomial hermite_tensor(const ExponentVector& alpha, const Eigen::MatrixXd& V) {
  HermiteTensorTable table(V);
  return table.get(alpha);
}

EdgeworthExpansion::EdgeworthExpansion(Eigen::MatrixXd V, std::vector<MultiPolynomial> terms)
    : V_(std::move(V)), terms_(std::move(terms)) {
  require_spd(V_, "EdgeworthExpansion");
  if (terms_.empty()) throw std::invalid_argument("EdgeworthExpansion: no terms");
  L_ = cholesky_lower(V_);
  v_inverse_ = V_.inverse();
  const double logdet = 2.0 * L_.diagonal().array().log().sum();
  log_norm_ = -0.5 * q() * std::log(2.0 * std::numbers::pi) - 0.5 * logdet;
}

const MultiPolynomial& EdgeworthExpansion::polynomial(int j) const {
  if (j < 0 || j > nu())
    throw std::out_of_range("EdgeworthExpansion: term index " + std::to_string(j) + " out of range");
  return terms_[static_cast<std::size_t>(j)];
}

double EdgeworthExpansion::gaussian_density(const Eigen::VectorXd& x) const {
  return std::exp(log_norm_ - 0.5 * x.dot(v_inverse_ * x));
}

EdgeworthExpansion EdgeworthExpansion::truncated(int order) const {
  if (order < 0 || order > nu()) throw std::out_of_range("EdgeworthExpansion::truncated");
  return EdgeworthExpansion(V_, std::vector<MultiPolynomial>(terms_.begin(), terms_.begin() + order + 1));
}

std::vector<MultiPolynomial> characteristic_polynomials(const GradedCumulants& cumulants, int nu) {
  const int q = cumulants.dim();
  // chi_g for g = 1..nu
  std::vector<MultiPolynomial> chi(static_cast<std::size_t>(nu + 1), MultiPolynomial(q));
  for (const auto& [key, tensor] : cumulants.terms()) {
    const auto [r, g] = key;
    if (g > nu) continue;
    for (const auto& [idx, value] : tensor.entries()) {
      // sum over orderings of idx of value * s_idx / r!  ==  value * s^alpha / alpha!
      ExponentVector alpha(static_cast<std::size_t>(q), 0);
      for (int i : idx) ++alpha[static_cast<std::size_t>(i)];
      double denom = 1.0;
      for (int a : alpha)
        for (int k = 2; k <= a; ++k) denom *= k;
      chi[static_cast<std::size_t>(g)].add_term(alpha, value / denom);
    }
  }
  // exp(F), F = sum_g u^g chi_g:  j pi_j = sum_{g=1}^j g chi_g pi_{j-g}
  std::vector<MultiPolynomial> pi;
  pi.push_back(MultiPolynomial::constant(q, 1.0));
  for (int j = 1; j <= nu; ++j) {
    MultiPolynomial acc(q);
    for (int g = 1; g <= j; ++g)
      acc += (chi[static_cast<std::size_t>(g)] * pi[static_cast<std::size_t>(j - g)]) * static_cast<double>(g);
    pi.push_back(acc * (1.0 / j));
  }
  return pi;
}

EdgeworthExpansion build_expansion(const GradedCumulants& cumulants, const Eigen::MatrixXd& V,
                                   int nu) {
  if (nu < 0 || nu > kMaxExpansionOrder)
    throw std::invalid_argument("build_expansion: nu must be in [0, " +
                                std::to_string(kMaxExpansionOrder) + "]");
  const int q = static_cast<int>(V.rows());
  if (V.cols() != q || q != cumulants.dim())
    throw std::invalid_argument("build_expansion: V and cumulant dimensions disagree");
  if (q > kMaxExpansionDim)
    throw std::invalid_argument("build_expansion: q must be <= " + std::to_string(kMaxExpansionDim));
  require_spd(V, "build_expansion");

  HermiteTensorTable table(V);
  std::vector<MultiPolynomial> terms;
  for (const auto& pi : characteristic_polynomials(cumulants, nu)) {
    MultiPolynomial p(q);
    for (const auto& [alpha, c] : pi.terms()) p += table.get(alpha) * c;
    terms.push_back(std::move(p));
  }
  return EdgeworthExpansion(V, std::move(terms));
}

EdgeworthExpansion build_expansion(const CumulantSet& cumulants, const Eigen::MatrixXd& V,
                                   int nu) {
  if (nu < 0) throw std::invalid_argument("build_expansion: nu must be >= 0");
  if (cumulants.max_order() < nu + 2)
    throw std::invalid_argument("build_expansion: cumulants needed up to order nu + 2");
  GradedCumulants g(cumulants.dim());
  for (int r = 3; r <= nu + 2; ++r) g.set(r, r - 2, cumulants.tensor(r));
  return build_expansion(g, V, nu);
}

double density_term(const EdgeworthExpansion& e, int j, const Eigen::VectorXd& x) {
  return e.polynomial(j).evaluate(x) * e.gaussian_density(x);
}

namespace {

// Shared MC driver: averages f(z) * 1{z in B} over z ~ N(0, V).
template <class F>
Estimate gaussian_mc(const EdgeworthExpansion& e, const Ball& b, const MCConfig& mc, F f) {
  if (mc.samples < 1) throw std::invalid_argument("signed measure: zero MC budget");
  if (b.dim() != e.q()) throw std::invalid_argument("signed measure: region dimension mismatch");
  const int q = e.q();
  const Eigen::MatrixXd& L = e.cholesky();
  const std::int64_t nblocks = (mc.samples + mc.block_size - 1) / mc.block_size;
  std::vector<std::pair<double, double>> partial(static_cast<std::size_t>(nblocks));
  parallel_for(nblocks, mc.jobs, [&](std::int64_t blk) {
    StreamRng rng(mc.seed, static_cast<std::uint64_t>(blk));
    const std::int64_t begin = blk * mc.block_size;
    const std::int64_t end = std::min(mc.samples, begin + mc.block_size);
    Eigen::VectorXd n(q);
    double s = 0.0, ss = 0.0;
    for (std::int64_t i = begin; i < end; ++i) {
      for (int k = 0; k < q; ++k) n(k) = rng.normal();
      const Eigen::VectorXd z = L * n;
      if (!contains(b, z)) continue;
      const double v = f(z);
      s += v;
      ss += v * v;
    }
    partial[static_cast<std::size_t>(blk)] = {s, ss};
  });
  double s = 0.0, ss = 0.0;
  for (const auto& [a, c] : partial) {
    s += a;
    ss += c;
  }
  const double N = static_cast<double>(mc.samples);
  const double mean = s / N;
  const double var = std::max(0.0, ss / N - mean * mean);
  return {mean, std::sqrt(var / N)};
}

// Integral over (-inf, t] of x^k phi_sigma(x), k = 0..kmax.
std::vector<double> truncated_moments(double t, double sigma, int kmax) {
  std::vector<double> I(static_cast<std::size_t>(kmax + 1));
  const double s2 = sigma * sigma;
  if (std::isinf(t)) {
    if (t < 0) return std::vector<double>(I.size(), 0.0);
    for (int k = 0; k <= kmax; ++k) {
      if (k % 2 == 1) {
        I[static_cast<std::size_t>(k)] = 0.0;
      } else {
        double m = 1.0;
        for (int i = k - 1; i > 0; i -= 2) m *= i;
        I[static_cast<std::size_t>(k)] = m * std::pow(sigma, k);
      }
    }
    return I;
  }
  const double dens = normal_pdf(t / sigma) / sigma;
  I[0] = normal_cdf(t / sigma);
  if (kmax >= 1) I[1] = -s2 * dens;
  for (int k = 2; k <= kmax; ++k)
    I[static_cast<std::size_t>(k)] =
        -s2 * std::pow(t, k - 1) * dens + (k - 1) * s2 * I[static_cast<std::size_t>(k - 2)];
  return I;
}

double univariate_integral(const MultiPolynomial& p, double sigma, double lo, double hi) {
  const int kmax = p.degree();
  const auto Ihi = truncated_moments(hi, sigma, kmax);
  const auto Ilo = truncated_moments(lo, sigma, kmax);
  double sum = 0.0;
  for (const auto& [alpha, c] : p.terms())
    sum += c * (Ihi[static_cast<std::size_t>(alpha[0])] - Ilo[static_cast<std::size_t>(alpha[0])]);
  return sum;
}

template <class F>
double quadrature_integral(const EdgeworthExpansion& e, const Ball& b, F f) {
  const int q = e.q();
  if (b.dim() != q) throw std::invalid_argument("quadrature: region dimension mismatch");
  if (q > 2) throw std::invalid_argument("quadrature: only q <= 2 is supported");
  if (b.is_whole_space()) {
    const auto gh = gauss_hermite_normal(40);
    const Eigen::MatrixXd& L = e.cholesky();
    double sum = 0.0;
    Eigen::VectorXd y(q);
    if (q == 1) {
      for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        y(0) = gh.nodes[i];
        sum += gh.weights[i] * f(L * y);
      }
    } else {
      for (std::size_t i = 0; i < gh.nodes.size(); ++i)
        for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
          y << gh.nodes[i], gh.nodes[k];
          sum += gh.weights[i] * gh.weights[k] * f(L * y);
        }
    }
    return sum;
  }
  if (q != 2 || b.is_half_line()) throw std::logic_error("quadrature: unsupported region");
  // Polar coordinates about the ball center.
  const auto radial = gauss_legendre(64, 0.0, b.radius());
  constexpr int kAngles = 256;
  double sum = 0.0;
  Eigen::VectorXd x(2);
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double rho = radial.nodes[i];
    double ring = 0.0;
    for (int a = 0; a < kAngles; ++a) {
      const double th = 2.0 * std::numbers::pi * a / kAngles;
      x << b.center()(0) + rho * std::cos(th), b.center()(1) + rho * std::sin(th);
      ring += f(x) * e.gaussian_density(x);
    }
    sum += radial.weights[i] * rho * ring * (2.0 * std::numbers::pi / kAngles);
  }
  return sum;
}

std::pair<double, double> univariate_bounds(const Ball& b) {
  if (b.is_half_line()) return {-Ball::kInfinity, b.threshold()};
  if (b.is_whole_space()) return {-Ball::kInfinity, Ball::kInfinity};
  return {b.center()(0) - b.radius(), b.center()(0) + b.radius()};
}

}  // namespace

Estimate signed_measure(const EdgeworthExpansion& e, int j, const Ball& b, const MCConfig& mc) {
  const MultiPolynomial& p = e.polynomial(j);
  return gaussian_mc(e, b, mc, [&](const Eigen::VectorXd& z) { return p.evaluate(z); });
}

double signed_measure_quadrature(const EdgeworthExpansion& e, int j, const Ball& b) {
  const MultiPolynomial& p = e.polynomial(j);
  if (e.q() == 1) {
    const auto [lo, hi] = univariate_bounds(b);
    return univariate_integral(p, std::sqrt(e.V()(0, 0)), lo, hi);
  }
  return quadrature_integral(e, b, [&](const Eigen::VectorXd& x) { return p.evaluate(x); });
}

namespace {

int resolve_order(const EdgeworthExpansion& e, int order) {
  if (order < 0) return e.nu();
  if (order > e.nu()) throw std::out_of_range("expansion_probability: order exceeds nu");
  return order;
}

}  // namespace

Estimate expansion_probability(const EdgeworthExpansion& e, const Ball& b, double n,
                               const MCConfig& mc, int order) {
  if (!(n >= 1.0)) throw std::invalid_argument("expansion_probability: n must be >= 1");
  const int top = resolve_order(e, order);
  std::vector<double> w;
  for (int j = 0; j <= top; ++j) w.push_back(std::pow(n, -0.5 * j));
  return gaussian_mc(e, b, mc, [&](const Eigen::VectorXd& z) {
    double v = 0.0;
    for (int j = 0; j <= top; ++j) v += w[static_cast<std::size_t>(j)] * e.polynomial(j).evaluate(z);
    return v;
  });
}

double expansion_probability_quadrature(const EdgeworthExpansion& e, const Ball& b, double n,
                                        int order) {
  if (!(n >= 1.0)) throw std::invalid_argument("expansion_probability: n must be >= 1");
  const int top = resolve_order(e, order);
  double sum = 0.0;
  for (int j = 0; j <= top; ++j) sum += std::pow(n, -0.5 * j) * signed_measure_quadrature(e, j, b);
  return sum;
}

double xi_nu(const EdgeworthExpansion& e) {
  if (e.nu() < 1) throw std::invalid_argument("xi_nu: requires nu >= 1");
  double m = 0.0;
  for (int j = 1; j <= e.nu(); ++j) m = std::max(m, e.polynomial(j).max_abs_coefficient());
  return m;
}

}  // namespace edgeboot
