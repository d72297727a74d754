#include "edgeboot/smooth_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "edgeboot/linalg.hpp"

namespace edgeboot {

Eigen::VectorXd SmoothStatistic::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& anchors) const {
  if (x.size() != kd() || anchors.size() != kd())
    throw std::invalid_argument("statistic '" + name + "': expected " + std::to_string(kd()) +
                                " flattened coordinates");
  Eigen::VectorXd v = value(x, anchors);
  if (v.size() != q) throw std::runtime_error("statistic '" + name + "': value has wrong dimension");
  return v;
}

Eigen::VectorXd SmoothStatistic::lift_observation(const Eigen::VectorXd& raw) const {
  if (raw.size() != raw_dim)
    throw std::invalid_argument("statistic '" + name + "': raw observation has wrong dimension");
  return lift ? lift(raw) : raw;
}

namespace {

ExponentVector exponents_of(const std::vector<int>& idx, int nvars) {
  ExponentVector alpha(static_cast<std::size_t>(nvars), 0);
  for (int i : idx) {
    if (i < 0 || i >= nvars) throw std::out_of_range("derivative index out of range");
    ++alpha[static_cast<std::size_t>(i)];
  }
  return alpha;
}

double factorial_product(const ExponentVector& alpha) {
  double f = 1.0;
  for (int a : alpha)
    for (int k = 2; k <= a; ++k) f *= k;
  return f;
}

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// Tensor product of central difference stencils with step h.
double mixed_central_difference(const SmoothStatistic& stat, int component, const ExponentVector& alpha,
                                const Eigen::VectorXd& anchors, double h) {
  std::vector<int> vars;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] > 0) vars.push_back(static_cast<int>(i));
  std::vector<int> k(vars.size(), 0);
  double sum = 0.0;
  while (true) {
    Eigen::VectorXd x = anchors;
    double w = 1.0;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const int c = alpha[static_cast<std::size_t>(vars[v])];
      x(vars[v]) += (0.5 * c - k[v]) * h;
      w *= ((k[v] % 2) ? -1.0 : 1.0) * binomial(c, k[v]);
    }
    sum += w * stat.evaluate(x, anchors)(component);
    std::size_t v = 0;
    for (; v < vars.size(); ++v) {
      if (++k[v] <= alpha[static_cast<std::size_t>(vars[v])]) break;
      k[v] = 0;
    }
    if (v == vars.size()) break;
  }
  return sum / std::pow(h, total_degree(alpha));
}

}  // namespace

double finite_difference_derivative(const SmoothStatistic& stat, int component, const std::vector<int>& idx,
                                    const Eigen::VectorXd& anchors) {
  const ExponentVector alpha = exponents_of(idx, stat.kd());
  const int m = total_degree(alpha);
  if (m == 0) return stat.evaluate(anchors, anchors)(component);
  const double scale = 1.0 + anchors.norm();
  // First order uses the documented 1e-5 step; higher orders widen the step to
  // balance truncation against cancellation.
  const double h = m == 1 ? 1e-5 * scale
                          : std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (m + 4)) * scale;
  const double coarse = mixed_central_difference(stat, component, alpha, anchors, h);
  const double fine = mixed_central_difference(stat, component, alpha, anchors, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

double statistic_derivative(const SmoothStatistic& stat, int component, const std::vector<int>& idx,
                            const Eigen::VectorXd& anchors) {
  if (component < 0 || component >= stat.q) throw std::out_of_range("statistic component out of range");
  if (stat.derivative) return stat.derivative(component, idx, anchors);
  if (stat.taylor) {
    const ExponentVector alpha = exponents_of(idx, stat.kd());
    const auto polys = stat.taylor(anchors, static_cast<int>(idx.size()));
    return polys.at(static_cast<std::size_t>(component)).coefficient(alpha) * factorial_product(alpha);
  }
  return finite_difference_derivative(stat, component, idx, anchors);
}

std::vector<MultiPolynomial> taylor_polynomials(const SmoothStatistic& stat, const Eigen::VectorXd& anchors,
                                                int order) {
  if (order < 0) throw std::invalid_argument("taylor_polynomials: negative order");
  if (stat.taylor) {
    auto polys = stat.taylor(anchors, order);
    if (static_cast<int>(polys.size()) != stat.q) throw std::runtime_error("taylor callback: wrong size");
    for (auto& p : polys) p = p.truncated(order);
    return polys;
  }
  const int nv = stat.kd();
  std::vector<MultiPolynomial> polys;
  const Eigen::VectorXd at = stat.evaluate(anchors, anchors);
  for (int c = 0; c < stat.q; ++c) {
    MultiPolynomial p = MultiPolynomial::constant(nv, at(c));
    for (int m = 1; m <= order; ++m) {
      for (const auto& idx : index_multisets(nv, m)) {
        const ExponentVector alpha = exponents_of(idx, nv);
        p.add_term(alpha, statistic_derivative(stat, c, idx, anchors) / factorial_product(alpha));
      }
    }
    polys.push_back(std::move(p));
  }
  return polys;
}

MultiPolynomial StatisticExpansion::graded_part(int c, int s) const {
  return grades.at(static_cast<std::size_t>(c)).at(static_cast<std::size_t>(s)) * std::pow(n, -0.5 * s);
}

MultiPolynomial StatisticExpansion::component(int c) const {
  MultiPolynomial p(nvars);
  for (std::size_t s = 0; s < grades.at(static_cast<std::size_t>(c)).size(); ++s)
    p += graded_part(c, static_cast<int>(s));
  return p;
}

Eigen::VectorXd StatisticExpansion::evaluate(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(q);
  for (int c = 0; c < q; ++c) out(c) = component(c).evaluate(x);
  return out;
}

PolynomialMap StatisticExpansion::polynomial_map() const {
  std::vector<std::vector<MultiPolynomial>> parts(static_cast<std::size_t>(q));
  for (int c = 0; c < q; ++c)
    for (std::size_t s = 0; s < grades[static_cast<std::size_t>(c)].size(); ++s)
      parts[static_cast<std::size_t>(c)].push_back(graded_part(c, static_cast<int>(s)));
  return PolynomialMap(std::move(parts));
}

StatisticExpansion taylor_expand(const SmoothStatistic& stat, const Eigen::VectorXd& anchors, double n, int nu) {
  if (!(n >= 1.0)) throw std::invalid_argument("taylor_expand: n must be >= 1");
  if (nu < 0) throw std::invalid_argument("taylor_expand: nu must be >= 0");
  if (anchors.size() != stat.kd()) throw std::invalid_argument("taylor_expand: anchor dimension mismatch");
  const int top = nu + 2;
  const auto polys = taylor_polynomials(stat, anchors, top);
  StatisticExpansion e;
  e.q = stat.q;
  e.nvars = stat.kd();
  e.nu = nu;
  e.n = n;
  e.offset = Eigen::VectorXd(stat.q);
  e.remainder.exponent = 0.5 * (nu + 2);
  e.remainder.log_power = nu + 3;
  for (int c = 0; c < stat.q; ++c) {
    const MultiPolynomial& p = polys[static_cast<std::size_t>(c)];
    const double constant = p.coefficient(ExponentVector(static_cast<std::size_t>(e.nvars), 0));
    if (stat.centered && std::abs(constant) > 1e-12)
      throw std::logic_error("statistic '" + stat.name + "' declares centering but g(a; a) != 0");
    e.offset(c) = std::sqrt(n) * constant;
    std::vector<MultiPolynomial> g;
    for (int s = 0; s <= nu + 1; ++s) g.push_back(p.homogeneous_part(s + 1));
    e.grades.push_back(std::move(g));
  }
  return e;
}

Eigen::VectorXd scaled_statistic(const SmoothStatistic& stat, const Eigen::VectorXd& anchors, double n,
                                 const Eigen::VectorXd& x) {
  const double rn = std::sqrt(n);
  const Eigen::VectorXd at = stat.evaluate(anchors, anchors);
  return rn * (stat.evaluate(anchors + x / rn, anchors) - at);
}

double estimate_remainder_constant(const SmoothStatistic& stat, const Eigen::VectorXd& anchors,
                                   StatisticExpansion& e, const Eigen::MatrixXd& points) {
  if (points.cols() != e.nvars) throw std::invalid_argument("estimate_remainder_constant: wrong point width");
  const double logn = std::log(e.n);
  const double scale = std::pow(e.n, -e.remainder.exponent) * std::pow(logn, e.remainder.log_power);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd x = points.row(i).transpose();
    if (x.norm() > logn) continue;
    const double gap = (scaled_statistic(stat, anchors, e.n, x) - e.evaluate(x)).norm();
    worst = std::max(worst, gap / scale);
  }
  e.remainder.c_star = worst;
  e.remainder.estimated = true;
  return worst;
}

// --- approximate cumulants --------------------------------------------------

namespace {

using Series = std::vector<double>;  // coefficients of u^0..u^nu

Series series_mul(const Series& a, const Series& b) {
  Series c(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < a.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

MultiPolynomial drop_high_u(const MultiPolynomial& p, int uvar, int nu) {
  MultiPolynomial out(p.nvars());
  for (const auto& [alpha, c] : p.terms())
    if (alpha[static_cast<std::size_t>(uvar)] <= nu) out.add_term(alpha, c);
  return out;
}

class GaussianishExpectation {
 public:
  GaussianishExpectation(int d, int nu, std::vector<std::vector<SymmetricTensor>> omega)
      : d_(d), nu_(nu), omega_(std::move(omega)) {}

  // E[x^beta] as a series in u; x has cumulants u^{r-2} omega_r (r >= 2) per sample.
  const Series& operator()(const ExponentVector& beta) {
    if (auto it = memo_.find(beta); it != memo_.end()) return it->second;
    std::vector<int> pos;
    for (std::size_t i = 0; i < beta.size(); ++i)
      for (int c = 0; c < beta[i]; ++c) pos.push_back(static_cast<int>(i));
    Series s(static_cast<std::size_t>(nu_ + 1), 0.0);
    const int L = static_cast<int>(pos.size());
    if (L == 0) {
      s[0] = 1.0;
    } else {
      if (L > 12) throw std::logic_error("approximate_cumulants: moment order too high");
      for (const auto& part : set_partitions(L)) {
        int upow = 0;
        double prod = 1.0;
        bool ok = true;
        for (const auto& block : part) {
          const int b = static_cast<int>(block.size());
          if (b < 2 || b > nu_ + 2) {
            ok = false;
            break;
          }
          const int sample = pos[static_cast<std::size_t>(block[0])] / d_;
          std::vector<int> idx;
          for (int p : block) {
            const int v = pos[static_cast<std::size_t>(p)];
            if (v / d_ != sample) {
              ok = false;
              break;
            }
            idx.push_back(v % d_);
          }
          if (!ok) break;
          upow += b - 2;
          if (upow > nu_) {
            ok = false;
            break;
          }
          prod *= omega_[static_cast<std::size_t>(sample)][static_cast<std::size_t>(b)].at(idx);
        }
        if (ok) s[static_cast<std::size_t>(upow)] += prod;
      }
    }
    return memo_.emplace(beta, std::move(s)).first->second;
  }

 private:
  int d_;
  int nu_;
  std::vector<std::vector<SymmetricTensor>> omega_;  // [sample][order]
  std::map<ExponentVector, Series> memo_;
};

}  // namespace

EdgeworthExpansion ApproximateCumulants::expansion() const {
  return build_expansion(eta, Eigen::MatrixXd::Identity(W.rows(), W.cols()), nu);
}

ApproximateCumulants approximate_cumulants(const SmoothStatistic& stat, const Eigen::VectorXd& anchors,
                                           const std::vector<CumulantSet>& sample_cumulants,
                                           const std::vector<int>& n_js, int nu,
                                           const BalanceOptions& balance) {
  if (nu < 0 || nu > kMaxExpansionOrder)
    throw std::invalid_argument("approximate_cumulants: nu out of range");
  const int k = stat.k, d = stat.d, q = stat.q, kd = stat.kd();
  if (static_cast<int>(sample_cumulants.size()) != k || static_cast<int>(n_js.size()) != k)
    throw std::invalid_argument("approximate_cumulants: need one cumulant set and size per sample");
  const auto [mn, mx] = std::minmax_element(n_js.begin(), n_js.end());
  if (*mn < 1) throw std::invalid_argument("approximate_cumulants: sample sizes must be positive");
  if (static_cast<double>(*mx) / *mn > balance.max_ratio)
    throw std::invalid_argument("approximate_cumulants: sample sizes too unbalanced (max/min = " +
                                std::to_string(static_cast<double>(*mx) / *mn) + ")");
  double n = 0.0;
  for (int nj : n_js) n += nj;

  // Per-sample cumulants of x_j = n^{1/2}(Xbar*_j - Xbar_j): u^{r-2} rho_j^{1-r} kappa_r.
  std::vector<std::vector<SymmetricTensor>> omega(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const CumulantSet& cs = sample_cumulants[static_cast<std::size_t>(j)];
    if (cs.dim() != d) throw std::invalid_argument("approximate_cumulants: cumulant dimension mismatch");
    if (cs.max_order() < nu + 2)
      throw std::invalid_argument("approximate_cumulants: cumulants needed up to order nu + 2");
    const double rho = n_js[static_cast<std::size_t>(j)] / n;
    auto& om = omega[static_cast<std::size_t>(j)];
    om.resize(static_cast<std::size_t>(nu + 3));
    for (int r = 2; r <= nu + 2; ++r) {
      SymmetricTensor t(d, r);
      const double f = std::pow(rho, 1 - r);
      for (const auto& [idx, v] : cs.tensor(r).entries()) t.set(idx, f * v);
      om[static_cast<std::size_t>(r)] = std::move(t);
    }
  }

  // Y_c = sum_s u^{s-1} A_s(x), variables x_0..x_{kd-1} and u.
  const int uvar = kd;
  const auto polys = taylor_polynomials(stat, anchors, nu + 1);
  std::vector<MultiPolynomial> Y;
  for (int c = 0; c < q; ++c) {
    MultiPolynomial y(kd + 1);
    for (const auto& [alpha, coef] : polys[static_cast<std::size_t>(c)].terms()) {
      const int s = total_degree(alpha);
      if (s == 0) continue;
      ExponentVector ext = alpha;
      ext.push_back(s - 1);
      y.add_term(ext, coef);
    }
    Y.push_back(std::move(y));
  }

  GaussianishExpectation expect(d, nu, std::move(omega));
  auto expectation = [&](const MultiPolynomial& p) {
    Series s(static_cast<std::size_t>(nu + 1), 0.0);
    for (const auto& [alpha, coef] : p.terms()) {
      const int p_u = alpha[static_cast<std::size_t>(uvar)];
      const ExponentVector beta(alpha.begin(), alpha.end() - 1);
      const Series& e = expect(beta);
      for (int g = 0; g + p_u <= nu; ++g) s[static_cast<std::size_t>(g + p_u)] += coef * e[static_cast<std::size_t>(g)];
    }
    return s;
  };

  // Moments of Y up to order nu + 2 as u-series.
  const int R = nu + 2;
  std::map<IndexMultiset, Series> moments;
  for (int m = 1; m <= R; ++m) {
    for (const auto& comps : index_multisets(q, m)) {
      MultiPolynomial prod = MultiPolynomial::constant(kd + 1, 1.0);
      for (int c : comps) prod = drop_high_u(prod * Y[static_cast<std::size_t>(c)], uvar, nu);
      moments.emplace(comps, expectation(prod));
    }
  }

  // Moebius inversion to cumulants with series arithmetic.
  std::map<IndexMultiset, Series> cumulants;
  for (int r = 1; r <= R; ++r) {
    for (const auto& comps : index_multisets(q, r)) {
      Series acc(static_cast<std::size_t>(nu + 1), 0.0);
      for (const auto& part : set_partitions(r)) {
        const int B = static_cast<int>(part.size());
        double w = (B % 2 == 1) ? 1.0 : -1.0;
        for (int i = 2; i < B; ++i) w *= i;
        Series term(static_cast<std::size_t>(nu + 1), 0.0);
        term[0] = w;
        for (const auto& block : part) {
          IndexMultiset sub;
          for (int p : block) sub.push_back(comps[static_cast<std::size_t>(p)]);
          std::sort(sub.begin(), sub.end());
          term = series_mul(term, moments.at(sub));
        }
        for (std::size_t g = 0; g < acc.size(); ++g) acc[g] += term[g];
      }
      cumulants.emplace(comps, std::move(acc));
    }
  }

  ApproximateCumulants out;
  out.nu = nu;
  out.n = n;
  out.W = Eigen::MatrixXd(q, q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      IndexMultiset key{std::min(a, b), std::max(a, b)};
      out.W(a, b) = cumulants.at(key)[0];
    }
  out.raw = GradedCumulants(q);
  for (int r = 1; r <= R; ++r) {
    for (int g = 1; g <= nu; ++g) {
      if (r > g + 2 || (r - g) % 2 != 0) continue;
      SymmetricTensor t(q, r);
      for (const auto& comps : index_multisets(q, r)) t.set(comps, cumulants.at(comps)[static_cast<std::size_t>(g)]);
      out.raw.set(r, g, std::move(t));
    }
  }
  try {
    out.T = sym_inv_sqrt(out.W);
  } catch (const std::domain_error&) {
    throw std::domain_error("approximate_cumulants: singular leading covariance W (degenerate statistic)");
  }
  out.eta = out.raw.transformed(out.T);
  return out;
}

// --- regions ------------------------------------------------------------------

bool region_membership(const SmoothStatistic& stat, const Eigen::VectorXd& anchors, const Ball& b, double n,
                       const Eigen::VectorXd& x) {
  const double rn = std::sqrt(n);
  return contains(b, rn * stat.evaluate(anchors + x / rn, anchors));
}

namespace {

void check_blocks(int k, int d, const std::vector<Eigen::MatrixXd>& vhat, const std::vector<Eigen::VectorXd>& ym) {
  if (static_cast<int>(vhat.size()) != k || static_cast<int>(ym.size()) != k)
    throw std::invalid_argument("dagger map: need one block and one mean per sample");
  for (int j = 0; j < k; ++j)
    if (vhat[static_cast<std::size_t>(j)].rows() != d || ym[static_cast<std::size_t>(j)].size() != d)
      throw std::invalid_argument("dagger map: block dimension mismatch");
}

}  // namespace

Eigen::VectorXd dagger_transform(const Eigen::VectorXd& y, double n, const std::vector<Eigen::MatrixXd>& vhat_blocks,
                                 const std::vector<Eigen::VectorXd>& y_means) {
  const int k = static_cast<int>(vhat_blocks.size());
  if (k == 0) throw std::invalid_argument("dagger map: no blocks");
  const int d = static_cast<int>(vhat_blocks[0].rows());
  check_blocks(k, d, vhat_blocks, y_means);
  if (y.size() != k * d) throw std::invalid_argument("dagger map: point dimension mismatch");
  Eigen::VectorXd x(k * d);
  for (int j = 0; j < k; ++j)
    x.segment(j * d, d) = sym_inv_sqrt(vhat_blocks[static_cast<std::size_t>(j)]) * y.segment(j * d, d) -
                          std::sqrt(n) * y_means[static_cast<std::size_t>(j)];
  return x;
}

bool region_dagger_membership(const SmoothStatistic& stat, const Eigen::VectorXd& anchors, const Ball& b, double n,
                              const Eigen::VectorXd& x, const std::vector<Eigen::MatrixXd>& vhat_blocks,
                              const std::vector<Eigen::VectorXd>& y_means) {
  const int k = stat.k, d = stat.d;
  check_blocks(k, d, vhat_blocks, y_means);
  if (x.size() != k * d) throw std::invalid_argument("dagger map: point dimension mismatch");
  Eigen::VectorXd y(k * d);
  for (int j = 0; j < k; ++j)
    y.segment(j * d, d) = sym_sqrt(vhat_blocks[static_cast<std::size_t>(j)]) *
                          (x.segment(j * d, d) + std::sqrt(n) * y_means[static_cast<std::size_t>(j)]);
  return region_membership(stat, anchors, b, n, y);
}

}  // namespace edgeboot
