#include "edgeboot/regions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "edgeboot/linalg.hpp"

namespace edgeboot {

Ball Ball::sphere(Eigen::VectorXd center, double radius) {
  if (center.size() < 1) throw std::invalid_argument("Ball: dimension must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("Ball: radius must be positive");
  Ball b;
  b.center_ = std::move(center);
  b.radius_ = radius;
  return b;
}

Ball Ball::whole_space(int q) { return sphere(Eigen::VectorXd::Zero(q), kInfinity); }

Ball Ball::half_line(double threshold) {
  Ball b;
  b.center_ = Eigen::VectorXd::Zero(1);
  b.radius_ = kInfinity;
  b.halfline_threshold_ = threshold;
  return b;
}

Ball Ball::interval(double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("Ball::interval: need lo < hi");
  return sphere(Eigen::VectorXd::Constant(1, 0.5 * (lo + hi)), 0.5 * (hi - lo));
}

Ball Ball::translated(const Eigen::VectorXd& y) const {
  if (y.size() != dim()) throw std::invalid_argument("Ball::translated: dimension mismatch");
  Ball b = *this;
  if (is_half_line())
    b.halfline_threshold_ = *halfline_threshold_ + y(0);
  else
    b.center_ += y;
  return b;
}

std::string Ball::describe() const {
  std::ostringstream os;
  os.precision(10);
  if (is_half_line()) {
    os << "halfline(" << *halfline_threshold_ << ")";
  } else if (is_whole_space()) {
    os << "whole(" << dim() << ")";
  } else {
    os << "ball(";
    for (int i = 0; i < dim(); ++i) os << (i ? ";" : "") << center_(i);
    os << ";r=" << radius_ << ")";
  }
  return os.str();
}

namespace {

void check_dim(const Ball& b, const Eigen::VectorXd& x) {
  if (x.size() != b.dim()) throw std::invalid_argument("Ball: dimension mismatch");
}

}  // namespace

bool contains(const Ball& b, const Eigen::VectorXd& x) {
  check_dim(b, x);
  if (b.is_half_line()) return x(0) <= b.threshold();
  if (b.is_whole_space()) return true;
  return (x - b.center()).norm() <= b.radius();
}

double boundary_distance(const Ball& b, const Eigen::VectorXd& x) {
  check_dim(b, x);
  if (b.is_half_line()) return std::abs(x(0) - b.threshold());
  if (b.is_whole_space()) return Ball::kInfinity;
  return std::abs((x - b.center()).norm() - b.radius());
}

bool in_boundary_neighborhood(const Ball& b, const Eigen::VectorXd& x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("in_boundary_neighborhood: eps must be positive");
  if (b.is_whole_space()) return false;  // empty boundary
  return boundary_distance(b, x) < eps;
}

Estimate gaussian_boundary_mass(const Ball& b, const Eigen::MatrixXd& V, double eps,
                                const MCConfig& mc) {
  if (V.rows() != b.dim() || V.cols() != b.dim())
    throw std::invalid_argument("gaussian_boundary_mass: V has wrong shape");
  require_spd(V, "gaussian_boundary_mass");
  if (eps < 0.0) throw std::invalid_argument("gaussian_boundary_mass: eps must be >= 0");
  if (eps == 0.0) return {0.0, 0.0};
  if (mc.samples < 1) throw std::invalid_argument("gaussian_boundary_mass: zero MC budget");
  if (b.is_whole_space()) return {0.0, 0.0};

  const Eigen::MatrixXd L = cholesky_lower(V);
  const int q = b.dim();
  const std::int64_t nblocks = (mc.samples + mc.block_size - 1) / mc.block_size;
  std::vector<std::int64_t> hits(static_cast<std::size_t>(nblocks), 0);
  parallel_for(nblocks, mc.jobs, [&](std::int64_t blk) {
    StreamRng rng(mc.seed, static_cast<std::uint64_t>(blk));
    const std::int64_t begin = blk * mc.block_size;
    const std::int64_t end = std::min(mc.samples, begin + mc.block_size);
    Eigen::VectorXd z(q);
    std::int64_t h = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      for (int k = 0; k < q; ++k) z(k) = rng.normal();
      if (boundary_distance(b, L * z) < eps) ++h;
    }
    hits[static_cast<std::size_t>(blk)] = h;
  });
  std::int64_t total = 0;
  for (auto h : hits) total += h;
  const double p = static_cast<double>(total) / static_cast<double>(mc.samples);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(mc.samples))};
}

Lemma1Result lemma1_select(const Eigen::MatrixXd& vs) {
  const int q = static_cast<int>(vs.rows());
  const int d = static_cast<int>(vs.cols());
  if (q < 1) throw std::invalid_argument("lemma1_select: empty vectors");
  if (d <= q) throw std::invalid_argument("lemma1_select: need more vectors than dimensions");
  const Eigen::MatrixXd W0 = vs * vs.transpose();
  if (lambda_min(W0) <= 1e-12)
    throw std::domain_error("lemma1_select: W0 is not positive definite");

  Lemma1Result out;
  out.lambda_mins.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const Eigen::MatrixXd Wj = W0 - vs.col(j) * vs.col(j).transpose();
    const double lm = lambda_min(Wj);
    out.lambda_mins[static_cast<std::size_t>(j)] = lm;
    if (out.index < 0 || lm > out.lambda_min) {
      out.index = j;
      out.lambda_min = lm;
    }
  }
  return out;
}

PolynomialMap::PolynomialMap(std::vector<std::vector<MultiPolynomial>> parts)
    : parts_(std::move(parts)) {
  if (parts_.empty()) throw std::invalid_argument("PolynomialMap: no components");
  grades_ = static_cast<int>(parts_.front().size());
  if (grades_ < 1) throw std::invalid_argument("PolynomialMap: need a linear part");
  d_ = parts_.front().front().nvars();
  if (q() > d_) throw std::invalid_argument("PolynomialMap: need q <= d");
  for (const auto& comp : parts_) {
    if (static_cast<int>(comp.size()) != grades_)
      throw std::invalid_argument("PolynomialMap: components have different grade counts");
    for (int s = 0; s < grades_; ++s) {
      const auto& p = comp[static_cast<std::size_t>(s)];
      if (p.nvars() != d_) throw std::invalid_argument("PolynomialMap: nvars mismatch");
      if (!p.empty() && (p.degree() != s + 1 || p.min_degree() != s + 1))
        throw std::invalid_argument("PolynomialMap: grade s must be homogeneous of degree s+1");
      b1_ = std::max(b1_, p.max_abs_coefficient());
    }
  }
  const Eigen::MatrixXd C = linear_coefficients();
  W_ = C * C.transpose();
  const auto e = jacobi_eigen(W_);
  if (e.values(0) <= 1e-12)
    throw std::invalid_argument("PolynomialMap: Gram matrix W of linear coefficients is singular");
  b2_ = std::max(e.values(e.values.size() - 1), 1.0 / e.values(0));
}

Eigen::MatrixXd PolynomialMap::linear_coefficients() const {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(q(), d_);
  for (int a = 0; a < q(); ++a) {
    for (int i = 0; i < d_; ++i) {
      ExponentVector e(static_cast<std::size_t>(d_), 0);
      e[static_cast<std::size_t>(i)] = 1;
      C(a, i) = parts_[static_cast<std::size_t>(a)][0].coefficient(e);
    }
  }
  return C;
}

Eigen::VectorXd PolynomialMap::evaluate(const Eigen::VectorXd& z, double n) const {
  Eigen::VectorXd out(q());
  const double u = 1.0 / std::sqrt(n);
  for (int a = 0; a < q(); ++a) {
    double v = 0.0, w = 1.0;
    for (int s = 0; s < grades_; ++s, w *= u) v += w * parts_[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)].evaluate(z);
    out(a) = v;
  }
  return out;
}

Prop1Result prop1_probability(const PolynomialMap& pmap, const std::vector<Ball>& regions,
                              double beta, double b, double n, const MCConfig& mc) {
  if (!(beta > 0.0)) throw std::invalid_argument("prop1_probability: beta must be positive");
  if (!(n > 1.0)) throw std::invalid_argument("prop1_probability: n must exceed 1");
  if (mc.samples < 1) throw std::invalid_argument("prop1_probability: zero MC budget");
  if (regions.empty()) throw std::invalid_argument("prop1_probability: no regions");
  for (const auto& r : regions)
    if (r.dim() != pmap.q()) throw std::invalid_argument("prop1_probability: region dimension != q");

  Prop1Result out;
  out.eps = std::pow(n, -beta);
  out.radius = b * std::log(n);
  const int d = pmap.d();
  const std::size_t nr = regions.size();
  const std::int64_t nblocks = (mc.samples + mc.block_size - 1) / mc.block_size;
  std::vector<std::vector<std::int64_t>> hits(static_cast<std::size_t>(nblocks),
                                              std::vector<std::int64_t>(nr, 0));
  parallel_for(nblocks, mc.jobs, [&](std::int64_t blk) {
    StreamRng rng(mc.seed, static_cast<std::uint64_t>(blk));
    const std::int64_t begin = blk * mc.block_size;
    const std::int64_t end = std::min(mc.samples, begin + mc.block_size);
    Eigen::VectorXd z(d);
    auto& h = hits[static_cast<std::size_t>(blk)];
    for (std::int64_t i = begin; i < end; ++i) {
      for (int k = 0; k < d; ++k) z(k) = rng.normal();
      if (z.norm() > out.radius) continue;
      const Eigen::VectorXd y = pmap.evaluate(z, n);
      for (std::size_t r = 0; r < nr; ++r)
        if (!regions[r].is_whole_space() && boundary_distance(regions[r], y) < out.eps) ++h[r];
    }
  });
  const double N = static_cast<double>(mc.samples);
  for (std::size_t r = 0; r < nr; ++r) {
    std::int64_t total = 0;
    for (const auto& h : hits) total += h[r];
    const double p = static_cast<double>(total) / N;
    out.per_region.push_back({p, std::sqrt(p * (1.0 - p) / N)});
    if (out.sup_index < 0 || p > out.sup.value) {
      out.sup_index = static_cast<int>(r);
      out.sup = out.per_region.back();
    }
  }
  return out;
}

}  // namespace edgeboot
