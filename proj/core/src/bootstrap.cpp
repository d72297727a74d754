#include "edgeboot/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "edgeboot/linalg.hpp"

namespace edgeboot {

SampleSet::SampleSet(std::vector<Eigen::MatrixXd> samples, std::string provenance)
    : samples_(std::move(samples)), provenance_(std::move(provenance)) {
  if (samples_.empty()) throw std::invalid_argument("SampleSet: need at least one sample");
  const auto d = samples_.front().cols();
  if (d < 1) throw std::invalid_argument("SampleSet: dimension must be positive");
  for (std::size_t j = 0; j < samples_.size(); ++j) {
    if (samples_[j].cols() != d) throw std::invalid_argument("SampleSet: samples differ in dimension");
    if (samples_[j].rows() < 2)
      throw std::invalid_argument("SampleSet: sample " + std::to_string(j) + " has fewer than 2 observations");
    if (!samples_[j].allFinite()) throw std::invalid_argument("SampleSet: non-finite observation");
  }
}

std::vector<int> SampleSet::sizes() const {
  std::vector<int> out;
  for (const auto& s : samples_) out.push_back(static_cast<int>(s.rows()));
  return out;
}

int SampleSet::total_n() const {
  int n = 0;
  for (const auto& s : samples_) n += static_cast<int>(s.rows());
  return n;
}

double SampleSet::balance_ratio() const {
  const auto sz = sizes();
  const auto [mn, mx] = std::minmax_element(sz.begin(), sz.end());
  return static_cast<double>(*mx) / *mn;
}

Eigen::VectorXd SampleSet::mean(int j) const { return sample(j).colwise().mean().transpose(); }

Eigen::VectorXd SampleSet::stacked_means() const {
  Eigen::VectorXd m(k() * d());
  for (int j = 0; j < k(); ++j) m.segment(j * d(), d()) = mean(j);
  return m;
}

Eigen::MatrixXd SampleSet::covariance(int j) const {
  const Eigen::MatrixXd c = sample(j).rowwise() - mean(j).transpose();
  return (c.transpose() * c) / static_cast<double>(n(j));
}

std::vector<CumulantSet> SampleSet::resampling_cumulants(int max_order) const {
  std::vector<CumulantSet> out;
  for (const auto& s : samples_) out.push_back(sample_cumulants(s, max_order));
  return out;
}

SampleSet SampleSet::lifted(const SmoothStatistic& stat) const {
  if (!stat.lift) {
    if (d() != stat.d) throw std::invalid_argument("SampleSet::lifted: dimension does not match statistic");
    return *this;
  }
  std::vector<Eigen::MatrixXd> out;
  for (const auto& s : samples_) {
    Eigen::MatrixXd m(s.rows(), stat.d);
    for (Eigen::Index i = 0; i < s.rows(); ++i) m.row(i) = stat.lift_observation(s.row(i).transpose()).transpose();
    out.push_back(std::move(m));
  }
  return SampleSet(std::move(out), provenance_);
}

namespace {

void resample_mean(const Eigen::MatrixXd& s, StreamRng& rng, Eigen::Ref<Eigen::VectorXd> out) {
  const auto n = static_cast<std::uint64_t>(s.rows());
  out.setZero();
  for (std::uint64_t i = 0; i < n; ++i) out += s.row(static_cast<Eigen::Index>(rng.below(n))).transpose();
  out /= static_cast<double>(n);
}

}  // namespace

SampleSet resample(const SampleSet& sset, std::uint64_t seed) {
  std::vector<Eigen::MatrixXd> out;
  for (int j = 0; j < sset.k(); ++j) {
    StreamRng rng(seed, static_cast<std::uint64_t>(j));
    const Eigen::MatrixXd& s = sset.sample(j);
    Eigen::MatrixXd r(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      r.row(i) = s.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(s.rows()))));
    out.push_back(std::move(r));
  }
  return SampleSet(std::move(out), "resample");
}

Estimate BootstrapDistribution::probability(const Ball& b) const {
  if (b.dim() != q) throw std::invalid_argument("BootstrapDistribution::probability: region dimension mismatch");
  std::int64_t hits = 0;
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    if (contains(b, values.row(r).transpose())) ++hits;
  const double p = static_cast<double>(hits) / static_cast<double>(reps);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(reps))};
}

BootstrapDistribution bootstrap_distribution(const SmoothStatistic& stat, const SampleSet& sset,
                                             std::int64_t reps, std::uint64_t seed,
                                             const BootstrapOptions& options) {
  if (reps < 1) throw std::invalid_argument("bootstrap_distribution: reps must be >= 1");
  if (sset.k() != stat.k || sset.d() != stat.d)
    throw std::invalid_argument("bootstrap_distribution: sample set does not match statistic '" + stat.name + "'");
  if (options.standardizer && (options.standardizer->rows() != stat.q || options.standardizer->cols() != stat.q))
    throw std::invalid_argument("bootstrap_distribution: standardizer must be q x q");
  const Eigen::VectorXd anchors = sset.stacked_means();
  const double rn = std::sqrt(static_cast<double>(sset.total_n()));
  const int d = sset.d();

  BootstrapDistribution out;
  out.reps = reps;
  out.q = stat.q;
  out.seed = seed;
  out.values.resize(reps, stat.q);
  // Replicates are grouped in fixed chunks; replicate r always uses stream r.
  constexpr std::int64_t chunk = 1024;
  const std::int64_t nchunks = (reps + chunk - 1) / chunk;
  parallel_for(nchunks, options.jobs, [&](std::int64_t c) {
    Eigen::VectorXd xbar(stat.kd());
    for (std::int64_t r = c * chunk; r < std::min(reps, (c + 1) * chunk); ++r) {
      StreamRng rng(seed, static_cast<std::uint64_t>(r));
      for (int j = 0; j < sset.k(); ++j) resample_mean(sset.sample(j), rng, xbar.segment(j * d, d));
      Eigen::VectorXd v = rn * stat.evaluate(xbar, anchors);
      if (options.standardizer) v = *options.standardizer * v;
      out.values.row(r) = v.transpose();
    }
  });
  return out;
}

void for_each_composition(int n, const std::function<void(const std::vector<int>&, std::uint64_t)>& visit) {
  if (n < 1 || n > kMaxExactBootstrapSize)
    throw std::invalid_argument("exact enumeration supports 1 <= n <= " + std::to_string(kMaxExactBootstrapSize));
  std::uint64_t nfact = 1;
  for (int i = 2; i <= n; ++i) nfact *= static_cast<std::uint64_t>(i);
  std::vector<int> m(static_cast<std::size_t>(n), 0);
  std::function<void(int, int, std::uint64_t)> rec = [&](int pos, int left, std::uint64_t denom) {
    if (pos == n - 1) {
      m[static_cast<std::size_t>(pos)] = left;
      std::uint64_t f = 1;
      for (int i = 2; i <= left; ++i) f *= static_cast<std::uint64_t>(i);
      visit(m, nfact / (denom * f));
      return;
    }
    std::uint64_t f = 1;
    for (int c = 0; c <= left; ++c) {
      if (c > 1) f *= static_cast<std::uint64_t>(c);
      m[static_cast<std::size_t>(pos)] = c;
      rec(pos + 1, left - c, denom * f);
    }
  };
  rec(0, n, 1);
}

namespace {

std::uint64_t int_pow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Law of n^{-1/2} sum_i m_i z_i over compositions, as atoms.
ExactBootstrapLaw exact_sum_law(const Eigen::MatrixXd& atoms) {
  const int n = static_cast<int>(atoms.rows());
  ExactBootstrapLaw law;
  law.n = n;
  law.total = int_pow(static_cast<std::uint64_t>(n), n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for_each_composition(n, [&](const std::vector<int>& m, std::uint64_t mult) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(atoms.cols());
    for (int i = 0; i < n; ++i) v += m[static_cast<std::size_t>(i)] * atoms.row(i).transpose();
    law.atoms.push_back({scale * v, mult});
  });
  return law;
}

}  // namespace

std::uint64_t ExactBootstrapLaw::count(const Ball& b) const {
  std::uint64_t c = 0;
  for (const auto& a : atoms)
    if (contains(b, a.value)) c += a.count;
  return c;
}

double ExactBootstrapLaw::probability(const Ball& b) const {
  return static_cast<double>(count(b)) / static_cast<double>(total);
}

ExactBootstrapLaw exact_bootstrap_law(const SmoothStatistic& stat, const SampleSet& sset,
                                      const std::optional<Eigen::MatrixXd>& standardizer) {
  if (sset.k() != 1 || stat.k != 1) throw std::invalid_argument("exact_bootstrap_law: single sample only");
  if (sset.d() != stat.d) throw std::invalid_argument("exact_bootstrap_law: dimension mismatch");
  const int n = sset.n(0);
  if (n > kMaxExactBootstrapSize)
    throw std::invalid_argument("exact_bootstrap_law: n exceeds the enumeration cap of " +
                                std::to_string(kMaxExactBootstrapSize));
  const Eigen::MatrixXd& s = sset.sample(0);
  const Eigen::VectorXd anchors = sset.stacked_means();
  const double rn = std::sqrt(static_cast<double>(n));
  ExactBootstrapLaw law;
  law.n = n;
  law.total = int_pow(static_cast<std::uint64_t>(n), n);
  for_each_composition(n, [&](const std::vector<int>& m, std::uint64_t mult) {
    Eigen::VectorXd xbar = Eigen::VectorXd::Zero(s.cols());
    for (int i = 0; i < n; ++i) xbar += m[static_cast<std::size_t>(i)] * s.row(i).transpose();
    xbar /= static_cast<double>(n);
    Eigen::VectorXd v = rn * stat.evaluate(xbar, anchors);
    if (standardizer) v = *standardizer * v;
    law.atoms.push_back({std::move(v), mult});
  });
  return law;
}

std::vector<double> exact_bootstrap_cdf(const SmoothStatistic& stat, const SampleSet& sset,
                                        const std::vector<Ball>& grid) {
  const ExactBootstrapLaw law = exact_bootstrap_law(stat, sset);
  std::vector<double> out;
  for (const auto& b : grid) out.push_back(law.probability(b));
  return out;
}

Eigen::MatrixXd TruncationReport::vhat_full() const {
  const int d = static_cast<int>(vhat.front().rows());
  const int k = static_cast<int>(vhat.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k * d, k * d);
  for (int j = 0; j < k; ++j) m.block(j * d, j * d, d, d) = vhat[static_cast<std::size_t>(j)];
  return m;
}

Eigen::MatrixXd TruncationReport::vdagger_full() const {
  const int d = static_cast<int>(vdagger.front().rows());
  const int k = static_cast<int>(vdagger.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k * d, k * d);
  for (int j = 0; j < k; ++j) m.block(j * d, j * d, d, d) = vdagger[static_cast<std::size_t>(j)];
  return m;
}

TruncationReport truncate_and_center(const SampleSet& sset, const TruncationOptions& options) {
  TruncationReport rep;
  const int k = sset.k(), d = sset.d();
  const double n = sset.total_n();
  rep.threshold = options.threshold.value_or(std::sqrt(n));
  rep.a = Eigen::VectorXd(k * d);
  for (int j = 0; j < k; ++j) {
    const Eigen::MatrixXd vhat = sset.covariance(j);
    Eigen::MatrixXd inv_sqrt, sqrt_v;
    try {
      inv_sqrt = sym_inv_sqrt(vhat);
      sqrt_v = sym_sqrt(vhat);
    } catch (const std::domain_error&) {
      throw std::domain_error("truncate_and_center: singular sample covariance in sample " + std::to_string(j));
    }
    const int nj = sset.n(j);
    const Eigen::MatrixXd centered = sset.sample(j).rowwise() - sset.mean(j).transpose();
    Eigen::MatrixXd y = centered * inv_sqrt;  // inv_sqrt is symmetric
    int zeroed = 0;
    for (int i = 0; i < nj; ++i) {
      const double norm = y.row(i).norm();
      const bool keep = options.convention == TruncationConvention::keep_small ? norm <= rep.threshold
                                                                               : norm > rep.threshold;
      if (!keep) {
        y.row(i).setZero();
        ++zeroed;
      }
    }
    const Eigen::VectorXd ymean = y.colwise().mean().transpose();
    Eigen::MatrixXd dagger = y.rowwise() - ymean.transpose();
    rep.vhat.push_back(vhat);
    rep.vdagger.push_back((dagger.transpose() * dagger) / static_cast<double>(nj));
    rep.y_means.push_back(ymean);
    rep.y_atoms.push_back(std::move(y));
    rep.dagger_atoms.push_back(std::move(dagger));
    rep.truncation_fraction.push_back(static_cast<double>(zeroed) / nj);
    rep.a.segment(j * d, d) = -std::sqrt(n) * (sqrt_v * ymean);
  }
  return rep;
}

Estimate product_measure_eval(ProductMeasure which, const std::vector<Ball>& cylinder, const SampleSet& sset,
                              bool exact, const MCConfig& mc, const TruncationOptions& truncation) {
  const int k = sset.k();
  if (static_cast<int>(cylinder.size()) != k)
    throw std::invalid_argument("product_measure_eval: need one region per sample");
  for (const auto& b : cylinder)
    if (b.dim() != sset.d()) throw std::invalid_argument("product_measure_eval: region dimension mismatch");
  std::optional<TruncationReport> trunc;
  if (which == ProductMeasure::Qdagger) trunc = truncate_and_center(sset, truncation);

  std::vector<Estimate> factors;
  for (int j = 0; j < k; ++j) {
    const Ball& b = cylinder[static_cast<std::size_t>(j)];
    if (b.is_whole_space()) {
      factors.push_back({1.0, 0.0});
      continue;
    }
    const Eigen::MatrixXd atoms = which == ProductMeasure::Q
                                      ? Eigen::MatrixXd(sset.sample(j).rowwise() - sset.mean(j).transpose())
                                      : trunc->dagger_atoms[static_cast<std::size_t>(j)];
    if (exact) {
      if (atoms.rows() > kMaxExactBootstrapSize)
        throw std::invalid_argument("product_measure_eval: exact mode needs n_j <= " +
                                    std::to_string(kMaxExactBootstrapSize));
      factors.push_back({exact_sum_law(atoms).probability(b), 0.0});
      continue;
    }
    if (mc.samples < 1) throw std::invalid_argument("product_measure_eval: zero MC budget");
    const auto nj = static_cast<std::uint64_t>(atoms.rows());
    const double scale = 1.0 / std::sqrt(static_cast<double>(nj));
    const std::uint64_t key = derive_seed(mc.seed, static_cast<std::uint64_t>(j));
    const std::int64_t nblocks = (mc.samples + mc.block_size - 1) / mc.block_size;
    std::vector<std::int64_t> hits(static_cast<std::size_t>(nblocks), 0);
    parallel_for(nblocks, mc.jobs, [&](std::int64_t blk) {
      Eigen::VectorXd v(atoms.cols());
      std::int64_t h = 0;
      for (std::int64_t r = blk * mc.block_size; r < std::min(mc.samples, (blk + 1) * mc.block_size); ++r) {
        StreamRng rng(key, static_cast<std::uint64_t>(r));
        v.setZero();
        for (std::uint64_t i = 0; i < nj; ++i) v += atoms.row(static_cast<Eigen::Index>(rng.below(nj))).transpose();
        if (contains(b, scale * v)) ++h;
      }
      hits[static_cast<std::size_t>(blk)] = h;
    });
    std::int64_t total = 0;
    for (auto h : hits) total += h;
    const double p = static_cast<double>(total) / static_cast<double>(mc.samples);
    factors.push_back({p, std::sqrt(p * (1.0 - p) / static_cast<double>(mc.samples))});
  }
  double prod = 1.0;
  for (const auto& f : factors) prod *= f.value;
  double var = 0.0;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    double others = 1.0;
    for (std::size_t i = 0; i < factors.size(); ++i)
      if (i != j) others *= factors[i].value;
    var += others * others * factors[j].se * factors[j].se;
  }
  return {prod, std::sqrt(var)};
}

}  // namespace edgeboot
