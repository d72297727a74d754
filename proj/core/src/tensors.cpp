#include "edgeboot/tensors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace edgeboot {

namespace {

void multisets_rec(int dim, int order, int start, IndexMultiset& cur,
                   std::vector<IndexMultiset>& out) {
  if (static_cast<int>(cur.size()) == order) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < dim; ++i) {
    cur.push_back(i);
    multisets_rec(dim, order, i, cur, out);
    cur.pop_back();
  }
}

std::vector<SetPartition> build_partitions(int n) {
  std::vector<SetPartition> out;
  if (n == 0) {
    out.emplace_back();
    return out;
  }
  // Restricted growth strings a[0]=0, a[i] <= 1 + max(a[0..i-1]).
  std::vector<int> a(n, 0);
  while (true) {
    int nblocks = *std::max_element(a.begin(), a.end()) + 1;
    SetPartition p(nblocks);
    for (int i = 0; i < n; ++i) p[a[i]].push_back(i);
    out.push_back(std::move(p));

    int i = n - 1;
    for (; i > 0; --i) {
      int mx = *std::max_element(a.begin(), a.begin() + i);
      if (a[i] <= mx) {
        ++a[i];
        std::fill(a.begin() + i + 1, a.end(), 0);
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<IndexMultiset> index_multisets(int dim, int order) {
  std::vector<IndexMultiset> out;
  IndexMultiset cur;
  multisets_rec(dim, order, 0, cur, out);
  return out;
}

double multiset_permutations(std::span<const int> sorted_indices) {
  double r = factorial(static_cast<int>(sorted_indices.size()));
  std::size_t i = 0;
  while (i < sorted_indices.size()) {
    std::size_t j = i;
    while (j < sorted_indices.size() && sorted_indices[j] == sorted_indices[i]) ++j;
    r /= factorial(static_cast<int>(j - i));
    i = j;
  }
  return r;
}

const std::vector<SetPartition>& set_partitions(int n) {
  constexpr int kMax = 12;
  if (n < 0 || n > kMax) throw std::invalid_argument("set_partitions: size out of range");
  static std::array<std::vector<SetPartition>, kMax + 1> cache;
  static std::array<std::once_flag, kMax + 1> flags;
  std::call_once(flags[n], [n] { cache[n] = build_partitions(n); });
  return cache[n];
}

SymmetricTensor::SymmetricTensor(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1 || order < 0) throw std::invalid_argument("SymmetricTensor: bad shape");
}

double SymmetricTensor::at(std::span<const int> indices) const {
  if (static_cast<int>(indices.size()) != order_)
    throw std::invalid_argument("SymmetricTensor::at: wrong number of indices");
  IndexMultiset key(indices.begin(), indices.end());
  std::sort(key.begin(), key.end());
  auto it = entries_.find(key);
  return it == entries_.end() ? 0.0 : it->second;
}

void SymmetricTensor::set(std::span<const int> indices, double value) {
  if (static_cast<int>(indices.size()) != order_)
    throw std::invalid_argument("SymmetricTensor::set: wrong number of indices");
  IndexMultiset key(indices.begin(), indices.end());
  for (int i : key)
    if (i < 0 || i >= dim_) throw std::out_of_range("SymmetricTensor::set: index out of range");
  std::sort(key.begin(), key.end());
  if (value == 0.0)
    entries_.erase(key);
  else
    entries_[key] = value;
}

double SymmetricTensor::max_abs() const {
  double m = 0.0;
  for (const auto& [k, v] : entries_) m = std::max(m, std::abs(v));
  return m;
}

SymmetricTensor SymmetricTensor::transformed(const Eigen::MatrixXd& M) const {
  if (M.cols() != dim_) throw std::invalid_argument("SymmetricTensor::transformed: shape mismatch");
  const int out_dim = static_cast<int>(M.rows());
  SymmetricTensor out(out_dim, order_);
  for (const auto& key : index_multisets(out_dim, order_)) {
    double sum = 0.0;
    for (const auto& [src, value] : entries_) {
      // Sum over the distinct orderings of src paired with key positions.
      IndexMultiset perm = src;
      do {
        double w = value;
        for (int s = 0; s < order_; ++s) w *= M(key[s], perm[s]);
        sum += w;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    out.set(key, sum);
  }
  return out;
}

Eigen::MatrixXd SymmetricTensor::as_matrix() const {
  if (order_ != 2) throw std::logic_error("SymmetricTensor::as_matrix: order must be 2");
  Eigen::MatrixXd m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = at(std::array<int, 2>{i, j});
  return m;
}

SymmetricTensor SymmetricTensor::from_matrix(const Eigen::MatrixXd& m) {
  const int d = static_cast<int>(m.rows());
  SymmetricTensor t(d, 2);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) t.set(std::array<int, 2>{i, j}, 0.5 * (m(i, j) + m(j, i)));
  return t;
}

CumulantSet::CumulantSet(int dim, int max_order, Kind kind) : dim_(dim), kind_(kind) {
  if (dim < 1) throw std::invalid_argument("CumulantSet: dimension must be positive");
  if (max_order < 1) throw std::invalid_argument("CumulantSet: max_order must be >= 1");
  for (int r = 1; r <= max_order; ++r) tensors_.emplace_back(dim, r);
}

const SymmetricTensor& CumulantSet::tensor(int order) const {
  if (order < 1 || order > max_order()) throw std::out_of_range("CumulantSet: order out of range");
  return tensors_[order - 1];
}

SymmetricTensor& CumulantSet::tensor(int order) {
  if (order < 1 || order > max_order()) throw std::out_of_range("CumulantSet: order out of range");
  return tensors_[order - 1];
}

double CumulantSet::at(std::span<const int> indices) const {
  return tensor(static_cast<int>(indices.size())).at(indices);
}

double CumulantSet::at(std::initializer_list<int> indices) const {
  return at(std::span<const int>(indices.begin(), indices.size()));
}

void CumulantSet::set(std::span<const int> indices, double value) {
  tensor(static_cast<int>(indices.size())).set(indices, value);
}

void CumulantSet::set(std::initializer_list<int> indices, double value) {
  set(std::span<const int>(indices.begin(), indices.size()), value);
}

double CumulantSet::univariate(int order) const {
  std::vector<int> idx(order, 0);
  return at(idx);
}

CumulantSet empirical_moments(const Eigen::MatrixXd& sample, int max_order,
                              const std::optional<Eigen::VectorXd>& center) {
  if (sample.rows() < 1) throw std::invalid_argument("empirical_moments: empty sample");
  if (max_order < 1) throw std::invalid_argument("empirical_moments: max_order must be >= 1");
  const int d = static_cast<int>(sample.cols());
  if (center && center->size() != d)
    throw std::invalid_argument("empirical_moments: center dimension mismatch");

  Eigen::MatrixXd y = sample;
  if (center) y.rowwise() -= center->transpose();
  const double n = static_cast<double>(sample.rows());

  CumulantSet out(d, max_order, CumulantSet::Kind::raw_moments);
  for (int r = 1; r <= max_order; ++r) {
    for (const auto& key : index_multisets(d, r)) {
      Eigen::ArrayXd prod = Eigen::ArrayXd::Ones(y.rows());
      for (int j : key) prod *= y.col(j).array();
      out.set(key, prod.sum() / n);
    }
  }
  return out;
}

namespace {

// Shared partition sum: f(block) is the source tensor entry for the indices
// in the block, weight(nblocks) the coefficient for a partition.
template <class Weight>
CumulantSet partition_transform(const CumulantSet& in, CumulantSet::Kind out_kind,
                                Weight weight) {
  const int d = in.dim();
  CumulantSet out(d, in.max_order(), out_kind);
  std::vector<int> block_idx;
  for (int r = 1; r <= in.max_order(); ++r) {
    const auto& parts = set_partitions(r);
    for (const auto& key : index_multisets(d, r)) {
      double sum = 0.0;
      for (const auto& p : parts) {
        double prod = weight(static_cast<int>(p.size()));
        for (const auto& block : p) {
          block_idx.clear();
          for (int pos : block) block_idx.push_back(key[pos]);
          prod *= in.at(block_idx);
          if (prod == 0.0) break;
        }
        sum += prod;
      }
      out.set(key, sum);
    }
  }
  return out;
}

}  // namespace

CumulantSet moments_to_cumulants(const CumulantSet& moments) {
  if (moments.max_order() < 2)
    throw std::invalid_argument("moments_to_cumulants: max_order must be >= 2");
  return partition_transform(moments, CumulantSet::Kind::cumulants, [](int nblocks) {
    const double sign = (nblocks % 2 == 1) ? 1.0 : -1.0;
    return sign * factorial(nblocks - 1);
  });
}

CumulantSet cumulants_to_moments(const CumulantSet& cumulants) {
  if (cumulants.max_order() < 2)
    throw std::invalid_argument("cumulants_to_moments: max_order must be >= 2");
  return partition_transform(cumulants, CumulantSet::Kind::raw_moments, [](int) { return 1.0; });
}

CumulantSet sample_cumulants(const Eigen::MatrixXd& sample, int max_order) {
  const Eigen::VectorXd mean = sample.colwise().mean().transpose();
  CumulantSet k = moments_to_cumulants(empirical_moments(sample, std::max(2, max_order), mean));
  // Mean is zero about the sample mean; keep it explicit to avoid round-off noise.
  for (int j = 0; j < k.dim(); ++j) k.set({j}, 0.0);
  return k;
}

}  // namespace edgeboot
