#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace edgeboot {

/// Sorted index multiset identifying one entry of a symmetric tensor.
using IndexMultiset = std::vector<int>;

/// All sorted multisets of size `order` drawn from {0, ..., dim-1}.
std::vector<IndexMultiset> index_multisets(int dim, int order);

/// Number of distinct orderings of a sorted multiset (r! / prod m_i!).
double multiset_permutations(std::span<const int> sorted_indices);

/// One set partition of {0, ..., n-1}: a list of blocks of positions.
using SetPartition = std::vector<std::vector<int>>;

/// Every set partition of {0, ..., n-1}. Cached; n <= 12.
const std::vector<SetPartition>& set_partitions(int n);

/// Symmetric order-r tensor over d indices, stored once per sorted multiset.
class SymmetricTensor {
 public:
  SymmetricTensor() = default;
  SymmetricTensor(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }

  /// Any index order is accepted; indices are sorted before lookup.
  double at(std::span<const int> indices) const;
  void set(std::span<const int> indices, double value);

  const std::map<IndexMultiset, double>& entries() const { return entries_; }
  double max_abs() const;

  /// T'_{i1..ir} = sum_j M_{i1 j1} ... M_{ir jr} T_{j1..jr}; M is (dim' x dim).
  SymmetricTensor transformed(const Eigen::MatrixXd& M) const;

  /// Order-2 tensor as a dense matrix.
  Eigen::MatrixXd as_matrix() const;
  static SymmetricTensor from_matrix(const Eigen::MatrixXd& m);

 private:
  int dim_ = 0;
  int order_ = 0;
  std::map<IndexMultiset, double> entries_;
};

/// Moment or cumulant tensors of a d-variate law, orders 1..max_order.
class CumulantSet {
 public:
  enum class Kind { raw_moments, cumulants };

  CumulantSet() = default;
  CumulantSet(int dim, int max_order, Kind kind);

  int dim() const { return dim_; }
  int max_order() const { return static_cast<int>(tensors_.size()); }
  Kind kind() const { return kind_; }

  const SymmetricTensor& tensor(int order) const;
  SymmetricTensor& tensor(int order);

  double at(std::span<const int> indices) const;
  double at(std::initializer_list<int> indices) const;
  void set(std::span<const int> indices, double value);
  void set(std::initializer_list<int> indices, double value);

  /// Univariate convenience: entry (0,...,0) of the given order.
  double univariate(int order) const;

 private:
  int dim_ = 0;
  Kind kind_ = Kind::cumulants;
  std::vector<SymmetricTensor> tensors_;
};

/// Raw moments (1/n) sum_i prod_s (X_i - center)_{j_s}; rows of `sample` are observations.
CumulantSet empirical_moments(const Eigen::MatrixXd& sample, int max_order,
                              const std::optional<Eigen::VectorXd>& center = std::nullopt);

/// Set-partition (Moebius) inversion of moments about the origin.
CumulantSet moments_to_cumulants(const CumulantSet& moments);
/// Sum over set partitions of products of cumulants.
CumulantSet cumulants_to_moments(const CumulantSet& cumulants);

/// Cumulants of the empirical law of the rows of `sample` about its mean.
CumulantSet sample_cumulants(const Eigen::MatrixXd& sample, int max_order);

}  // namespace edgeboot
