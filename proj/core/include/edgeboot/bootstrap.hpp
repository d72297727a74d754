#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "edgeboot/parallel.hpp"
#include "edgeboot/regions.hpp"
#include "edgeboot/smooth_model.hpp"
#include "edgeboot/tensors.hpp"

namespace edgeboot {

/// k samples of d-vectors; sample j is an n_j x d matrix with n_j >= 2.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::vector<Eigen::MatrixXd> samples, std::string provenance = "external");

  int k() const { return static_cast<int>(samples_.size()); }
  int d() const { return static_cast<int>(samples_.front().cols()); }
  int n(int j) const { return static_cast<int>(samples_.at(static_cast<std::size_t>(j)).rows()); }
  std::vector<int> sizes() const;
  int total_n() const;
  double balance_ratio() const;
  const Eigen::MatrixXd& sample(int j) const { return samples_.at(static_cast<std::size_t>(j)); }
  const std::vector<Eigen::MatrixXd>& samples() const { return samples_; }
  const std::string& provenance() const { return provenance_; }

  Eigen::VectorXd mean(int j) const;
  /// Sample means stacked sample-major (length k*d).
  Eigen::VectorXd stacked_means() const;
  /// (1/n_j) sum (X - Xbar)(X - Xbar)^T.
  Eigen::MatrixXd covariance(int j) const;
  /// Cumulants of the resampling law of each sample (about its mean).
  std::vector<CumulantSet> resampling_cumulants(int max_order) const;

  /// Applies stat.lift to every observation.
  SampleSet lifted(const SmoothStatistic& stat) const;

 private:
  std::vector<Eigen::MatrixXd> samples_;
  std::string provenance_ = "external";
};

/// Sample j is drawn with stream j of `seed`.
SampleSet resample(const SampleSet& sset, std::uint64_t seed);

struct BootstrapDistribution {
  std::int64_t reps = 0;
  int q = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd values;  ///< reps x q

  /// Share of rows in b, with binomial standard error.
  Estimate probability(const Ball& b) const;
};

struct BootstrapOptions {
  int jobs = 1;
  /// Applied to each row (q x q) when present, e.g. W^{-1/2} from approximate_cumulants.
  std::optional<Eigen::MatrixXd> standardizer;
};

/// Rows n^{1/2} g(Xbar*; Xbar) with n = sum n_j; replicate r uses stream r of `seed`.
BootstrapDistribution bootstrap_distribution(const SmoothStatistic& stat, const SampleSet& sset,
                                             std::int64_t reps, std::uint64_t seed,
                                             const BootstrapOptions& options = {});

inline constexpr int kMaxExactBootstrapSize = 8;

/// Support point of an exactly enumerated bootstrap law; probability = count / n^n.
struct ExactAtom {
  Eigen::VectorXd value;
  std::uint64_t count = 0;
};

struct ExactBootstrapLaw {
  int n = 0;
  std::uint64_t total = 0;  ///< n^n
  std::vector<ExactAtom> atoms;

  /// Exact probability of b; sums over a partition are exactly 1.
  double probability(const Ball& b) const;
  std::uint64_t count(const Ball& b) const;
};

/// Calls visit(counts, multiplicity) for every composition of n into n parts;
/// multiplicity is n! / prod m_i!.
void for_each_composition(int n, const std::function<void(const std::vector<int>&, std::uint64_t)>& visit);

/// Exact law of n^{1/2} g(Xbar*; Xbar) for a single sample of size <= 8 (optionally standardized).
ExactBootstrapLaw exact_bootstrap_law(const SmoothStatistic& stat, const SampleSet& sset,
                                      const std::optional<Eigen::MatrixXd>& standardizer = std::nullopt);

std::vector<double> exact_bootstrap_cdf(const SmoothStatistic& stat, const SampleSet& sset,
                                        const std::vector<Ball>& grid);

enum class TruncationConvention {
  keep_small,  ///< keep the standardized atom when its norm <= threshold, else 0
  keep_large,  ///< keep it when its norm > threshold, else 0
};

struct TruncationOptions {
  TruncationConvention convention = TruncationConvention::keep_small;
  /// Norm threshold; defaults to n^{1/2} with n = sum n_j.
  std::optional<double> threshold;
};

struct TruncationReport {
  std::vector<Eigen::MatrixXd> vhat;      ///< per-sample covariance blocks
  std::vector<Eigen::MatrixXd> vdagger;   ///< covariance of X-dagger per sample
  std::vector<Eigen::VectorXd> y_means;   ///< E(Y_j | X_j), exact atom averages
  std::vector<Eigen::MatrixXd> y_atoms;   ///< truncated standardized atoms
  std::vector<Eigen::MatrixXd> dagger_atoms;  ///< Y - E(Y | X)
  Eigen::VectorXd a;                      ///< -n^{1/2} Vhat^{1/2} E(Y | X), stacked
  std::vector<double> truncation_fraction;
  double threshold = 0.0;

  Eigen::MatrixXd vhat_full() const;
  Eigen::MatrixXd vdagger_full() const;
};

/// Throws std::domain_error if some Vhat block is singular.
TruncationReport truncate_and_center(const SampleSet& sset, const TruncationOptions& options = {});

enum class ProductMeasure { Q, Qdagger };

/// prod_j P{ n_j^{-1/2} sum_i Z_ji in S_j } where Z = X* - Xbar (Q) or X-dagger (Qdagger).
/// exact=true enumerates compositions (every n_j <= 8); otherwise Monte Carlo with
/// mc.samples draws per factor. SE combines factor SEs to first order.
Estimate product_measure_eval(ProductMeasure which, const std::vector<Ball>& cylinder, const SampleSet& sset,
                              bool exact, const MCConfig& mc = {}, const TruncationOptions& truncation = {});

// CSV import/export: header "sample_id,x1,...,xd", one row per observation.
SampleSet read_sample_csv(std::istream& in);
SampleSet read_sample_csv(const std::string& path);
void write_sample_csv(std::ostream& out, const SampleSet& sset);
void write_sample_csv(const std::string& path, const SampleSet& sset);

}  // namespace edgeboot
