#pragma once

#include <cstdint>
#include <functional>
#include <limits>

namespace edgeboot {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key for stream `index` under `master`; distinct (master, index) pairs give
/// statistically independent streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Counter-based generator: output k of a stream is mix(key + k * gamma).
/// Satisfies UniformRandomBitGenerator.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t master, std::uint64_t stream) : state_(derive_seed(master, stream)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by multiply-shift with rejection (unbiased).
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller; both variates of a pair are used.
  double normal();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Worker count used when a caller passes jobs <= 0.
int default_jobs();

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Work is handed out
/// in index order; callers write results by index so output never depends on jobs.
void parallel_for(std::int64_t count, int jobs, const std::function<void(std::int64_t)>& body);

/// Monte Carlo budget shared by the integration routines.
struct MCConfig {
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  int jobs = 1;
  /// Fixed block size; block b always uses stream b, so results are independent of jobs.
  std::int64_t block_size = 8192;
};

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

}  // namespace edgeboot
