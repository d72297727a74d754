#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "edgeboot/diagnostics.hpp"

namespace edgeboot::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitOracle = 3;
inline constexpr int kExitThreshold = 4;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Sectioned key = value text. '#' and ';' start comments.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::string& path);

  const std::string& source() const { return source_; }
  bool has(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, const std::string& value);
  /// Canonical "section.key=value" lines, sorted; hashed into output metadata.
  std::string canonical() const;

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& section, const std::string& key,
                            const std::vector<int>& fallback) const;
  std::vector<std::string> get_list(const std::string& section, const std::string& key,
                                    const std::vector<std::string>& fallback) const;
  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const;

 private:
  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

std::uint64_t fnv1a64(const std::string& text);

/// Region list: half-lines for q = 1 and/or balls.
struct RegionSpec {
  std::vector<Ball> regions;
  std::vector<std::string> labels;
};

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::string output = "out";
  std::string config_hash;

  std::string population = "normal";
  int population_dim = 1;
  std::optional<double> population_param;

  std::string statistic = "mean";
  int statistic_dim = 1;
  std::vector<double> anchor;
  std::vector<double> ratios;  ///< sample-size proportions when k > 1

  int nu = 1;

  // compare
  std::vector<int> compare_n_grid{25, 50, 100};
  int replicates = 10;
  std::int64_t bootstrap_reps = 200000;
  std::string exact = "auto";
  std::int64_t edge_mc = 200000;
  std::optional<double> max_ratio;
  bool require_improvement = false;

  // rates
  std::vector<std::string> events{"e1", "e2", "e3"};
  std::vector<int> rates_n_grid{25, 50, 100, 200};
  std::int64_t event_reps = 2000;
  std::map<std::string, std::vector<double>> scales;
  std::vector<std::string> strict_events;
  std::vector<std::string> monotone_events;
  std::map<std::string, double> max_final;
  std::int64_t moment_mc = 1000000;

  // prop1
  std::vector<int> prop1_n_grid{100, 1000, 10000};
  double beta = 0.5;
  std::optional<double> b;
  std::int64_t prop1_samples = 1000000;
  bool check_monotone = true;

  // diagnose
  int diagnose_n = 100;
  std::string sample_file;
  std::int64_t e5_mc = 20000;

  // oracle
  std::int64_t oracle_mc = 1000000;
  std::int64_t oracle_boot_reps = 200000;

  EventConfig events_cfg;
  TruncationOptions truncation;  ///< used by the E4 event and diagnose
  RegionSpec regions;
};

/// Validates kind-specific settings; throws ConfigError naming the offending line.
ExperimentConfig build_experiment(const Config& cfg, std::optional<std::uint64_t> seed_override = std::nullopt);

struct RunOptions {
  std::string out_dir;  ///< empty: do not write files
  int jobs = 1;
};

struct CompareRow {
  int n = 0;
  int replicate = 0;
  int region = 0;
  Estimate boot;
  std::vector<double> edge;  ///< per order 0..nu
  std::vector<double> gap;   ///< |boot - edge|
};

struct CompareSummary {
  int n = 0;
  std::vector<double> median_sup_gap;  ///< per order 0..nu
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::vector<CompareSummary> summary;
  std::vector<double> ratios;  ///< top-order median gap at grid[i+1] / grid[i]
  double slope = 0.0;
  bool passed = true;
  std::vector<std::string> failures;
};

struct RatesResult {
  std::map<std::string, RateFit> fits;
  std::vector<std::string> errors;  ///< events whose fit failed (e.g. decay below MC resolution)
  bool cramer = true;
  bool passed = true;
  std::vector<std::string> failures;
};

struct Prop1Row {
  int n = 0;
  int region = 0;  ///< -1 for the supremum
  Estimate estimate;
  double scaled = 0.0;
  double scaled_se = 0.0;
};

struct Prop1RunResult {
  std::vector<Prop1Row> rows;
  double b = 0.0;
  std::optional<RateFit> sup_fit;
  bool passed = true;
  std::vector<std::string> failures;
};

struct DiagnoseResult {
  std::vector<std::pair<std::string, std::string>> entries;
};

struct OracleEntry {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct OracleReport {
  std::vector<OracleEntry> entries;
  bool passed() const;
};

CompareResult run_compare(const ExperimentConfig& cfg, const RunOptions& opts);
RatesResult run_rates(const ExperimentConfig& cfg, const RunOptions& opts);
Prop1RunResult run_prop1(const ExperimentConfig& cfg, const RunOptions& opts);
DiagnoseResult run_diagnose(const ExperimentConfig& cfg, const RunOptions& opts);
OracleReport run_oracle_suite(const ExperimentConfig& cfg, const RunOptions& opts);

/// Shortest round-trip text for a double.
std::string format_double(double v);

/// Dispatches on cfg.kind (or `kind` when given) and returns a process exit code.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);

}  // namespace edgeboot::harness
