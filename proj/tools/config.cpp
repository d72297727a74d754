#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "harness.hpp"

namespace edgeboot::harness {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"experiment", {"kind", "seed", "output"}},
      {"population", {"name", "dim", "param"}},
      {"statistic", {"name", "dim", "anchor", "ratios"}},
      {"expansion", {"nu"}},
      {"regions", {"half_lines", "balls"}},
      {"compare", {"n_grid", "replicates", "bootstrap_reps", "exact", "edge_mc", "max_ratio", "require_improvement"}},
      {"events", {"C1", "C2", "C3", "u", "C", "m", "lambda", "e2_exponent", "moment_mc", "truncation"}},
      {"rates",
       {"events", "n_grid", "replicates", "scales_e1", "scales_e2", "scales_e3", "scales_e4", "scales_e5", "strict",
        "monotone", "max_final"}},
      {"prop1", {"n_grid", "beta", "b", "samples", "check_monotone"}},
      {"diagnose", {"n", "sample_file", "e5_mc"}},
      {"oracle", {"mc", "boot_reps"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(s);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  return out;
}

bool parse_number(const std::string& s, double& v) {
  if (s == "inf" || s == "+inf") {
    v = std::numeric_limits<double>::infinity();
    return true;
  }
  const char* b = s.data();
  if (!s.empty() && s[0] == '+') ++b;
  const auto res = std::from_chars(b, s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#;");
    const std::string body = trim(cut == std::string::npos ? line : line.substr(0, cut));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(source, lineno, "malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      if (!schema().count(section)) throw ConfigError(source, lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(source, lineno, "expected key = value");
    if (section.empty()) throw ConfigError(source, lineno, "key outside of any section");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!schema().at(section).count(key))
      throw ConfigError(source, lineno, "unknown key '" + key + "' in [" + section + "]");
    if (cfg.sections_[section].count(key))
      throw ConfigError(source, lineno, "duplicate key '" + key + "' in [" + section + "]");
    cfg.sections_[section][key] = {value, lineno};
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  return parse(in, path);
}

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  if (!schema().count(section) || !schema().at(section).count(key))
    throw ConfigError(source_, 0, "unknown key '" + key + "' in [" + section + "]");
  auto& e = sections_[section][key];
  e.value = value;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [sec, keys] : sections_)
    for (const auto& [k, e] : keys) out += sec + "." + k + "=" + e.value + "\n";
  return out;
}

void Config::fail(const std::string& section, const std::string& key, const std::string& what) const {
  const Entry* e = find(section, key);
  throw ConfigError(source_, e ? e->line : 0, "[" + section + "] " + key + ": " + what);
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key, std::int64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_number(e->value, v) || v != std::floor(v) || std::abs(v) > 9e15) fail(section, key, "expected an integer");
  return static_cast<std::int64_t>(v);
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_number(e->value, v)) fail(section, key, "expected a number");
  return v;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  fail(section, key, "expected true or false");
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto& cell : split(e->value, ',')) {
    double v = 0.0;
    if (!parse_number(cell, v)) fail(section, key, "bad number '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> Config::get_ints(const std::string& section, const std::string& key,
                                  const std::vector<int>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<int> out;
  for (const auto& cell : split(e->value, ',')) {
    double v = 0.0;
    if (!parse_number(cell, v) || v != std::floor(v) || std::abs(v) > 2e9)
      fail(section, key, "bad integer '" + cell + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::string> Config::get_list(const std::string& section, const std::string& key,
                                          const std::vector<std::string>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<std::string> out;
  for (const auto& cell : split(e->value, ','))
    if (!cell.empty()) out.push_back(cell);
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::vector<double> parse_half_lines(const Config& cfg) {
  const auto* e = cfg.find("regions", "half_lines");
  if (!e) return {};
  const auto parts = split(e->value, ':');
  if (parts.size() == 3) {
    double lo = 0, hi = 0, cnt = 0;
    if (!parse_number(parts[0], lo) || !parse_number(parts[1], hi) || !parse_number(parts[2], cnt) || cnt < 1 ||
        cnt != std::floor(cnt) || !(hi >= lo))
      cfg.fail("regions", "half_lines", "expected lo:hi:count");
    std::vector<double> out;
    const int c = static_cast<int>(cnt);
    for (int i = 0; i < c; ++i) out.push_back(c == 1 ? lo : lo + (hi - lo) * i / (c - 1));
    return out;
  }
  return cfg.get_doubles("regions", "half_lines", {});
}

std::vector<Ball> parse_balls(const Config& cfg, int q) {
  const auto* e = cfg.find("regions", "balls");
  if (!e) return {};
  std::vector<Ball> out;
  for (const auto& item : split(e->value, '|')) {
    const auto at = item.find('@');
    if (at == std::string::npos) cfg.fail("regions", "balls", "expected center@radius entries separated by '|'");
    std::vector<double> c;
    for (const auto& cell : split(item.substr(0, at), ',')) {
      double v = 0.0;
      if (!parse_number(cell, v)) cfg.fail("regions", "balls", "bad center coordinate '" + cell + "'");
      c.push_back(v);
    }
    double r = 0.0;
    if (!parse_number(trim(item.substr(at + 1)), r) || !(r > 0.0)) cfg.fail("regions", "balls", "bad radius");
    if (static_cast<int>(c.size()) != q)
      cfg.fail("regions", "balls", "ball center has " + std::to_string(c.size()) + " coordinates, statistic has q=" +
                                       std::to_string(q));
    if (std::isinf(r)) {
      out.push_back(Ball::whole_space(q));
    } else {
      out.push_back(Ball::sphere(Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())), r));
    }
  }
  return out;
}

void require_grid(const Config& cfg, const std::string& section, const std::vector<int>& grid, std::size_t min_len) {
  if (grid.size() < min_len)
    cfg.fail(section, "n_grid", "need at least " + std::to_string(min_len) + " grid points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 2) cfg.fail(section, "n_grid", "sample sizes must be >= 2");
    if (i > 0 && grid[i] <= grid[i - 1]) cfg.fail(section, "n_grid", "grid must be strictly increasing");
  }
}

}  // namespace

ExperimentConfig build_experiment(const Config& cfg, std::optional<std::uint64_t> seed_override) {
  ExperimentConfig x;
  const std::string& src = cfg.source();
  x.kind = cfg.get_string("experiment", "kind", "");
  static const std::set<std::string> kinds{"compare", "rates", "prop1", "diagnose", "oracle"};
  if (!kinds.count(x.kind)) {
    const auto* e = cfg.find("experiment", "kind");
    throw ConfigError(src, e ? e->line : 0, "experiment kind must be one of compare|rates|prop1|diagnose|oracle");
  }
  if (seed_override) {
    x.seed = *seed_override;
  } else {
    if (!cfg.has("experiment", "seed")) throw ConfigError(src, 0, "[experiment] seed is mandatory");
    const auto s = cfg.get_int("experiment", "seed", 0);
    if (s < 0) cfg.fail("experiment", "seed", "must be non-negative");
    x.seed = static_cast<std::uint64_t>(s);
  }
  x.output = cfg.get_string("experiment", "output", x.output);
  {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(cfg.canonical() + "seed=" + std::to_string(x.seed))));
    x.config_hash = buf;
  }

  x.population = cfg.get_string("population", "name", x.population);
  x.population_dim = static_cast<int>(cfg.get_int("population", "dim", 1));
  if (cfg.has("population", "param")) x.population_param = cfg.get_double("population", "param", 0.0);
  try {
    make_population(x.population, x.population_dim, x.population_param);
  } catch (const std::invalid_argument& ex) {
    cfg.fail("population", cfg.has("population", "name") ? "name" : "dim", ex.what());
  }

  x.statistic = cfg.get_string("statistic", "name", x.statistic);
  x.statistic_dim = static_cast<int>(cfg.get_int("statistic", "dim", x.population_dim));
  SmoothStatistic stat;
  try {
    stat = make_statistic(x.statistic, x.statistic_dim);
  } catch (const std::invalid_argument& ex) {
    cfg.fail("statistic", cfg.has("statistic", "name") ? "name" : "dim", ex.what());
  }
  if (stat.q > kMaxExpansionDim) cfg.fail("statistic", "dim", "output dimension q must be <= 4");
  x.anchor = cfg.get_doubles("statistic", "anchor", {});
  if (!x.anchor.empty() && static_cast<int>(x.anchor.size()) != stat.kd())
    cfg.fail("statistic", "anchor", "expected " + std::to_string(stat.kd()) + " coordinates");
  x.ratios = cfg.get_doubles("statistic", "ratios", std::vector<double>(static_cast<std::size_t>(stat.k), 1.0));
  if (static_cast<int>(x.ratios.size()) != stat.k)
    cfg.fail("statistic", "ratios", "expected one proportion per sample (k=" + std::to_string(stat.k) + ")");
  {
    const auto [mn, mx] = std::minmax_element(x.ratios.begin(), x.ratios.end());
    if (!(*mn > 0.0)) cfg.fail("statistic", "ratios", "proportions must be positive");
    if (*mx / *mn > 100.0) cfg.fail("statistic", "ratios", "sample sizes too unbalanced (max/min > 100)");
  }
  if (x.kind != "prop1" && x.kind != "oracle" && stat.raw_dim != x.population_dim)
    cfg.fail("population", "dim", "population dimension does not match statistic '" + x.statistic + "'");

  x.nu = static_cast<int>(cfg.get_int("expansion", "nu", x.nu));
  if (x.nu < 0 || x.nu > kMaxExpansionOrder) cfg.fail("expansion", "nu", "must be in [0, 2]");
  if ((x.kind == "rates" || x.kind == "diagnose") && x.nu < 1) cfg.fail("expansion", "nu", "must be >= 1 here");

  // regions
  const int q = stat.q;
  const auto hl = parse_half_lines(cfg);
  if (!hl.empty() && q != 1) cfg.fail("regions", "half_lines", "half-lines need q = 1");
  for (double t : hl) {
    x.regions.regions.push_back(Ball::half_line(t));
    x.regions.labels.push_back("(-inf," + format_double(t) + "]");
  }
  for (const auto& b : parse_balls(cfg, q)) {
    x.regions.regions.push_back(b);
    x.regions.labels.push_back(b.describe());
  }

  // compare
  x.compare_n_grid = cfg.get_ints("compare", "n_grid", x.compare_n_grid);
  x.replicates = static_cast<int>(cfg.get_int("compare", "replicates", x.replicates));
  x.bootstrap_reps = cfg.get_int("compare", "bootstrap_reps", x.bootstrap_reps);
  x.exact = cfg.get_string("compare", "exact", x.exact);
  x.edge_mc = cfg.get_int("compare", "edge_mc", x.edge_mc);
  if (cfg.has("compare", "max_ratio")) x.max_ratio = cfg.get_double("compare", "max_ratio", 0.0);
  x.require_improvement = cfg.get_bool("compare", "require_improvement", false);
  if (x.kind == "compare") {
    require_grid(cfg, "compare", x.compare_n_grid, 1);
    if (x.replicates < 1) cfg.fail("compare", "replicates", "must be >= 1");
    if (x.bootstrap_reps < 1) cfg.fail("compare", "bootstrap_reps", "must be >= 1");
    if (x.exact != "auto" && x.exact != "true" && x.exact != "false") cfg.fail("compare", "exact", "auto|true|false");
    if (x.regions.regions.empty()) throw ConfigError(src, 0, "[regions] compare needs half_lines or balls");
    if (x.exact == "true" && (stat.k != 1 || x.compare_n_grid.back() > kMaxExactBootstrapSize))
      cfg.fail("compare", "exact", "exact mode needs k = 1 and n <= 8");
  }

  // events
  EventConfig& ev = x.events_cfg;
  ev.C1 = cfg.get_double("events", "C1", ev.C1);
  ev.C2 = cfg.get_double("events", "C2", ev.C2);
  ev.C3 = cfg.get_double("events", "C3", ev.C3);
  ev.u = cfg.get_double("events", "u", ev.u);
  ev.C = cfg.get_double("events", "C", ev.C);
  ev.m = static_cast<int>(cfg.get_int("events", "m", ev.m));
  ev.lambda = cfg.get_double("events", "lambda", ev.lambda);
  ev.nu = std::max(1, x.nu);
  ev.d = x.population_dim;
  const std::string e2x = cfg.get_string("events", "e2_exponent", "display");
  if (e2x == "display") {
    ev.e2_exponent = E2Exponent::display;
  } else if (e2x == "lemma") {
    ev.e2_exponent = E2Exponent::lemma;
  } else {
    cfg.fail("events", "e2_exponent", "display|lemma");
  }
  x.moment_mc = cfg.get_int("events", "moment_mc", x.moment_mc);
  const std::string trunc = cfg.get_string("events", "truncation", "keep_small");
  if (trunc == "keep_small") {
    x.truncation.convention = TruncationConvention::keep_small;
  } else if (trunc == "keep_large") {
    x.truncation.convention = TruncationConvention::keep_large;
  } else {
    cfg.fail("events", "truncation", "keep_small|keep_large");
  }
  if (x.kind == "rates" || x.kind == "diagnose") {
    EventConfig probe = ev;
    if (probe.C2 <= 0.0) probe.C2 = 1.0;
    try {
      probe.validate();
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(src, 0, std::string("[events] ") + ex.what());
    }
  }

  // rates
  x.events = cfg.get_list("rates", "events", x.events);
  x.rates_n_grid = cfg.get_ints("rates", "n_grid", x.rates_n_grid);
  x.event_reps = cfg.get_int("rates", "replicates", x.event_reps);
  x.scales = {{"e1", {}}, {"e2", {1.5, 2.0}}, {"e3", {1.5, 2.0}}, {"e4", {}}, {"e5", {}}};
  for (auto& [ev_name, sc] : x.scales) sc = cfg.get_doubles("rates", "scales_" + ev_name, sc);
  x.strict_events = cfg.get_list("rates", "strict", {});
  x.monotone_events = cfg.get_list("rates", "monotone", {});
  for (const auto& item : cfg.get_list("rates", "max_final", {})) {
    const auto c = item.find(':');
    double v = 0.0;
    if (c == std::string::npos || !parse_number(trim(item.substr(c + 1)), v))
      cfg.fail("rates", "max_final", "expected event:value entries");
    x.max_final[trim(item.substr(0, c))] = v;
  }
  if (x.kind == "rates") {
    require_grid(cfg, "rates", x.rates_n_grid, 3);
    if (x.event_reps < 2) cfg.fail("rates", "replicates", "must be >= 2");
    static const std::set<std::string> known{"e1", "e2", "e3", "e4", "e5"};
    for (const auto& list : {x.events, x.strict_events, x.monotone_events})
      for (const auto& e : list)
        if (!known.count(e)) cfg.fail("rates", "events", "unknown event '" + e + "'");
    for (const auto& [e, v] : x.max_final)
      if (!known.count(e)) cfg.fail("rates", "max_final", "unknown event '" + e + "'");
    for (const auto& [e, sc] : x.scales)
      for (double s : sc)
        if (!(s > 0.0)) cfg.fail("rates", "scales_" + e, "scales must be positive");
  }

  // prop1
  x.prop1_n_grid = cfg.get_ints("prop1", "n_grid", x.prop1_n_grid);
  x.beta = cfg.get_double("prop1", "beta", x.beta);
  if (cfg.has("prop1", "b")) x.b = cfg.get_double("prop1", "b", 0.0);
  x.prop1_samples = cfg.get_int("prop1", "samples", x.prop1_samples);
  x.check_monotone = cfg.get_bool("prop1", "check_monotone", x.check_monotone);
  if (x.kind == "prop1") {
    require_grid(cfg, "prop1", x.prop1_n_grid, 3);
    if (!(x.beta > 0.0)) cfg.fail("prop1", "beta", "must be positive");
    if (x.b && !(*x.b > 0.0)) cfg.fail("prop1", "b", "must be positive");
    if (x.prop1_samples < 1) cfg.fail("prop1", "samples", "must be >= 1");
    if (x.regions.regions.empty()) throw ConfigError(src, 0, "[regions] prop1 needs half_lines or balls");
    if (x.anchor.empty()) throw ConfigError(src, 0, "[statistic] prop1 needs an anchor");
  }

  // diagnose
  x.diagnose_n = static_cast<int>(cfg.get_int("diagnose", "n", x.diagnose_n));
  x.sample_file = cfg.get_string("diagnose", "sample_file", "");
  x.e5_mc = cfg.get_int("diagnose", "e5_mc", x.e5_mc);
  if (x.kind == "diagnose" && x.diagnose_n < x.population_dim + 1) cfg.fail("diagnose", "n", "need n >= d + 1");

  x.oracle_mc = cfg.get_int("oracle", "mc", x.oracle_mc);
  x.oracle_boot_reps = cfg.get_int("oracle", "boot_reps", x.oracle_boot_reps);
  return x;
}

}  // namespace edgeboot::harness
