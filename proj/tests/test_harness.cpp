#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "harness.hpp"

using namespace edgeboot::harness;

namespace {

Config parse(const std::string& text) {
  std::istringstream in(text);
  return Config::parse(in, "test.cfg");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("edgeboot_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

int error_line(const std::string& text) {
  try {
    build_experiment(parse(text));
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("config errors carry line numbers") {
  CHECK(error_line("[experiment]\nkind = oracle\nseed = 1\nsed = 2\n") == 4);
  CHECK(error_line("[experiment]\nkind = oracle\nseed = 1\n[bogus]\n") == 4);
  CHECK(error_line("[experiment]\nkind = oracle\n") == 0);  // seed is mandatory
  CHECK(error_line("[experiment]\nkind = rates\nseed = 1\n[rates]\nn_grid = 25,50\n") == 5);
  CHECK(error_line("[experiment]\nkind = compare\nseed = 1\n[expansion]\nnu = 3\n[regions]\nhalf_lines=0\n") == 5);
  CHECK(error_line("[experiment]\nkind = compare\nseed = 1\n[population]\ndim = 5\n[statistic]\nname = studentized_mean\n"
                   "dim = 5\n[regions]\nhalf_lines = 0\n") == 8);
  CHECK(error_line("[experiment]\nkind = compare\nseed = 1\n[statistic]\nname = mean_difference\nratios = 1, 150\n"
                   "[regions]\nhalf_lines = 0\n") == 6);
  CHECK(error_line("[experiment]\nkind = compare\nseed = 1\n[regions]\nhalf_lines = 0\n[compare]\nreplicates = x\n") == 7);
  CHECK_THROWS_AS(parse("[experiment]\nkind\n"), ConfigError);
}

TEST_CASE("config values") {
  const Config c = parse("# comment\n[regions]\nhalf_lines = -1:1:5 ; trailing\nballs = 0@1 | 2@inf\n[experiment]\nkind=compare\nseed=9\n");
  const ExperimentConfig x = build_experiment(c, 17);
  CHECK(x.seed == 17);
  CHECK(x.regions.regions.size() == 7);
  CHECK(x.regions.regions[4].threshold() == 1.0);
  CHECK(x.regions.regions[6].is_whole_space());
  CHECK(x.config_hash.size() == 16);
  CHECK(build_experiment(c).config_hash != x.config_hash);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("compare with the exact bootstrap is noise free") {
  const auto cfg = build_experiment(parse(
      "[experiment]\nkind=compare\nseed=4\n[population]\nname=exp\n[expansion]\nnu=1\n[regions]\nhalf_lines=-1:1:5\n"
      "[compare]\nn_grid=6\nreplicates=2\n"));
  const CompareResult a = run_compare(cfg, {});
  const CompareResult b = run_compare(cfg, {});
  REQUIRE(a.rows.size() == 10);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].boot.se == 0.0);
    CHECK(a.rows[i].boot.value == b.rows[i].boot.value);
    for (std::size_t o = 0; o < a.rows[i].gap.size(); ++o)
      CHECK(a.rows[i].gap[o] == std::abs(a.rows[i].boot.value - a.rows[i].edge[o]));
    CHECK(a.rows[i].boot.value >= 0.0);
    CHECK(a.rows[i].boot.value <= 1.0);
  }
}

TEST_CASE("compare at nu = 0 for a Gaussian population") {
  const auto cfg = build_experiment(parse(
      "[experiment]\nkind=compare\nseed=12\n[expansion]\nnu=0\n[regions]\nhalf_lines=-2:2:9\n"
      "[compare]\nn_grid=400\nreplicates=1\nbootstrap_reps=200000\n"));
  const CompareResult r = run_compare(cfg, {});
  double worst = 0.0;
  for (const auto& row : r.rows) worst = std::max(worst, row.gap[0] / std::max(row.boot.se, 1e-12));
  MESSAGE("largest gap in bootstrap SE units: " << worst);
  CHECK(worst <= 3.0);
}

TEST_CASE("rates output flags lattice populations") {
  const auto out = scratch("lattice");
  const auto cfg = build_experiment(parse(
      "[experiment]\nkind=rates\nseed=2\n[population]\nname=lattice\n[rates]\nevents=e2,e3\nn_grid=20,40,80\n"
      "replicates=200\n[events]\nC3=1.5\n"));
  const RatesResult r = run_rates(cfg, {out.string(), 1});
  CHECK_FALSE(r.cramer);
  CHECK(slurp(out / "rates_e2.csv").find("# cramer: false") != std::string::npos);
  CHECK(slurp(out / "rates_summary.csv").find("event,slope") != std::string::npos);
}

TEST_CASE("outputs do not depend on the worker count") {
  const std::string text =
      "[experiment]\nkind=compare\nseed=8\n[population]\nname=exp\n[regions]\nhalf_lines=-1:1:3\n"
      "[compare]\nn_grid=20,40\nreplicates=2\nbootstrap_reps=20000\n";
  const auto cfg = build_experiment(parse(text));
  const auto a = scratch("jobs1"), b = scratch("jobs3");
  run_compare(cfg, {a.string(), 1});
  run_compare(cfg, {b.string(), 3});
  for (const char* f : {"compare.csv", "compare_summary.csv", "compare.gp"}) CHECK(slurp(a / f) == slurp(b / f));

  const auto o1 = scratch("oracle1"), o2 = scratch("oracle2");
  const auto ocfg = build_experiment(parse("[experiment]\nkind=oracle\nseed=1\n[oracle]\nmc=100000\nboot_reps=50000\n"));
  std::ostringstream log;
  CHECK(run_experiment(ocfg, {o1.string(), 1}, log) == kExitOk);
  CHECK(run_experiment(ocfg, {o2.string(), 2}, log) == kExitOk);
  CHECK(slurp(o1 / "oracle.csv") == slurp(o2 / "oracle.csv"));
  CHECK(slurp(o1 / "oracle.csv").rfind("# edgeboot ", 0) == 0);
}

TEST_CASE("threshold failures map to exit code 4") {
  const auto cfg = build_experiment(parse(
      "[experiment]\nkind=compare\nseed=1\n[population]\nname=exp\n[regions]\nhalf_lines=0\n"
      "[compare]\nn_grid=10,20,40\nreplicates=1\nbootstrap_reps=2000\nmax_ratio=0.0001\n"));
  std::ostringstream log;
  CHECK(run_experiment(cfg, {}, log) == kExitThreshold);
  CHECK(log.str().find("threshold:") != std::string::npos);
}

TEST_CASE("diagnose and prop1 run") {
  const auto d = build_experiment(parse("[experiment]\nkind=diagnose\nseed=3\n[diagnose]\nn=60\ne5_mc=2000\n[events]\nmoment_mc=20000\n"));
  const DiagnoseResult dr = run_diagnose(d, {});
  bool found = false;
  for (const auto& [k, v] : dr.entries) found |= k == "e5";
  CHECK(found);

  const auto p = build_experiment(parse(
      "[experiment]\nkind=prop1\nseed=3\n[statistic]\nname=variance\nanchor=0.5,1.25\n[regions]\nhalf_lines=-2:2:20\n"
      "[prop1]\nn_grid=100,1000,10000\nsamples=200000\n"));
  const Prop1RunResult pr = run_prop1(p, {});
  CHECK(pr.b == doctest::Approx(2.0));
  CHECK(pr.passed);
}
