// Acceptance runner: one PASS/FAIL line per criterion. `edgeboot_acceptance AC3` runs a single one.
#include <boost/math/special_functions/gamma.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "edgeboot/diagnostics.hpp"
#include "edgeboot/linalg.hpp"
#include "harness.hpp"

using namespace edgeboot;
namespace h = edgeboot::harness;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

h::ExperimentConfig experiment(const std::string& text) {
  std::istringstream in(text);
  return h::build_experiment(h::Config::parse(in, "acceptance"));
}

std::string fmt(double v) { return h::format_double(v); }

// AC1
Outcome cumulant_round_trip() {
  StreamRng rng(101, 0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + static_cast<int>(rng.below(3));
    const int order = 2 + static_cast<int>(rng.below(5));
    // moments of a random discrete law, so the input is a valid moment sequence
    Eigen::MatrixXd atoms(6, d);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < d; ++j) atoms(i, j) = 0.5 + rng.normal();
    const CumulantSet m = empirical_moments(atoms, order);
    const CumulantSet back = cumulants_to_moments(moments_to_cumulants(m));
    for (int r = 1; r <= order; ++r)
      for (const auto& idx : index_multisets(d, r)) worst = std::max(worst, std::abs(back.tensor(r).at(idx) - m.tensor(r).at(idx)));
  }
  return {worst <= 1e-10, "max abs error " + fmt(worst)};
}

// AC2
Outcome expansion_structure() {
  StreamRng rng(202, 0);
  bool ok = true;
  std::string why;
  double worst_gauss = 0.0, worst_z = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int q = 1 + static_cast<int>(rng.below(3));
    const int nu = 1 + static_cast<int>(rng.below(2));
    Eigen::MatrixXd a(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) a(i, j) = rng.normal();
    const Eigen::MatrixXd V = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(q, q);
    CumulantSet c(q, nu + 3, CumulantSet::Kind::cumulants);
    for (int r = 3; r <= nu + 3; ++r)
      for (const auto& idx : index_multisets(q, r)) c.set(idx, rng.normal());
    const EdgeworthExpansion e = build_expansion(c, V, nu);

    for (int j = 1; j <= nu; ++j) {
      const auto& p = e.polynomial(j);
      if (!p.has_parity(j % 2 ? -1 : 1)) ok = false, why = "parity";
      if (p.degree() > 3 * j) ok = false, why = "degree";

      // changing cumulants of order > j + 2 leaves Pcheck_j untouched; order j + 2 changes it
      CumulantSet high = c, top = c;
      for (int r = j + 3; r <= nu + 3; ++r)
        for (const auto& idx : index_multisets(q, r)) high.set(idx, c.tensor(r).at(idx) + 1.0);
      for (const auto& idx : index_multisets(q, j + 2)) top.set(idx, c.tensor(j + 2).at(idx) + 1.0);
      if (!(build_expansion(high, V, nu).polynomial(j) == p)) ok = false, why = "higher-order dependence";
      if (build_expansion(top, V, nu).polynomial(j) == p) ok = false, why = "missing order j+2 dependence";

      MCConfig mc;
      mc.samples = 1000000;
      mc.seed = derive_seed(202, static_cast<std::uint64_t>(10 * t + j));
      const Estimate z = signed_measure(e, j, Ball::whole_space(q), mc);
      worst_z = std::max(worst_z, std::abs(z.value) / z.se);
      if (std::abs(z.value) > 3.0 * z.se) ok = false, why = "nonzero total mass";
    }

    CumulantSet g(q, nu + 2, CumulantSet::Kind::cumulants);
    const EdgeworthExpansion ge = build_expansion(g, V, nu);
    for (int j = 1; j <= nu; ++j) worst_gauss = std::max(worst_gauss, ge.polynomial(j).max_abs_coefficient());
  }
  if (worst_gauss >= 1e-12) ok = false, why = "gaussian input";
  return {ok, (ok ? std::string() : "failed: " + why + "; ") + "max |mass|/SE " + fmt(worst_z) +
                  ", gaussian max coeff " + fmt(worst_gauss)};
}

// AC3
Outcome edgeworth_vs_gamma() {
  const EdgeworthExpansion e = build_expansion(make_population("exp").cumulants(4), Eigen::MatrixXd::Identity(1, 1), 1);
  std::vector<RatePoint> pts;
  std::string detail;
  for (int n : {10, 20, 40, 80, 160}) {
    double err = 0.0;
    for (int i = 0; i <= 240; ++i) {
      const double x = -3.0 + 6.0 * i / 240.0;
      const double arg = n + x * std::sqrt(static_cast<double>(n));
      const double exact = arg <= 0.0 ? 0.0 : boost::math::gamma_p(static_cast<double>(n), arg);
      err = std::max(err, std::abs(exact - expansion_probability_quadrature(e, Ball::half_line(x), n)));
    }
    pts.push_back({n, {err, 0.0}, false});
    detail += "e(" + std::to_string(n) + ")=" + fmt(err) + " ";
  }
  const double slope = rate_fit(pts).slope;
  return {slope >= -1.3 && slope <= -0.7, detail + "slope " + fmt(slope)};
}

// AC4
Outcome exact_bootstrap() {
  StreamRng rng(404, 0);
  const SampleSet s({make_population("exp").sample(6, rng)});
  const SmoothStatistic mean = make_statistic("mean", 1);
  const ExactBootstrapLaw law = exact_bootstrap_law(mean, s);
  const BootstrapDistribution mc = bootstrap_distribution(mean, s, 200000, 4040);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& a : law.atoms) {
    lo = std::min(lo, a.value(0));
    hi = std::max(hi, a.value(0));
  }
  double gap = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Ball b = Ball::half_line(lo + (hi - lo) * i / 19.0);
    gap = std::max(gap, std::abs(law.probability(b) - mc.probability(b).value));
  }
  return {gap <= 0.006, "sup gap " + fmt(gap)};
}

// AC5
Outcome expansion_error_rates() {
  const auto cfg = experiment(
      "[experiment]\nkind=compare\nseed=7\n[population]\nname=exp\n[statistic]\nname=mean\n[expansion]\nnu=1\n"
      "[regions]\nhalf_lines=-2.5:2.5:21\n[compare]\nn_grid=25,50,100\nreplicates=10\nbootstrap_reps=200000\n"
      "max_ratio=0.75\nrequire_improvement=true\n");
  const h::CompareResult r = h::run_compare(cfg, {});
  std::string detail;
  for (const auto& s : r.summary)
    detail += "n=" + std::to_string(s.n) + " gap0=" + fmt(s.median_sup_gap[0]) + " gap1=" + fmt(s.median_sup_gap[1]) + "; ";
  detail += "ratios";
  for (double x : r.ratios) detail += " " + fmt(x);
  for (const auto& f : r.failures) detail += "; " + f;
  return {r.passed, detail};
}

// AC6
Outcome prop1_shape() {
  const auto cfg = experiment(
      "[experiment]\nkind=prop1\nseed=3\n[statistic]\nname=variance\nanchor=0.5,1.25\n[expansion]\nnu=1\n"
      "[regions]\nhalf_lines=-2:2:20\n[prop1]\nn_grid=100,1000,10000\nbeta=0.5\nb=2\nsamples=1000000\n");
  const h::Prop1RunResult r = h::run_prop1(cfg, {});
  std::string detail;
  for (const auto& row : r.rows)
    if (row.region < 0) detail += "n=" + std::to_string(row.n) + " scaled=" + fmt(row.scaled) + "+-" + fmt(row.scaled_se) + " ";
  for (const auto& f : r.failures) detail += "; " + f;
  return {r.passed && r.rows.size() == 3 * 21, detail};
}

// AC7
Outcome lemma1() {
  StreamRng rng(707, 0);
  double worst = INFINITY;
  int done = 0;
  while (done < 1000) {
    const int q = 1 + static_cast<int>(rng.below(3));
    const int d = q + 1 + static_cast<int>(rng.below(3));
    Eigen::MatrixXd vs(q, d);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < d; ++j) vs(i, j) = rng.normal();
    if (!is_spd(vs * vs.transpose())) continue;
    worst = std::min(worst, lemma1_select(vs).lambda_min);
    ++done;
  }
  return {worst > 1e-12, "smallest lambda_min " + fmt(worst)};
}

// AC8
Outcome boundary_mass() {
  const Ball unit = Ball::sphere(Eigen::VectorXd::Zero(2), 1.0);
  std::vector<double> ratios;
  std::string detail;
  for (double eps : {0.02, 0.01, 0.005}) {
    MCConfig mc;
    mc.samples = 1000000;
    mc.seed = derive_seed(808, static_cast<std::uint64_t>(eps * 1e4));
    const Estimate m = gaussian_boundary_mass(unit, Eigen::MatrixXd::Identity(2, 2), eps, mc);
    ratios.push_back(m.value / eps);
    detail += "mass/eps(" + fmt(eps) + ")=" + fmt(m.value / eps) + " ";
  }
  double mean = 0.0;
  for (double r : ratios) mean += r / 3.0;
  bool ok = true;
  for (double r : ratios) ok = ok && std::abs(r / mean - 1.0) <= 0.15;
  return {ok, detail};
}

// AC9
Outcome event_rates() {
  const auto cfg = experiment(
      "[experiment]\nkind=rates\nseed=11\n[population]\nname=normal\n[expansion]\nnu=1\n[events]\nC3=4\n"
      "[rates]\nevents=e1,e2,e3\nn_grid=25,50,100,200\nreplicates=2000\nstrict=e3\nmax_final=e3:0.01\n");
  const h::RatesResult r = h::run_rates(cfg, {});
  bool ok = r.passed;
  std::string detail;
  for (const auto& name : {"e1", "e2", "e3"}) {
    const auto& pts = r.fits.at(name).points;
    detail += std::string(name) + ":";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      detail += " " + fmt(pts[i].estimate.value);
      if (i > 0 && pts[i].estimate.value > pts[i - 1].estimate.value) ok = false;
    }
    if (!(pts.back().estimate.value < pts.front().estimate.value)) ok = false;
    detail += "; ";
  }
  for (const auto& f : r.failures) detail += f + "; ";
  return {ok, detail};
}

// AC10
Outcome determinism() {
  const std::vector<std::string> configs{
      "[experiment]\nkind=compare\nseed=10\n[population]\nname=exp\n[regions]\nhalf_lines=-2:2:9\n"
      "[compare]\nn_grid=6,25,50\nreplicates=2\nbootstrap_reps=50000\nedge_mc=20000\n",
      "[experiment]\nkind=compare\nseed=10\n[population]\nname=normal\ndim=2\n[statistic]\nname=studentized_mean\ndim=2\n"
      "[regions]\nballs=0,0@1|0.5,0@2\n[compare]\nn_grid=30\nreplicates=1\nbootstrap_reps=20000\nedge_mc=50000\n",
      "[experiment]\nkind=rates\nseed=10\n[population]\nname=exp\n[rates]\nevents=e1,e2,e3,e4,e5\n"
      "n_grid=20,40,80\nreplicates=100\n[diagnose]\ne5_mc=500\n[events]\nmoment_mc=100000\n",
      "[experiment]\nkind=prop1\nseed=10\n[statistic]\nname=variance\nanchor=0.5,1.25\n[regions]\nhalf_lines=-2:2:5\n"
      "[prop1]\nn_grid=100,1000,10000\nsamples=100000\n",
      "[experiment]\nkind=diagnose\nseed=10\n[population]\nname=chisq\n[diagnose]\nn=80\n[events]\nmoment_mc=100000\n",
      "[experiment]\nkind=oracle\nseed=10\n[oracle]\nmc=200000\nboot_reps=50000\n"};
  const auto root = std::filesystem::temp_directory_path() / "edgeboot_ac10";
  std::filesystem::remove_all(root);
  int files = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto cfg = experiment(configs[i]);
    std::ostringstream log;
    std::vector<std::filesystem::path> dirs;
    for (int jobs : {1, 8}) {
      dirs.push_back(root / (std::to_string(i) + "_jobs" + std::to_string(jobs)));
      h::run_experiment(cfg, {dirs.back().string(), jobs}, log);
    }
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
      auto read = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
      };
      const auto other = dirs[1] / entry.path().filename();
      if (!std::filesystem::exists(other) || read(entry.path()) != read(other))
        return {false, "differs: " + cfg.kind + "/" + entry.path().filename().string()};
      ++files;
    }
  }
  return {files > 0, std::to_string(files) + " files identical under --jobs 1 and --jobs 8"};
}

struct Criterion {
  std::string id;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"AC1", 5, cumulant_round_trip},  {"AC2", 120, expansion_structure}, {"AC3", 30, edgeworth_vs_gamma},
      {"AC4", 30, exact_bootstrap},     {"AC5", 600, expansion_error_rates},      {"AC6", 300, prop1_shape},
      {"AC7", 5, lemma1},               {"AC8", 60, boundary_mass},        {"AC9", 300, event_rates},
      {"AC10", 600, determinism}};
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (!only.empty() && c.id != only) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.passed && in_time;
    failed += !pass;
    char t[32];
    std::snprintf(t, sizeof t, "%.1fs", secs);
    std::cout << c.id << " " << (pass ? "PASS" : "FAIL") << " [" << t << (in_time ? "" : " over budget") << "] "
              << o.detail << std::endl;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion " << only << "\n";
    return 2;
  }
  return failed ? 1 : 0;
}
