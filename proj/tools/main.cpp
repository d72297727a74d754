#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "harness.hpp"

namespace h = edgeboot::harness;

int main(int argc, char** argv) {
  CLI::App app{"edgeboot: Edgeworth expansions for the bootstrap of smooth statistics"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int jobs = 1;

  for (const char* name : {"compare", "rates", "prop1", "diagnose", "oracle"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--jobs", jobs, "worker threads; results do not depend on it")->check(CLI::Range(1, 1024));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : h::kExitConfig;
  }
  const std::string kind = app.get_subcommands().front()->get_name();

  try {
    h::Config cfg = h::Config::load(config_path);
    if (cfg.has("experiment", "kind") && cfg.get_string("experiment", "kind", "") != kind)
      cfg.fail("experiment", "kind", "config is for '" + cfg.get_string("experiment", "kind", "") +
                                          "', not '" + kind + "'");
    cfg.set("experiment", "kind", kind);
    const h::ExperimentConfig exp = h::build_experiment(cfg, seed);
    h::RunOptions opts;
    opts.out_dir = out_dir.empty() ? exp.output : out_dir;
    opts.jobs = jobs;
    return h::run_experiment(exp, opts, std::cout);
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return h::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
