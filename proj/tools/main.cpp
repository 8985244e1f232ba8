#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chemostat/cli.hpp"
#include "chemostat/errors.hpp"

int main(int argc, char** argv) {
  namespace cli = chemostat::cli;
  CLI::App app{"Stochastic chemostat: flows, exact simulation, drift certificates, "
               "quasi-stationary estimates and explicit bounds"};
  app.set_version_flag("--version", std::string(cli::kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  unsigned threads = 0;
  for (const auto& name : cli::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--threads", threads,
                    "worker threads (default: CHEMOSTAT_QSD_THREADS, else 1)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  const auto* parsed = app.get_subcommands().front();
  try {
    auto cfg = cli::parse_config(config_path);
    if (parsed->count("--seed")) cfg.seed = seed;
    if (parsed->count("--out")) cfg.output_dir = out_dir;
    return cli::run(sub, cfg, threads);
  } catch (const chemostat::Error& e) {
    std::cerr << e.what() << "\n";
    return e.exit_code();
  }
}
