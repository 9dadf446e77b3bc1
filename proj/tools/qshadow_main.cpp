#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qshadow/log.hpp"
#include "qshadow/runner.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = -1;
  bool bit_exact = false;
};

qshadow::runner::ExperimentConfig load_config(const CliOverrides& cli) {
  auto config = qshadow::runner::ExperimentConfig::from_json_file(cli.config_path);
  if (!cli.out_dir.empty()) config.out_dir = cli.out_dir;
  if (cli.seed_set) config.master_seed = cli.seed;
  if (cli.workers >= 0) config.workers = cli.workers;
  if (cli.bit_exact) config.bit_exact = true;
  config.validate();
  return config;
}

void add_common_options(CLI::App* cmd, CliOverrides& cli) {
  cmd->add_option("--config", cli.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--out", cli.out_dir, "output directory (overrides config)");
  auto* seed = cmd->add_option("--seed", cli.seed, "master seed (overrides config)");
  cmd->callback([&cli, seed] { cli.seed_set = seed->count() > 0; });
  cmd->add_option("--workers", cli.workers, "worker threads (0 = hardware)");
  cmd->add_flag("--bit-exact", cli.bit_exact, "fixed-order reductions for byte-stable output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qshadow: squeezed-vacuum shadow imaging simulator"};
  app.require_subcommand(1);

  CliOverrides cli;
  auto* theory = app.add_subcommand("theory", "analytic noise and transmission maps");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo homodyne imaging run");
  auto* classical = app.add_subcommand("classical", "direct-intensity baseline run");
  auto* sweep = app.add_subcommand("sweep", "similarity vs radius and photon budget");
  for (auto* cmd : {theory, simulate, classical, sweep}) add_common_options(cmd, cli);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = load_config(cli);
    qshadow::runner::RunManifest manifest;
    if (theory->parsed()) {
      manifest = qshadow::runner::run_theory(config);
    } else if (simulate->parsed()) {
      manifest = qshadow::runner::run_simulate(config);
    } else if (classical->parsed()) {
      manifest = qshadow::runner::run_classical(config);
    } else {
      manifest = qshadow::runner::run_sweep(config);
    }
    std::printf("%s: %zu artifacts in %s (%.0f ms)\n", manifest.command.c_str(),
                manifest.files.size(), config.out_dir.c_str(), manifest.wall_clock_ms);
    return 0;
  } catch (const qshadow::ConfigError& e) {
    qshadow::util::log_error(e.what());
    return 2;
  } catch (const qshadow::IoError& e) {
    qshadow::util::log_error(e.what());
    return 3;
  } catch (const std::exception& e) {
    qshadow::util::log_error(e.what());
    return 1;
  }
}
