// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: one subcommand per experiment, configuration from a
// JSON file with flag overrides for seed/jobs/output directory.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "lochain/experiments.hpp"
#include "lochain/run_config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"LO-chain phase-noise and distribution-power simulator for mm-wave arrays"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
  app.add_option("--seed", seed, "Override the RNG seed");
  app.add_option("--jobs", jobs, "Override the trial parallelism degree");
  app.add_option("--out", out_dir, "Override the output directory");

  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"power-sweep", "LO power vs elements-per-PLL with the distribution power model"},
      {"link-budget", "RF and mm-wave link budget table"},
      {"pll-bw-sweep", "SINR vs mm-wave PLL bandwidth (per reference noise level)"},
      {"user-sweep", "Multi-user SINR vs user count with interference-model fit"},
      {"subarray-sweep", "Multi-user SINR vs elements-per-PLL"},
      {"ber-curve", "Sum BER vs thermal SNR with SNR-adaptive carrier recovery"},
      {"single-run", "One end-to-end uplink simulation"},
  };
  for (const auto& [name, desc] : experiments) app.add_subcommand(name, desc);

  CLI11_PARSE(app, argc, argv);

  try {
    lochain::RunConfig cfg = config_path.empty() ? lochain::parse_config_text("")
                                                 : lochain::parse_config_file(config_path);
    for (const auto& [name, desc] : experiments)
      if (app.got_subcommand(name)) cfg.experiment = lochain::experiment_from_name(name);
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (out_dir) cfg.out_dir = *out_dir;
    cfg.sim.seed = cfg.seed;
    cfg.sim.jobs = cfg.jobs;
    lochain::canonicalize(cfg);

    for (const std::string& w : cfg.sim.validate())
      std::cerr << "warning: " << w << '\n';

    const lochain::ExperimentResult res = lochain::run_experiment(cfg);
    if (cfg.experiment == lochain::ExperimentKind::link_budget)
      std::cout << lochain::render_link_budget_text(cfg.link_columns);
    std::cout << res.digest << '\n';
    for (const std::string& f : res.files_written) std::cout << "wrote " << f << '\n';
    return res.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
