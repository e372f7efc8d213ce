// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_EXPERIMENTS_HPP
#define LOCHAIN_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "lochain/run_config.hpp"

namespace lochain {

struct ExperimentResult {
  int exit_code = 0;
  std::vector<std::string> files_written;
  std::string digest;  // one-line human summary
};

/// Execute the configured experiment and write <out>/<experiment>.csv plus
/// <out>/<experiment>_summary.json. Every output embeds the config hash and
/// seed; identical config+seed reruns are byte-identical. While an experiment
/// is in flight a "<experiment>.incomplete" marker exists in the output
/// directory; it is removed on success.
ExperimentResult run_experiment(const RunConfig& config);

/// Fixed-width text rendering of the link-budget table (for terminal output).
std::string render_link_budget_text(const std::vector<LinkColumn>& columns);

}  // namespace lochain

#endif
