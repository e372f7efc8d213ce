// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_RUN_CONFIG_HPP
#define LOCHAIN_RUN_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lochain/channel_link.hpp"
#include "lochain/power_model.hpp"
#include "lochain/sim_engine.hpp"

namespace lochain {

enum class ExperimentKind {
  power_sweep,
  link_budget,
  pll_bw_sweep,
  user_sweep,
  subarray_sweep,
  ber_curve,
  single_run,
};

ExperimentKind experiment_from_name(const std::string& name);
std::string experiment_name(ExperimentKind kind);

/// Link-budget column with antenna gains specified as element counts
/// (gain = 10*log10(elements)).
struct LinkColumn {
  LinkBudget budget;
  int bs_elements = 1;
  int ue_elements = 1;
};

struct SweepLists {
  std::vector<double> pll_bandwidths_hz;
  std::vector<double> ref_levels_output_dbchz;  // white reference floor at f_out
  std::vector<int> k_users;
  std::vector<int> n_per_pll;
  std::vector<double> thermal_snrs_db;
  std::vector<ConstellationKind> constellations;
};

/// Fully validated run configuration with defaults filled in. Field units are
/// explicit in the JSON schema key names (…_hz, …_dbchz, …_w, …).
struct RunConfig {
  ExperimentKind experiment = ExperimentKind::single_run;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir = "out";

  SimConfig sim;
  PowerModelParams power;
  std::vector<LinkColumn> link_columns;
  SweepLists sweep;
  CrBandwidthPolicy cr_policy;

  std::string canonical_json;  // config echo with defaults applied
  std::string config_hash;     // FNV-1a over canonical_json, 16 hex digits
};

/// Parse and validate a JSON config document. Empty input yields the
/// all-defaults configuration. Unknown keys and out-of-range values are
/// rejected with messages naming the offending key.
RunConfig parse_config_text(const std::string& json_text);
RunConfig parse_config_file(const std::string& path);

/// Recompute canonical_json and config_hash from the struct fields (used
/// after command-line overrides of seed/jobs/out_dir/experiment).
void canonicalize(RunConfig& config);

/// 64-bit FNV-1a as a hex string.
std::string fnv1a_hex(const std::string& data);

}  // namespace lochain

#endif
