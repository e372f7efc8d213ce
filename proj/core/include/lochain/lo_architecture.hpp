// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_LO_ARCHITECTURE_HPP
#define LOCHAIN_LO_ARCHITECTURE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "lochain/phase_noise.hpp"

namespace lochain {

/// Optional jitter-cleaner PLL between the crystal reference and the mm-wave
/// PLLs, plus the white noise floor of the IF distribution buffers.
struct IfPllStage {
  PllParams pll;
  double dist_floor_dbchz = -135.0;
};

/// Array-level LO generation plan: M elements served by M/N PLLs (N elements
/// per PLL). N = 1 is per-element carrier generation, N = M a single central
/// PLL. mmw_pll.vco_psd is the single-central-VCO noise level; with
/// budget_scaling on, each physical VCO is degraded by 10*log10(M/N) dB so the
/// total VCO power stays constant across architectures.
struct LoArchitecture {
  int m_elements = 1;
  int n_per_pll = 1;
  PllParams mmw_pll;
  std::optional<IfPllStage> if_pll;
  bool budget_scaling = true;

  int n_groups() const { return m_elements / n_per_pll; }

  /// PSD of one physical VCO after the constant-total-power budget split.
  PhaseNoisePsd per_vco_psd() const;

  void validate() const;
};

/// Per-element phase traces with the PLL-group sharing structure made
/// explicit: elements of the same group reference the same trace object, so
/// within-group traces are bit-equal by construction.
struct ElementTraceSet {
  std::vector<PhaseTrace> distinct;  // one per PLL group
  std::vector<int> group_of;         // element index -> group index

  int n_elements() const { return static_cast<int>(group_of.size()); }
  const PhaseTrace& element(int i) const { return distinct[group_of[i]]; }
};

/// Generate the full element trace set for an architecture: one shared
/// reference (or IF-cascade) contribution filtered through H_ref, plus M/N
/// independent VCO processes filtered through H_vco, one per group.
ElementTraceSet element_traces(const LoArchitecture& arch, std::size_t n_samples,
                               double sample_rate_hz, std::uint64_t seed);

struct SplitTraces {
  PhaseTrace correlated;             // across-element mean
  std::vector<PhaseTrace> residuals; // one per element; sums to zero per sample
};

/// Split a trace set into its across-element mean and per-element residuals.
SplitTraces split_correlated_uncorrelated(const ElementTraceSet& set);

/// Architecture parameter describing the fraction of VCO phase noise that is
/// uncorrelated across elements: exactly 1 for N=1 and 0 for N=M. For
/// intermediate N there is no closed form; the value is estimated empirically
/// as the residual-variance fraction of a VCO-only trace ensemble.
double architecture_gamma(const LoArchitecture& arch, std::size_t n_samples = 1 << 16,
                          std::uint64_t seed = 0x10c4a1ULL);

/// Streaming generator of the per-element phase processes; emits consecutive
/// blocks identical to what element_traces would produce in one shot.
/// Element i's phase at sample t is ref_block()[t] + group_block(g)[t] with
/// g = group_of(i).
class LoNoiseStreamer {
 public:
  LoNoiseStreamer(const LoArchitecture& arch, double sample_rate_hz, std::uint64_t seed);
  ~LoNoiseStreamer();

  void next(std::size_t count);

  const std::vector<double>& ref_block() const { return ref_block_; }
  const std::vector<double>& group_block(int g) const { return group_blocks_[g]; }
  int n_groups() const { return static_cast<int>(group_blocks_.size()); }
  int group_of(int element) const { return element / n_per_group_; }

 private:
  struct Chain;
  std::unique_ptr<Chain> ref_chain_;
  std::vector<std::unique_ptr<Chain>> vco_chains_;
  std::vector<double> ref_block_;
  std::vector<std::vector<double>> group_blocks_;
  std::vector<double> scratch_;
  int n_per_group_ = 1;
};

}  // namespace lochain

#endif
