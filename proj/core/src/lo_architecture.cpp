// SPDX-License-Identifier: Apache-2.0

#include "lochain/lo_architecture.hpp"

#include <cmath>
#include <stdexcept>

#include "lochain/units.hpp"

namespace lochain {

PhaseNoisePsd LoArchitecture::per_vco_psd() const {
  if (!budget_scaling) return mmw_pll.vco_psd;
  return mmw_pll.vco_psd.shifted(10.0 * std::log10(static_cast<double>(n_groups())));
}

void LoArchitecture::validate() const {
  if (m_elements < 1) throw std::invalid_argument("LoArchitecture: m_elements must be >= 1");
  if (n_per_pll < 1 || n_per_pll > m_elements)
    throw std::invalid_argument("LoArchitecture: n_per_pll must be in [1, m_elements]");
  if (m_elements % n_per_pll != 0)
    throw std::invalid_argument("LoArchitecture: n_per_pll must divide m_elements");
  mmw_pll.validate();
  if (if_pll) {
    if_pll->pll.validate();
    if (if_pll->pll.f_out_hz != mmw_pll.f_ref_hz)
      throw std::invalid_argument(
          "LoArchitecture: IF PLL output frequency must equal mm-wave PLL reference frequency");
  }
}

// One noise path: a composite-PSD source plus the loop filters it passes
// through before reaching the element phase.
struct LoNoiseStreamer::Chain {
  std::vector<std::unique_ptr<NoiseStream>> sources;
  // Per-source pre-filters (applied to that source alone), then common
  // post-filters applied to the sum.
  std::vector<std::vector<Biquad>> per_source_filters;
  std::vector<Biquad> post_filters;

  void next(std::span<double> out, std::vector<double>& scratch) {
    std::fill(out.begin(), out.end(), 0.0);
    scratch.resize(out.size());
    for (std::size_t s = 0; s < sources.size(); ++s) {
      sources[s]->next(scratch);
      for (Biquad& f : per_source_filters[s]) f.process(scratch);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += scratch[i];
    }
    for (Biquad& f : post_filters) f.process(out);
  }
};

LoNoiseStreamer::LoNoiseStreamer(const LoArchitecture& arch, double sample_rate_hz,
                                 std::uint64_t seed) {
  arch.validate();
  n_per_group_ = arch.n_per_pll;
  const int groups = arch.n_groups();

  ref_chain_ = std::make_unique<Chain>();
  if (arch.if_pll) {
    // Crystal reference and IF VCO through the IF loop, buffer noise added at
    // IF, then everything through the mm-wave reference path.
    const PllParams& ifp = arch.if_pll->pll;
    auto add = [&](const PhaseNoisePsd& psd, std::uint64_t idx, const ContinuousSos* pre) {
      ref_chain_->sources.push_back(
          std::make_unique<NoiseStream>(psd, sample_rate_hz, derive_seed(seed, idx)));
      std::vector<Biquad> filters;
      if (pre) filters.push_back(Biquad::bilinear(*pre, sample_rate_hz));
      ref_chain_->per_source_filters.push_back(std::move(filters));
    };
    const ContinuousSos if_ref = ifp.ref_transfer();
    const ContinuousSos if_vco = ifp.vco_transfer();
    add(ifp.ref_psd, 0, &if_ref);
    add(ifp.vco_psd, 1, &if_vco);
    add(PhaseNoisePsd::white(arch.if_pll->dist_floor_dbchz), 2, nullptr);
  } else {
    ref_chain_->sources.push_back(std::make_unique<NoiseStream>(
        arch.mmw_pll.ref_psd, sample_rate_hz, derive_seed(seed, 0)));
    ref_chain_->per_source_filters.emplace_back();
  }
  ref_chain_->post_filters.push_back(Biquad::bilinear(arch.mmw_pll.ref_transfer(), sample_rate_hz));

  const PhaseNoisePsd vco_psd = arch.per_vco_psd();
  const ContinuousSos vco_tf = arch.mmw_pll.vco_transfer();
  vco_chains_.reserve(groups);
  for (int g = 0; g < groups; ++g) {
    auto chain = std::make_unique<Chain>();
    chain->sources.push_back(std::make_unique<NoiseStream>(
        vco_psd, sample_rate_hz, derive_seed(seed, 16 + static_cast<std::uint64_t>(g))));
    chain->per_source_filters.emplace_back();
    chain->post_filters.push_back(Biquad::bilinear(vco_tf, sample_rate_hz));
    vco_chains_.push_back(std::move(chain));
  }
  group_blocks_.resize(groups);
}

LoNoiseStreamer::~LoNoiseStreamer() = default;

void LoNoiseStreamer::next(std::size_t count) {
  ref_block_.resize(count);
  ref_chain_->next(ref_block_, scratch_);
  for (std::size_t g = 0; g < group_blocks_.size(); ++g) {
    group_blocks_[g].resize(count);
    vco_chains_[g]->next(group_blocks_[g], scratch_);
  }
}

ElementTraceSet element_traces(const LoArchitecture& arch, std::size_t n_samples,
                               double sample_rate_hz, std::uint64_t seed) {
  LoNoiseStreamer stream(arch, sample_rate_hz, seed);
  stream.next(n_samples);
  ElementTraceSet set;
  const int groups = arch.n_groups();
  set.distinct.resize(groups);
  for (int g = 0; g < groups; ++g) {
    set.distinct[g].sample_rate_hz = sample_rate_hz;
    set.distinct[g].phase_rad.resize(n_samples);
    const auto& vco = stream.group_block(g);
    const auto& ref = stream.ref_block();
    for (std::size_t t = 0; t < n_samples; ++t)
      set.distinct[g].phase_rad[t] = ref[t] + vco[t];
  }
  set.group_of.resize(arch.m_elements);
  for (int e = 0; e < arch.m_elements; ++e) set.group_of[e] = e / arch.n_per_pll;
  return set;
}

SplitTraces split_correlated_uncorrelated(const ElementTraceSet& set) {
  const int m = set.n_elements();
  if (m == 0) throw std::invalid_argument("split_correlated_uncorrelated: empty set");
  const std::size_t n = set.distinct.front().size();
  SplitTraces out;
  out.correlated.sample_rate_hz = set.distinct.front().sample_rate_hz;
  out.correlated.phase_rad.assign(n, 0.0);
  // Elements of a group share one trace, so the across-element mean is the
  // count-weighted mean over distinct traces (exact when there is one group).
  std::vector<double> weight(set.distinct.size(), 0.0);
  for (int e = 0; e < m; ++e) weight[set.group_of[e]] += 1.0 / m;
  for (std::size_t g = 0; g < set.distinct.size(); ++g) {
    const auto& tr = set.distinct[g].phase_rad;
    for (std::size_t t = 0; t < n; ++t) out.correlated.phase_rad[t] += weight[g] * tr[t];
  }
  out.residuals.resize(m);
  for (int e = 0; e < m; ++e) {
    out.residuals[e].sample_rate_hz = out.correlated.sample_rate_hz;
    out.residuals[e].phase_rad.resize(n);
    const auto& tr = set.element(e).phase_rad;
    for (std::size_t t = 0; t < n; ++t)
      out.residuals[e].phase_rad[t] = tr[t] - out.correlated.phase_rad[t];
  }
  return out;
}

double architecture_gamma(const LoArchitecture& arch, std::size_t n_samples, std::uint64_t seed) {
  arch.validate();
  if (arch.n_per_pll == 1) return 1.0;
  if (arch.n_per_pll == arch.m_elements) return 0.0;

  // VCO-only ensemble: mute the reference path so only the uncorrelated
  // mechanism is measured.
  LoArchitecture vco_only = arch;
  vco_only.if_pll.reset();
  vco_only.mmw_pll.ref_psd = PhaseNoisePsd::none();

  LoNoiseStreamer stream(vco_only, 16.0 * arch.mmw_pll.loop_bandwidth_hz, seed);
  stream.next(n_samples);
  const int groups = arch.n_groups();
  double total = 0.0;
  double resid = 0.0;
  for (std::size_t t = 0; t < n_samples; ++t) {
    double mean = 0.0;
    for (int g = 0; g < groups; ++g) mean += stream.group_block(g)[t];
    mean /= groups;
    for (int g = 0; g < groups; ++g) {
      const double v = stream.group_block(g)[t];
      total += v * v;
      resid += (v - mean) * (v - mean);
    }
  }
  return total > 0.0 ? resid / total : 0.0;
}

}  // namespace lochain
