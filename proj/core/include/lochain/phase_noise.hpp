// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_PHASE_NOISE_HPP
#define LOCHAIN_PHASE_NOISE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "lochain/biquad.hpp"
#include "lochain/rng.hpp"

namespace lochain {

/// Composite single-sideband phase-noise spectral model: an optional white
/// floor plus an optional 1/f^2 segment anchored at one (offset, level) point.
/// Levels are in dBc/Hz; the corresponding one-sided phase PSD is
/// S_phi(f) = 2 * 10^(L(f)/10) rad^2/Hz.
struct PhaseNoisePsd {
  struct Anchor {
    double offset_hz = 0.0;
    double level_dbchz = 0.0;
  };

  std::optional<double> white_floor_dbchz;
  std::optional<Anchor> f2_anchor;

  static PhaseNoisePsd white(double floor_dbchz) {
    PhaseNoisePsd p;
    p.white_floor_dbchz = floor_dbchz;
    return p;
  }
  static PhaseNoisePsd wiener(double offset_hz, double level_dbchz) {
    PhaseNoisePsd p;
    p.f2_anchor = Anchor{offset_hz, level_dbchz};
    return p;
  }
  static PhaseNoisePsd none() { return PhaseNoisePsd{}; }

  bool empty() const { return !white_floor_dbchz && !f2_anchor; }

  /// Shift every level by `db` (e.g. phase-noise budget scaling).
  PhaseNoisePsd shifted(double db) const;
};

/// Single-sideband density of the composite model at offset `f_offset_hz`,
/// as the linear-domain power sum of the white floor and the 1/f^2 segment
/// (which falls exactly 20 dB per decade from its anchor).
double psd_eval(const PhaseNoisePsd& psd, double f_offset_hz);

/// Refer a PSD across a frequency multiplication: every level is raised by
/// 20*log10(f_out/f_in).
PhaseNoisePsd refer_to_output(const PhaseNoisePsd& psd, double f_in_hz, double f_out_hz);

/// Sampled phase-noise realization. Phase values are unwrapped radians.
struct PhaseTrace {
  double sample_rate_hz = 0.0;
  std::vector<double> phase_rad;

  std::size_t size() const { return phase_rad.size(); }
};

/// Free-running oscillator phase as a discrete Wiener process: cumulative sum
/// of i.i.d. Gaussian increments scaled so the one-sided phase PSD matches the
/// 1/f^2 segment of `psd`. Requires an f2_anchor; the scaling is
/// var(increment) = 4*pi^2 * f_a^2 * 10^(L_a/10) / sample_rate (validated
/// against a Welch periodogram oracle in the test suite).
PhaseTrace gen_wiener_trace(const PhaseNoisePsd& psd, double sample_rate_hz, std::size_t n,
                            std::uint64_t seed);

/// White phase noise: i.i.d. Gaussian samples with per-sample variance
/// 2 * 10^(floor/10) * (sample_rate/2). Requires a white floor.
PhaseTrace gen_white_trace(const PhaseNoisePsd& psd, double sample_rate_hz, std::size_t n,
                           std::uint64_t seed);

/// Sum of the white and Wiener parts of a composite PSD (either may be
/// absent; an empty PSD yields a zero trace).
PhaseTrace synth_trace(const PhaseNoisePsd& psd, double sample_rate_hz, std::size_t n,
                       std::uint64_t seed);

/// Type-II second-order PLL configuration. The loop low-passes reference
/// noise (with gain f_out/f_ref) and high-passes VCO noise. ref_psd is
/// input-referred at f_ref; vco_psd is at f_out.
struct PllParams {
  double f_ref_hz = 100e6;
  double f_out_hz = 75e9;
  double loop_bandwidth_hz = 1e6;
  double damping = 0.70710678118654752;  // 1/sqrt(2)
  PhaseNoisePsd ref_psd;
  PhaseNoisePsd vco_psd;

  double multiplication_ratio() const { return f_out_hz / f_ref_hz; }
  /// Natural frequency of the second-order prototype; the configured loop
  /// bandwidth maps to f_n = bw / 0.786.
  double natural_frequency_hz() const { return loop_bandwidth_hz / 0.786; }

  ContinuousSos ref_transfer() const;  // H_ref(s), includes the xN ratio
  ContinuousSos vco_transfer() const;  // H_vco(s)

  void validate() const;
};

struct PllGains {
  double ref_gain = 0.0;  // |H_ref|, linear magnitude
  double vco_gain = 0.0;  // |H_vco|, linear magnitude
};

/// Magnitudes of the continuous-time loop transfer functions at offset f.
PllGains pll_transfer(const PllParams& params, double f_hz);

/// Filter an input-referred reference trace and a VCO trace through the
/// discrete-time loop (bilinear transform of the continuous prototypes at the
/// trace sample rate) and sum the two paths.
PhaseTrace pll_filter_traces(const PllParams& params, const PhaseTrace& ref_trace,
                             const PhaseTrace& vco_trace);

/// Jitter-cleaner stage: synthesize the IF PLL output (crystal reference and
/// IF VCO noise through the IF loop) plus white distribution-buffer noise at
/// `dist_floor_dbchz`, for use as the reference input of a mm-wave PLL whose
/// f_ref equals the IF output frequency.
PhaseTrace cascade_if_pll(const PllParams& if_params, double dist_floor_dbchz,
                          const PllParams& mmw_params, double sample_rate_hz, std::size_t n,
                          std::uint64_t seed);

/// Streaming synthesizer for one composite PSD; emits consecutive blocks of
/// the same sequence gen_*_trace would produce in one shot.
class NoiseStream {
 public:
  NoiseStream(const PhaseNoisePsd& psd, double sample_rate_hz, std::uint64_t seed);

  void next(std::span<double> out);

 private:
  double white_sigma_ = 0.0;
  double wiener_sigma_ = 0.0;
  double walk_ = 0.0;
  GaussianSampler white_rng_;
  GaussianSampler wiener_rng_;
};

}  // namespace lochain

#endif
